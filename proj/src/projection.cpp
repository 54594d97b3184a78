#include "growl/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "growl/error.hpp"
#include "growl/io_util.hpp"

namespace growl {

DepthImage::DepthImage(int width, int height, std::vector<std::uint16_t> values, int max_range_mm)
    : width_(width), height_(height), values_(std::move(values)), max_range_mm_(max_range_mm) {
  if (width <= 0 || height <= 0) throw ValidationError("depth image must have positive dimensions");
  if (max_range_mm <= 0) throw ValidationError("max_range_mm must be positive");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ValidationError("depth image holds " + std::to_string(values_.size()) + " readings, expected " +
                          std::to_string(static_cast<std::size_t>(width) * height));
  for (auto v : values_)
    if (v > max_range_mm)
      throw ValidationError("depth reading " + std::to_string(v) + " mm exceeds max range " +
                            std::to_string(max_range_mm) + " mm");
}

void validate(const BoundingBox& b, int width, int height) {
  if (b.x0 >= b.x1 || b.y0 >= b.y1) throw ValidationError("bounding box has no area");
  if (b.x0 < 0 || b.y0 < 0 || b.x1 > width || b.y1 > height)
    throw ValidationError("bounding box [" + std::to_string(b.x0) + "," + std::to_string(b.y0) + "," +
                          std::to_string(b.x1) + "," + std::to_string(b.y1) + "] leaves the " +
                          std::to_string(width) + "x" + std::to_string(height) + " image");
}

PixelPoint centroid(const BoundingBox& b) {
  return {(b.x0 + b.x1) / 2.0, (b.y0 + b.y1) / 2.0};
}

double depth_at_centroid(const DepthImage& depth, PixelPoint c, int window) {
  if (window < 1 || window % 2 == 0) throw ConfigError("depth window must be an odd integer >= 1");
  const int cx = std::clamp(static_cast<int>(std::lround(c.x)), 0, depth.width() - 1);
  const int cy = std::clamp(static_cast<int>(std::lround(c.y)), 0, depth.height() - 1);
  const int half = window / 2;
  std::vector<std::uint16_t> valid;
  for (int y = std::max(0, cy - half); y <= std::min(depth.height() - 1, cy + half); ++y)
    for (int x = std::max(0, cx - half); x <= std::min(depth.width() - 1, cx + half); ++x)
      if (auto v = depth.at(x, y); v != 0) valid.push_back(v);
  if (valid.empty())
    throw NoValidDepth("no valid depth reading around pixel (" + std::to_string(cx) + ", " + std::to_string(cy) +
                       ")");
  std::sort(valid.begin(), valid.end());
  const std::size_t n = valid.size();
  if (n % 2 == 1) return valid[n / 2];
  return (static_cast<double>(valid[n / 2 - 1]) + static_cast<double>(valid[n / 2])) / 2.0;
}

TopDownPoint project_topdown(const EgocentricDetection& det, const DepthImage& depth, int img_width,
                             const ProjectionOptions& opts) {
  if (img_width <= 0) throw ConfigError("image width must be positive");
  validate(det.bbox, depth.width(), depth.height());
  const PixelPoint c = centroid(det.bbox);
  double mm = 0.0;
  try {
    mm = depth_at_centroid(depth, c, opts.window);
  } catch (const NoValidDepth& e) {
    throw NoValidDepth("detection '" + det.id + "': " + e.what());
  }
  const double u = c.x / img_width;
  if (opts.mode == ProjectionMode::normalized) return {u, mm / depth.max_range_mm()};
  const double meters = mm / 1000.0;
  return {(u - 0.5) * 2.0 * meters * std::tan(opts.hfov_rad / 2.0), meters};
}

namespace {
using json = nlohmann::ordered_json;
}

DetectionFrame parse_detection_frame(std::string_view text, std::string_view source) {
  const std::string src(source);
  DetectionFrame f;
  try {
    const json doc = json::parse(text);
    f.frame_id = doc.at("frame_id").get<std::string>();
    f.img_width = doc.at("img_width").get<int>();
    f.img_height = doc.at("img_height").get<int>();
    f.max_range_mm = doc.at("max_range_mm").get<int>();
    const auto& dets = doc.at("detections");
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const auto& jd = dets[i];
      const auto box = jd.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw ParseError(src + ": detections[" + std::to_string(i) + "].bbox needs 4 values");
      EgocentricDetection d{jd.at("id").get<std::string>(), {box[0], box[1], box[2], box[3]}, std::nullopt};
      if (auto t = jd.find("theta"); t != jd.end() && !t->is_null()) d.theta = t->get<double>();
      f.detections.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw ParseError(src + ": " + e.what());
  }
  if (f.img_width <= 0 || f.img_height <= 0) throw ValidationError(src + ": image dimensions must be positive");
  for (const auto& d : f.detections) validate(d.bbox, f.img_width, f.img_height);
  return f;
}

std::string detection_frame_to_json(const DetectionFrame& f) {
  json doc;
  doc["frame_id"] = f.frame_id;
  doc["img_width"] = f.img_width;
  doc["img_height"] = f.img_height;
  doc["max_range_mm"] = f.max_range_mm;
  doc["detections"] = json::array();
  for (const auto& d : f.detections) {
    json jd{{"id", d.id}, {"bbox", {d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1}}};
    if (d.theta) jd["theta"] = *d.theta;
    doc["detections"].push_back(std::move(jd));
  }
  return doc.dump(1) + "\n";
}

DepthImage read_depth_pgm(const std::filesystem::path& path, int max_range_mm) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  const std::string where = path.string();
  if (next_token() != "P5") throw ParseError(where + ": not a binary PGM (P5)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw ParseError(where + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw ParseError(where + ": invalid PGM header");
  ++pos;  // single whitespace byte before the raster
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() < pos + count * bytes_per) throw ParseError(where + ": truncated PGM raster");
  std::vector<std::uint16_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos + i * bytes_per);
    values[i] = bytes_per == 1 ? p[0] : static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  }
  try {
    return DepthImage(width, height, std::move(values), max_range_mm);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

std::string encode_depth_pgm(const DepthImage& depth) {
  std::string out = "P5\n" + std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n65535\n";
  out.reserve(out.size() + depth.values().size() * 2);
  for (auto v : depth.values()) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

Scene project_frame(const DetectionFrame& frame, const DepthImage& depth, const ProjectionOptions& opts) {
  if (depth.width() != frame.img_width || depth.height() != frame.img_height)
    throw ValidationError("frame '" + frame.frame_id + "': depth image is " + std::to_string(depth.width()) + "x" +
                          std::to_string(depth.height()) + " but detections assume " +
                          std::to_string(frame.img_width) + "x" + std::to_string(frame.img_height));
  Scene scene{frame.frame_id, {}, std::nullopt, ViewTag::egocentric_derived};
  for (const auto& det : frame.detections) {
    const auto p = project_topdown(det, depth, frame.img_width, opts);
    scene.individuals.push_back(make_individual(det.id, p.x, p.y, det.theta.value_or(0.0)));
  }
  validate(scene);
  return scene;
}

}  // namespace growl
