#include "growl/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "growl/error.hpp"
#include "growl/io_util.hpp"

namespace growl {

using json = nlohmann::ordered_json;

double wrap_angle(double radians) {
  if (radians >= -kPi && radians < kPi) return radians;
  double r = radians - 2.0 * kPi * std::floor((radians + kPi) / (2.0 * kPi));
  if (r >= kPi) r -= 2.0 * kPi;
  if (r < -kPi) r = -kPi;
  return r;
}

Individual make_individual(std::string id, double x, double y, double theta) {
  return Individual{std::move(id), x, y, wrap_angle(theta)};
}

std::string_view to_string(ViewTag tag) {
  return tag == ViewTag::topdown ? "topdown" : "egocentric-derived";
}

ViewTag parse_view_tag(std::string_view text) {
  if (text == "topdown") return ViewTag::topdown;
  if (text == "egocentric-derived") return ViewTag::egocentric_derived;
  throw ParseError("unknown view_tag '" + std::string(text) + "'");
}

const Individual* Scene::find(std::string_view id) const {
  for (const auto& ind : individuals)
    if (ind.id == id) return &ind;
  return nullptr;
}

const Scene* Dataset::find(std::string_view frame_id) const {
  for (const auto& s : scenes)
    if (s.frame_id == frame_id) return &s;
  return nullptr;
}

void validate(const Scene& scene) {
  const std::string where = "frame '" + scene.frame_id + "': ";
  std::set<std::string_view> ids;
  for (const auto& ind : scene.individuals) {
    if (!ids.insert(ind.id).second) throw ValidationError(where + "duplicate individual id '" + ind.id + "'");
    if (!std::isfinite(ind.x) || !std::isfinite(ind.y))
      throw ValidationError(where + "non-finite position for '" + ind.id + "'");
    if (!std::isfinite(ind.theta) || ind.theta < -kPi || ind.theta >= kPi)
      throw ValidationError(where + "orientation of '" + ind.id + "' is not wrapped into [-pi, pi)");
  }
  if (!scene.groups) return;
  std::set<std::string_view> grouped;
  for (std::size_t g = 0; g < scene.groups->size(); ++g) {
    const auto& group = (*scene.groups)[g];
    if (group.size() < 2)
      throw ValidationError(where + "group " + std::to_string(g) + " has fewer than 2 members");
    for (const auto& member : group) {
      if (!ids.contains(member))
        throw ValidationError(where + "group member '" + member + "' is not an individual of the frame");
      if (!grouped.insert(member).second)
        throw ValidationError(where + "individual '" + member + "' belongs to more than one group");
    }
  }
}

void validate(const Dataset& dataset) {
  if (dataset.units != "meters" && dataset.units != "normalized")
    throw ValidationError("dataset units must be 'meters' or 'normalized', got '" + dataset.units + "'");
  std::set<std::string_view> frames;
  for (const auto& scene : dataset.scenes) {
    if (!frames.insert(scene.frame_id).second)
      throw ValidationError("duplicate frame_id '" + scene.frame_id + "'");
    validate(scene);
  }
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

double number_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  if (!it->is_number()) throw ParseError(where + "." + key + ": expected a number");
  return it->get<double>();
}

}  // namespace

Dataset parse_dataset_json(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
  const std::string root(source);
  Dataset d;
  d.name = field<std::string>(doc, "name", root);
  d.units = field<std::string>(doc, "units", root);
  const auto scenes = doc.find("scenes");
  if (scenes == doc.end() || !scenes->is_array()) throw ParseError(root + ": 'scenes' must be an array");
  for (std::size_t s = 0; s < scenes->size(); ++s) {
    const json& js = (*scenes)[s];
    const std::string where = root + ": scenes[" + std::to_string(s) + "]";
    Scene scene;
    scene.frame_id = field<std::string>(js, "frame_id", where);
    scene.view_tag = parse_view_tag(field<std::string>(js, "view_tag", where));
    const auto inds = js.find("individuals");
    if (inds == js.end() || !inds->is_array()) throw ParseError(where + ": 'individuals' must be an array");
    for (std::size_t i = 0; i < inds->size(); ++i) {
      const json& ji = (*inds)[i];
      const std::string iw = where + ".individuals[" + std::to_string(i) + "]";
      scene.individuals.push_back(make_individual(field<std::string>(ji, "id", iw), number_field(ji, "x", iw),
                                                  number_field(ji, "y", iw), number_field(ji, "theta", iw)));
    }
    if (auto g = js.find("groups"); g != js.end() && !g->is_null()) {
      try {
        scene.groups = g->get<std::vector<Group>>();
      } catch (const json::exception& e) {
        throw ParseError(where + ".groups: " + e.what());
      }
    }
    d.scenes.push_back(std::move(scene));
  }
  validate(d);
  return d;
}

std::string dataset_to_json(const Dataset& dataset) {
  json doc;
  doc["name"] = dataset.name;
  doc["units"] = dataset.units;
  doc["scenes"] = json::array();
  for (const auto& scene : dataset.scenes) {
    json js;
    js["frame_id"] = scene.frame_id;
    js["view_tag"] = std::string(to_string(scene.view_tag));
    js["individuals"] = json::array();
    for (const auto& ind : scene.individuals)
      js["individuals"].push_back({{"id", ind.id}, {"x", ind.x}, {"y", ind.y}, {"theta", ind.theta}});
    if (scene.groups) js["groups"] = *scene.groups;
    doc["scenes"].push_back(std::move(js));
  }
  return doc.dump(1) + "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ParseError(where + ": '" + text + "' is not a number");
  return v;
}

std::filesystem::path companion_groups_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension();
  p += ".groups.csv";
  return p;
}

template <typename RowFn>
void for_each_csv_row(const std::filesystem::path& path, std::size_t columns, std::string_view header_first,
                      RowFn&& fn) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (lineno == 1 && !cells.empty() && cells[0] == header_first) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != columns)
      throw ParseError(where + ": expected " + std::to_string(columns) + " columns, got " +
                       std::to_string(cells.size()));
    fn(cells, where);
  }
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  Dataset d;
  d.name = opts.name.empty() ? path.stem().string() : opts.name;
  d.units = opts.units;
  std::map<std::string, std::size_t> frame_index;
  for_each_csv_row(path, 5, "frame_id", [&](const std::vector<std::string>& c, const std::string& where) {
    auto [it, inserted] = frame_index.try_emplace(c[0], d.scenes.size());
    if (inserted) d.scenes.push_back(Scene{c[0], {}, std::nullopt, ViewTag::topdown});
    d.scenes[it->second].individuals.push_back(make_individual(
        c[1], parse_number(c[2], where), parse_number(c[3], where), parse_number(c[4], where)));
  });

  const auto groups_path = opts.groups_path.value_or(companion_groups_path(path));
  if (opts.groups_path || std::filesystem::exists(groups_path)) {
    // Every frame of an annotated file carries ground truth, possibly empty.
    for (auto& s : d.scenes) s.groups.emplace();
    std::map<std::pair<std::string, long>, std::size_t> group_slot;
    for_each_csv_row(groups_path, 3, "frame_id", [&](const std::vector<std::string>& c, const std::string& where) {
      auto f = frame_index.find(c[0]);
      if (f == frame_index.end()) throw ParseError(where + ": unknown frame_id '" + c[0] + "'");
      long gi = 0;
      auto [ptr, ec] = std::from_chars(c[1].data(), c[1].data() + c[1].size(), gi);
      if (ec != std::errc{} || ptr != c[1].data() + c[1].size())
        throw ParseError(where + ": group_index '" + c[1] + "' is not an integer");
      auto& groups = *d.scenes[f->second].groups;
      auto [slot, fresh] = group_slot.try_emplace({c[0], gi}, groups.size());
      if (fresh) groups.emplace_back();
      groups[slot->second].push_back(c[2]);
    });
  }
  validate(d);
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::string rows = "frame_id,id,x,y,theta\n";
  std::string groups = "frame_id,group_index,id\n";
  bool any_groups = false;
  for (const auto& s : d.scenes) {
    for (const auto& ind : s.individuals)
      rows += s.frame_id + "," + ind.id + "," + format_double(ind.x) + "," + format_double(ind.y) + "," +
              format_double(ind.theta) + "\n";
    if (!s.groups) continue;
    any_groups = true;
    for (std::size_t g = 0; g < s.groups->size(); ++g)
      for (const auto& m : (*s.groups)[g]) groups += s.frame_id + "," + std::to_string(g) + "," + m + "\n";
  }
  write_file_atomic(path, rows);
  if (any_groups) write_file_atomic(companion_groups_path(path), groups);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format, const CsvOptions& csv) {
  if (!std::filesystem::exists(path)) throw IoError("dataset file not found: " + path.string());
  if (format == DatasetFormat::json) return parse_dataset_json(read_file(path), path.string());
  return load_csv(path, csv);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format) {
  validate(dataset);
  if (format == DatasetFormat::json)
    write_file_atomic(path, dataset_to_json(dataset));
  else
    save_csv(dataset, path);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  const std::size_t n = dataset.scenes.size();
  if (n < 2) throw InsufficientData("split needs at least 2 scenes, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> second(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());

  auto take = [&](const std::vector<std::size_t>& idx) {
    Dataset part{dataset.name, dataset.units, {}};
    part.scenes.reserve(idx.size());
    for (auto i : idx) part.scenes.push_back(dataset.scenes[i]);
    return part;
  };
  return {take(first), take(second)};
}

}  // namespace growl
