#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "growl/scene.hpp"

namespace growl {

// Integer pixel box, half-open on the far edges: [x0, x1) x [y0, y1).
struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct PixelPoint {
  double x = 0.0, y = 0.0;
};

struct TopDownPoint {
  double x = 0.0, y = 0.0;
};

// Row-major depth readings in millimeters; 0 marks an invalid reading.
class DepthImage {
 public:
  DepthImage(int width, int height, std::vector<std::uint16_t> values, int max_range_mm);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int max_range_mm() const noexcept { return max_range_mm_; }
  std::uint16_t at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<std::uint16_t>& values() const noexcept { return values_; }

 private:
  int width_;
  int height_;
  std::vector<std::uint16_t> values_;
  int max_range_mm_;
};

struct EgocentricDetection {
  std::string id;
  BoundingBox bbox;
  std::optional<double> theta;  // precomputed orientation, if an estimator supplied one
};

enum class ProjectionMode { normalized, pinhole };

struct ProjectionOptions {
  ProjectionMode mode = ProjectionMode::normalized;
  double hfov_rad = 1.0146;  // ~58 degrees, a typical RGB-D horizontal field of view
  int window = 5;            // odd; 1 reads the single centroid pixel
};

// Throws ValidationError unless the box has positive area inside width x height.
void validate(const BoundingBox& box, int width, int height);

PixelPoint centroid(const BoundingBox& box);

// Median of nonzero readings in the window x window patch centered on the
// rounded centroid (clipped to the image). Throws NoValidDepth.
double depth_at_centroid(const DepthImage& depth, PixelPoint c, int window);

TopDownPoint project_topdown(const EgocentricDetection& det, const DepthImage& depth, int img_width,
                             const ProjectionOptions& opts = {});

// Per-frame sidecar describing detections on one RGB frame.
struct DetectionFrame {
  std::string frame_id;
  int img_width = 0;
  int img_height = 0;
  int max_range_mm = 0;
  std::vector<EgocentricDetection> detections;
};

DetectionFrame parse_detection_frame(std::string_view text, std::string_view source = "<memory>");
std::string detection_frame_to_json(const DetectionFrame& frame);

// Binary 16-bit PGM (P5). maxval below 256 is read as one byte per sample.
DepthImage read_depth_pgm(const std::filesystem::path& path, int max_range_mm);
std::string encode_depth_pgm(const DepthImage& depth);

// Projects every detection of a frame into a top-down scene. Detections
// without an orientation get theta = 0. Propagates NoValidDepth.
Scene project_frame(const DetectionFrame& frame, const DepthImage& depth, const ProjectionOptions& opts = {});

}  // namespace growl
