#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growl/scene.hpp"

namespace growl {

// Node feature layouts:
//   orientation    [x, y, cos theta, sin theta]   d = 4
//   position_only  [x, y]                         d = 2  (GROWL-O)
//   raw_angle      [x, y, theta]                  d = 3
enum class FeatureMode { orientation, position_only, raw_angle };

std::size_t feature_dim(FeatureMode mode);
std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

enum class Injection { full_negative, positives_only };

struct EffortAngle {
  double radians = 0.0;     // in [0, 2 pi]
  bool coincident = false;  // positions coincide; bearing undefined, radians = 0
};

// Sum of the absolute turns each individual needs to face the other.
EffortAngle effort_angle(const Individual& a, const Individual& b);
double pair_distance(const Individual& a, const Individual& b);

struct EdgeFeatures {
  double effort_angle = 0.0;
  double distance = 0.0;
  bool coincident = false;
};

// Unordered node pair stored with a < b.
struct NodePair {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

inline std::size_t pair_count(std::size_t nodes) { return nodes < 2 ? 0 : nodes * (nodes - 1) / 2; }
// Index of pair (i, j), i != j, in the row-major upper triangle of a K-node graph.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t nodes);

struct SceneGraph {
  std::string frame_id;
  std::vector<std::string> node_ids;
  FeatureMode feature_mode = FeatureMode::orientation;
  Eigen::MatrixXd features;              // nodes x feature_dim
  std::vector<NodePair> positive_edges;  // sorted
  std::vector<NodePair> negative_edges;  // sorted
  std::vector<EdgeFeatures> edge_features;  // one per candidate pair, see pair_index

  std::size_t size() const noexcept { return node_ids.size(); }
  const EdgeFeatures& edge(std::size_t i, std::size_t j) const { return edge_features[pair_index(i, j, size())]; }
};

Eigen::VectorXd node_features(const Individual& ind, FeatureMode mode);

// Training graph: positives are the intra-group cliques of the ground truth;
// full_negative adds every remaining pair as a negative. Throws
// MissingGroundTruth when the scene has no annotation.
SceneGraph build_graph(const Scene& scene, FeatureMode mode, Injection injection);

// Unlabeled graph for inference; every pair is a candidate and no edges are stored.
SceneGraph build_inference_graph(const Scene& scene, FeatureMode mode);

struct SampleStats {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // positives / (positives + negatives); +infinity when no negatives exist.
  double ratio = 0.0;
};

SampleStats sample_stats(const std::vector<SceneGraph>& graphs);

}  // namespace growl
