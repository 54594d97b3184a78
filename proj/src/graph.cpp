#include "growl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "growl/error.hpp"

namespace growl {

std::size_t feature_dim(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::orientation: return 4;
    case FeatureMode::position_only: return 2;
    case FeatureMode::raw_angle: return 3;
  }
  return 0;
}

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::orientation: return "orientation";
    case FeatureMode::position_only: return "position_only";
    case FeatureMode::raw_angle: return "raw_angle";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "orientation") return FeatureMode::orientation;
  if (text == "position_only") return FeatureMode::position_only;
  if (text == "raw_angle") return FeatureMode::raw_angle;
  throw ConfigError("unknown feature mode '" + std::string(text) + "'");
}

EffortAngle effort_angle(const Individual& a, const Individual& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  if (dx == 0.0 && dy == 0.0) return {0.0, true};
  const double bearing_ab = std::atan2(dy, dx);
  const double bearing_ba = std::atan2(-dy, -dx);
  return {std::abs(wrap_angle(bearing_ab - a.theta)) + std::abs(wrap_angle(bearing_ba - b.theta)), false};
}

double pair_distance(const Individual& a, const Individual& b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  // pairs before row i: sum_{r<i} (n - 1 - r)
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

Eigen::VectorXd node_features(const Individual& ind, FeatureMode mode) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(feature_dim(mode)));
  f(0) = ind.x;
  f(1) = ind.y;
  if (mode == FeatureMode::orientation) {
    f(2) = std::cos(ind.theta);
    f(3) = std::sin(ind.theta);
  } else if (mode == FeatureMode::raw_angle) {
    f(2) = ind.theta;
  }
  return f;
}

namespace {

SceneGraph base_graph(const Scene& scene, FeatureMode mode) {
  SceneGraph g;
  g.frame_id = scene.frame_id;
  g.feature_mode = mode;
  const std::size_t n = scene.individuals.size();
  g.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim(mode)));
  for (std::size_t i = 0; i < n; ++i) {
    g.node_ids.push_back(scene.individuals[i].id);
    g.features.row(static_cast<Eigen::Index>(i)) = node_features(scene.individuals[i], mode).transpose();
  }
  g.edge_features.reserve(pair_count(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = scene.individuals[i];
      const auto& b = scene.individuals[j];
      const auto ea = effort_angle(a, b);
      g.edge_features.push_back({ea.radians, pair_distance(a, b), ea.coincident});
    }
  return g;
}

}  // namespace

SceneGraph build_graph(const Scene& scene, FeatureMode mode, Injection injection) {
  if (!scene.groups) throw MissingGroundTruth("frame '" + scene.frame_id + "' has no ground-truth groups");
  SceneGraph g = base_graph(scene, mode);
  const std::size_t n = g.size();

  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(g.node_ids[i], i);
  std::vector<long> group_of(n, -1);
  for (std::size_t gi = 0; gi < scene.groups->size(); ++gi)
    for (const auto& member : (*scene.groups)[gi]) group_of[index.at(member)] = static_cast<long>(gi);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (group_of[i] >= 0 && group_of[i] == group_of[j])
        g.positive_edges.push_back({i, j});
      else if (injection == Injection::full_negative)
        g.negative_edges.push_back({i, j});
    }
  return g;
}

SceneGraph build_inference_graph(const Scene& scene, FeatureMode mode) { return base_graph(scene, mode); }

SampleStats sample_stats(const std::vector<SceneGraph>& graphs) {
  if (graphs.empty()) throw InsufficientData("sample_stats needs at least one graph");
  SampleStats s;
  for (const auto& g : graphs) {
    s.positives += g.positive_edges.size();
    s.negatives += g.negative_edges.size();
  }
  s.ratio = s.negatives == 0 ? std::numeric_limits<double>::infinity()
                             : static_cast<double>(s.positives) / static_cast<double>(s.positives + s.negatives);
  return s;
}

}  // namespace growl
