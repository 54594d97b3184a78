#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "growl/model.hpp"
#include "growl/scene.hpp"

namespace growl {

// Union-find with path halving and union by size.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);  // true when two sets merged
  std::size_t components() const noexcept { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

struct GroupSet {
  std::vector<Group> groups;             // pairwise disjoint, each >= 2 members
  std::vector<std::string> singletons;   // ids left without a group

  // Sorted members, groups sorted lexicographically, sorted singletons.
  GroupSet canonical() const;
  std::vector<std::string> universe() const;  // sorted ids of groups and singletons
  friend bool operator==(const GroupSet&, const GroupSet&) = default;
};

// Throws ValidationError unless groups are disjoint, have >= 2 members, and
// groups plus singletons cover `universe` exactly once.
void validate_partition(const GroupSet& gs, const std::vector<std::string>& universe);

GroupSet ground_truth_groups(const Scene& scene);

struct LabeledEdge {
  std::string a;
  std::string b;
  double probability = 0.0;
  bool label = false;
};

// Keeps label-1 edges and returns the connected components; components of
// one node become singletons. Groups are ordered by their first node in
// `node_ids`, members in node order. Pairs missing from `edges` count as 0.
GroupSet extract_groups(const std::vector<LabeledEdge>& edges, const std::vector<std::string>& node_ids);
GroupSet extract_groups(const std::vector<ScoredPair>& edges, const std::vector<std::string>& node_ids);

// Links every pair within `radius` and returns the connected components.
GroupSet baseline_distance_clustering(const Scene& scene, double radius);

// Per-scene prediction record: {"frame_id", "groups", "singletons", "edges"}.
struct ScenePrediction {
  std::string frame_id;
  GroupSet groups;
  std::vector<LabeledEdge> edges;
};

std::string predictions_to_json(const std::vector<ScenePrediction>& predictions);
std::vector<ScenePrediction> predictions_from_json(std::string_view text, std::string_view source = "<memory>");

}  // namespace growl
