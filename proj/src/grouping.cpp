#include "growl/grouping.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "growl/error.hpp"
#include "growl/graph.hpp"

namespace growl {

DisjointSet::DisjointSet(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSet::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSet::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  --components_;
  return true;
}

GroupSet GroupSet::canonical() const {
  GroupSet c = *this;
  for (auto& g : c.groups) std::sort(g.begin(), g.end());
  std::sort(c.groups.begin(), c.groups.end());
  std::sort(c.singletons.begin(), c.singletons.end());
  return c;
}

std::vector<std::string> GroupSet::universe() const {
  std::vector<std::string> ids = singletons;
  for (const auto& g : groups) ids.insert(ids.end(), g.begin(), g.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

void validate_partition(const GroupSet& gs, const std::vector<std::string>& universe) {
  std::set<std::string> seen;
  for (const auto& g : gs.groups) {
    if (g.size() < 2) throw ValidationError("group with fewer than 2 members");
    for (const auto& id : g)
      if (!seen.insert(id).second) throw ValidationError("id '" + id + "' appears more than once");
  }
  for (const auto& id : gs.singletons)
    if (!seen.insert(id).second) throw ValidationError("id '" + id + "' appears more than once");
  const std::set<std::string> expected(universe.begin(), universe.end());
  if (seen != expected) throw ValidationError("groups and singletons do not cover the id universe exactly");
}

GroupSet ground_truth_groups(const Scene& scene) {
  GroupSet gs;
  std::set<std::string_view> grouped;
  if (scene.groups) {
    gs.groups = *scene.groups;
    for (const auto& g : gs.groups) grouped.insert(g.begin(), g.end());
  }
  for (const auto& ind : scene.individuals)
    if (!grouped.contains(ind.id)) gs.singletons.push_back(ind.id);
  return gs;
}

namespace {

GroupSet components_to_groups(DisjointSet& ds, const std::vector<std::string>& node_ids) {
  const std::size_t n = node_ids.size();
  std::map<std::size_t, std::size_t> slot_of_root;
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = slot_of_root.try_emplace(ds.find(i), comps.size());
    if (fresh) comps.emplace_back();
    comps[it->second].push_back(i);
  }
  GroupSet gs;
  for (const auto& comp : comps) {
    if (comp.size() == 1) {
      gs.singletons.push_back(node_ids[comp.front()]);
      continue;
    }
    Group g;
    for (auto i : comp) g.push_back(node_ids[i]);
    gs.groups.push_back(std::move(g));
  }
  return gs;
}

}  // namespace

GroupSet extract_groups(const std::vector<LabeledEdge>& edges, const std::vector<std::string>& node_ids) {
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  DisjointSet ds(node_ids.size());
  for (const auto& e : edges) {
    auto a = index.find(e.a);
    auto b = index.find(e.b);
    if (a == index.end() || b == index.end())
      throw UnknownNodeInScores("edge (" + e.a + ", " + e.b + ") names a node outside the scene");
    if (e.label) ds.unite(a->second, b->second);
  }
  return components_to_groups(ds, node_ids);
}

GroupSet extract_groups(const std::vector<ScoredPair>& edges, const std::vector<std::string>& node_ids) {
  DisjointSet ds(node_ids.size());
  for (const auto& e : edges) {
    if (e.pair.a >= node_ids.size() || e.pair.b >= node_ids.size())
      throw UnknownNodeInScores("scored pair index outside the scene");
    if (e.label) ds.unite(e.pair.a, e.pair.b);
  }
  return components_to_groups(ds, node_ids);
}

GroupSet baseline_distance_clustering(const Scene& scene, double radius) {
  if (!(radius > 0.0)) throw ConfigError("baseline radius must be positive");
  const auto& people = scene.individuals;
  std::vector<std::string> ids;
  for (const auto& p : people) ids.push_back(p.id);
  DisjointSet ds(people.size());
  for (std::size_t i = 0; i < people.size(); ++i)
    for (std::size_t j = i + 1; j < people.size(); ++j)
      if (pair_distance(people[i], people[j]) <= radius) ds.unite(i, j);
  return components_to_groups(ds, ids);
}

using json = nlohmann::ordered_json;

std::string predictions_to_json(const std::vector<ScenePrediction>& predictions) {
  json doc = json::array();
  for (const auto& p : predictions) {
    json edges = json::array();
    for (const auto& e : p.edges)
      edges.push_back({{"a", e.a}, {"b", e.b}, {"p", e.probability}, {"label", e.label ? 1 : 0}});
    doc.push_back({{"frame_id", p.frame_id},
                   {"groups", p.groups.groups},
                   {"singletons", p.groups.singletons},
                   {"edges", std::move(edges)}});
  }
  return doc.dump(1) + "\n";
}

std::vector<ScenePrediction> predictions_from_json(std::string_view text, std::string_view source) {
  const std::string src(source);
  std::vector<ScenePrediction> out;
  try {
    const json doc = json::parse(text);
    if (!doc.is_array()) throw ParseError(src + ": predictions must be a JSON array");
    for (const auto& jp : doc) {
      ScenePrediction p;
      p.frame_id = jp.at("frame_id").get<std::string>();
      p.groups.groups = jp.at("groups").get<std::vector<Group>>();
      p.groups.singletons = jp.at("singletons").get<std::vector<std::string>>();
      if (auto e = jp.find("edges"); e != jp.end())
        for (const auto& je : *e)
          p.edges.push_back({je.at("a").get<std::string>(), je.at("b").get<std::string>(), je.at("p").get<double>(),
                             je.at("label").get<int>() != 0});
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ParseError(src + ": " + e.what());
  }
  return out;
}

}  // namespace growl
