#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "growl/error.hpp"
#include "growl/graph.hpp"
#include "support/oracles.hpp"

using namespace growl;

namespace {

Scene five_node_scene() {
  Scene s;
  s.frame_id = "f";
  for (const char* id : {"A", "B", "C", "D", "E"})
    s.individuals.push_back(make_individual(id, static_cast<double>(s.individuals.size()), 0.0, 0.0));
  s.groups = std::vector<Group>{{"A", "B", "C"}, {"D", "E"}};
  return s;
}

Individual rotated(const Individual& p, double angle, double tx = 0.0, double ty = 0.0) {
  const double c = std::cos(angle), s = std::sin(angle);
  return make_individual(p.id, c * p.x - s * p.y + tx, s * p.x + c * p.y + ty, p.theta + angle);
}

}  // namespace

TEST(EffortAngle, Examples) {
  EXPECT_NEAR(effort_angle(make_individual("a", 0, 0, 0), make_individual("b", 1, 0, kPi)).radians, 0.0, 1e-12);
  EXPECT_NEAR(effort_angle(make_individual("a", 0, 0, kPi), make_individual("b", 1, 0, 0)).radians, 2 * kPi, 1e-12);
  EXPECT_NEAR(effort_angle(make_individual("a", 0, 0, 0), make_individual("b", 1, 0, 0)).radians, kPi, 1e-12);
}

TEST(EffortAngle, CoincidentPositionsAreFlagged) {
  const auto e = effort_angle(make_individual("a", 1, 1, 0.3), make_individual("b", 1, 1, -2));
  EXPECT_TRUE(e.coincident);
  EXPECT_EQ(e.radians, 0.0);
}

TEST(PairDistance, Examples) {
  EXPECT_DOUBLE_EQ(pair_distance(make_individual("a", 0, 0, 0), make_individual("b", 3, 4, 0)), 5.0);
  EXPECT_DOUBLE_EQ(pair_distance(make_individual("a", 2, 7, 0), make_individual("b", 2, 7, 1)), 0.0);
  EXPECT_DOUBLE_EQ(pair_distance(make_individual("a", 1, 1, 0), make_individual("b", 1, 2, 0)), 1.0);
}

TEST(EdgeFeatureProperties, SymmetricRangedAndRigidInvariant) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(-10, 10), ang(-kPi, kPi);
  for (int c = 0; c < 500; ++c) {
    const auto a = make_individual("a", pos(rng), pos(rng), ang(rng));
    const auto b = make_individual("b", pos(rng), pos(rng), ang(rng));
    const double e = effort_angle(a, b).radians;
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 2 * kPi);
    EXPECT_DOUBLE_EQ(e, effort_angle(b, a).radians);
    EXPECT_DOUBLE_EQ(pair_distance(a, b), pair_distance(b, a));

    const double r = ang(rng), tx = pos(rng), ty = pos(rng);
    EXPECT_NEAR(effort_angle(rotated(a, r), rotated(b, r)).radians, e, 1e-9);
    EXPECT_NEAR(effort_angle(rotated(a, r, tx, ty), rotated(b, r, tx, ty)).radians, e, 1e-9);
    EXPECT_NEAR(pair_distance(rotated(a, r, tx, ty), rotated(b, r, tx, ty)), pair_distance(a, b), 1e-9);
  }
}

TEST(NodeFeatures, Layouts) {
  const auto p = make_individual("a", 1.5, -2, kPi / 3);
  const auto f4 = node_features(p, FeatureMode::orientation);
  ASSERT_EQ(f4.size(), 4);
  EXPECT_DOUBLE_EQ(f4(0), 1.5);
  EXPECT_DOUBLE_EQ(f4(1), -2);
  EXPECT_NEAR(f4(2) * f4(2) + f4(3) * f4(3), 1.0, 1e-9);
  EXPECT_NEAR(f4(2), 0.5, 1e-12);
  EXPECT_EQ(node_features(p, FeatureMode::position_only).size(), 2);
  const auto f3 = node_features(p, FeatureMode::raw_angle);
  ASSERT_EQ(f3.size(), 3);
  EXPECT_DOUBLE_EQ(f3(2), p.theta);
}

TEST(BuildGraph, FiveNodeCounts) {
  const SceneGraph g = build_graph(five_node_scene(), FeatureMode::orientation, Injection::full_negative);
  EXPECT_EQ(g.positive_edges.size(), 4u);
  EXPECT_EQ(g.negative_edges.size(), 6u);
  EXPECT_EQ(g.edge_features.size(), 10u);
  EXPECT_EQ(g.features.rows(), 5);
  EXPECT_EQ(g.features.cols(), 4);

  const SceneGraph p = build_graph(five_node_scene(), FeatureMode::position_only, Injection::positives_only);
  EXPECT_EQ(p.positive_edges.size(), 4u);
  EXPECT_TRUE(p.negative_edges.empty());
  EXPECT_EQ(p.features.cols(), 2);
}

TEST(BuildGraph, EighteenNodesGive153Pairs) {
  std::mt19937_64 rng(4);
  Scene s = oracle::random_scene(rng, 18);
  const SceneGraph g = build_graph(s, FeatureMode::orientation, Injection::full_negative);
  EXPECT_EQ(g.positive_edges.size() + g.negative_edges.size(), 153u);
}

TEST(BuildGraph, MissingGroundTruth) {
  Scene s = five_node_scene();
  s.groups.reset();
  EXPECT_THROW(build_graph(s, FeatureMode::orientation, Injection::full_negative), MissingGroundTruth);
  const SceneGraph g = build_inference_graph(s, FeatureMode::orientation);
  EXPECT_TRUE(g.positive_edges.empty());
  EXPECT_TRUE(g.negative_edges.empty());
  EXPECT_EQ(g.edge_features.size(), 10u);
}

TEST(BuildGraph, EdgeSetInvariantsOnRandomScenes) {
  std::mt19937_64 rng(8);
  for (int c = 0; c < 300; ++c) {
    const Scene s = oracle::random_scene(rng, static_cast<std::size_t>(c % 15));
    const SceneGraph g = build_graph(s, FeatureMode::orientation, Injection::full_negative);
    const std::size_t n = s.individuals.size();
    std::set<std::pair<std::size_t, std::size_t>> pos, neg;
    for (auto e : g.positive_edges) pos.insert({e.a, e.b});
    for (auto e : g.negative_edges) neg.insert({e.a, e.b});
    // Expected positives: intra-group pairs, derived from the annotation directly.
    std::set<std::pair<std::size_t, std::size_t>> expected;
    auto index_of = [&](const std::string& id) {
      for (std::size_t i = 0; i < n; ++i)
        if (s.individuals[i].id == id) return i;
      return n;
    };
    for (const auto& grp : *s.groups)
      for (std::size_t i = 0; i < grp.size(); ++i)
        for (std::size_t j = i + 1; j < grp.size(); ++j) {
          auto a = index_of(grp[i]), b = index_of(grp[j]);
          expected.insert({std::min(a, b), std::max(a, b)});
        }
    EXPECT_EQ(pos, expected);
    for (const auto& p : pos) EXPECT_FALSE(neg.count(p));
    EXPECT_EQ(pos.size() + neg.size(), n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        EXPECT_TRUE(pos.count({i, j}) || neg.count({i, j}));
        const auto& ef = g.edge(i, j);
        EXPECT_DOUBLE_EQ(ef.distance, pair_distance(s.individuals[i], s.individuals[j]));
        EXPECT_DOUBLE_EQ(ef.effort_angle, effort_angle(s.individuals[i], s.individuals[j]).radians);
        EXPECT_EQ(&g.edge(i, j), &g.edge(j, i));
      }
  }
}

TEST(PairIndex, DenseUpperTriangle) {
  for (std::size_t n = 2; n < 12; ++n) {
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        EXPECT_EQ(pair_index(i, j, n), pair_index(j, i, n));
        seen.insert(pair_index(i, j, n));
      }
    EXPECT_EQ(seen.size(), pair_count(n));
    EXPECT_EQ(*seen.rbegin(), pair_count(n) - 1);
  }
}

TEST(SampleStats, Examples) {
  const SceneGraph g = build_graph(five_node_scene(), FeatureMode::orientation, Injection::full_negative);
  auto s = sample_stats({g});
  EXPECT_EQ(s.positives, 4u);
  EXPECT_EQ(s.negatives, 6u);
  EXPECT_DOUBLE_EQ(s.ratio, 0.4);
  s = sample_stats({g, g});
  EXPECT_EQ(s.positives, 8u);
  EXPECT_EQ(s.negatives, 12u);
  EXPECT_DOUBLE_EQ(s.ratio, 0.4);
  const SceneGraph p = build_graph(five_node_scene(), FeatureMode::orientation, Injection::positives_only);
  s = sample_stats({p});
  EXPECT_EQ(s.positives, 4u);
  EXPECT_EQ(s.negatives, 0u);
  EXPECT_TRUE(std::isinf(s.ratio));
  EXPECT_THROW(sample_stats({}), InsufficientData);
}

TEST(FeatureMode, ParseRoundTrip) {
  for (auto m : {FeatureMode::orientation, FeatureMode::position_only, FeatureMode::raw_angle})
    EXPECT_EQ(parse_feature_mode(to_string(m)), m);
  EXPECT_THROW(parse_feature_mode("polar"), ConfigError);
}
