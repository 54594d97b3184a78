#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "growl/error.hpp"
#include "growl/io_util.hpp"
#include "growl/model.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace growl;

namespace {

ModelConfig small_config(Aggregator agg, std::size_t embed, FeatureMode mode = FeatureMode::position_only) {
  ModelConfig c;
  c.feature_mode = mode;
  c.embed_dim = embed;
  c.mlp_hidden = 6;
  c.aggregator = agg;
  return c;
}

// Identity on the leading block of each weight matrix, zeros elsewhere.
GrowlModel identity_model(const ModelConfig& c) {
  GrowlModel m = GrowlModel::zeros(c);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(m.W1.rows(), static_cast<Eigen::Index>(c.feature_dim())); ++i)
    m.W1(i, i) = 1.0;
  for (Eigen::Index i = 0; i < m.W2.rows(); ++i) m.W2(i, i) = 1.0;
  return m;
}

SceneGraph graph_from_features(const Eigen::MatrixXd& f, const std::vector<NodePair>& edges) {
  SceneGraph g;
  g.frame_id = "g";
  g.feature_mode = f.cols() == 2 ? FeatureMode::position_only : FeatureMode::orientation;
  g.features = f;
  for (Eigen::Index i = 0; i < f.rows(); ++i) g.node_ids.push_back("n" + std::to_string(i));
  g.negative_edges = edges;
  g.edge_features.resize(pair_count(g.size()));
  return g;
}

}  // namespace

TEST(EmbedNodes, SingleNodeIsZeroPaddedFeatures) {
  for (auto agg : {Aggregator::mean_with_self, Aggregator::self_and_neighbor_mean}) {
    const ModelConfig c = small_config(agg, 5);
    Eigen::MatrixXd f(1, 2);
    f << 0.3, 1.7;
    const auto h = embed_nodes(graph_from_features(f, {}), identity_model(c), EdgeScope::fully_connected);
    ASSERT_EQ(h.cols(), 5);
    EXPECT_DOUBLE_EQ(h(0, 0), 0.3);
    EXPECT_DOUBLE_EQ(h(0, 1), 1.7);
    for (int k = 2; k < 5; ++k) EXPECT_EQ(h(0, k), 0.0);
  }
}

TEST(EmbedNodes, IdenticalFeaturesGiveIdenticalEmbeddings) {
  std::mt19937_64 rng(1);
  for (auto agg : {Aggregator::mean_with_self, Aggregator::self_and_neighbor_mean}) {
    const ModelConfig c = small_config(agg, 4, FeatureMode::orientation);
    Eigen::MatrixXd f(3, 4);
    for (int i = 0; i < 3; ++i) f.row(i) << 0.5, -1.0, 0.6, 0.8;
    const auto h = embed_nodes(graph_from_features(f, {}), oracle::random_model(c, rng), EdgeScope::fully_connected);
    EXPECT_TRUE(h.row(0).isApprox(h.row(1)));
    EXPECT_TRUE(h.row(0).isApprox(h.row(2)));
  }
}

TEST(EmbedNodes, HandMeanWithSelf) {
  Eigen::MatrixXd f(3, 2);
  f << 1, 0, 0, 1, 1, 1;
  const SceneGraph g = graph_from_features(f, {{0, 1}, {0, 2}});
  const ModelConfig c = small_config(Aggregator::mean_with_self, 2);
  const auto t = embed_nodes_traced(g, identity_model(c), EdgeScope::train_graph);
  EXPECT_NEAR(t.h1(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.h1(0, 1), 2.0 / 3.0, 1e-15);
}

TEST(EmbedNodes, DimensionMismatch) {
  Eigen::MatrixXd f(2, 4);
  f.setZero();
  const ModelConfig c = small_config(Aggregator::mean_with_self, 2, FeatureMode::position_only);
  EXPECT_THROW(embed_nodes(graph_from_features(f, {}), GrowlModel::zeros(c), EdgeScope::fully_connected),
               DimensionMismatch);
}

TEST(EmbedNodes, IdentityWeightsAreIteratedMeans) {
  // Closed form on 3-node graphs: with relu, identity weights and
  // nonnegative features, each layer is one application of (I + A)/(1 + deg).
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int c = 0; c < 300; ++c) {
    Eigen::MatrixXd f(3, 2);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
    std::vector<NodePair> edges;
    for (auto e : {NodePair{0, 1}, NodePair{0, 2}, NodePair{1, 2}})
      if (rng() % 2) edges.push_back(e);
    const SceneGraph g = graph_from_features(f, edges);
    Eigen::Matrix3d adj = Eigen::Matrix3d::Zero();
    for (auto e : edges) adj(e.a, e.b) = adj(e.b, e.a) = 1;
    Eigen::Matrix3d p;
    for (int i = 0; i < 3; ++i) {
      double deg = adj.row(i).sum();
      for (int j = 0; j < 3; ++j) p(i, j) = ((i == j) + adj(i, j)) / (1.0 + deg);
    }
    const ModelConfig cfg = small_config(Aggregator::mean_with_self, 2);
    const auto h = embed_nodes(g, identity_model(cfg), EdgeScope::train_graph);
    EXPECT_TRUE(h.isApprox(p * p * f, 1e-12)) << h << "\n" << p * p * f;
  }
}

TEST(EmbedNodes, PermutationEquivariance) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 250; ++c) {
    const auto agg = c % 2 ? Aggregator::mean_with_self : Aggregator::self_and_neighbor_mean;
    ModelConfig cfg = small_config(agg, 3 + c % 4, FeatureMode::orientation);
    cfg.use_edge_features = c % 3 == 0;
    const GrowlModel m = oracle::random_model(cfg, rng);
    const std::size_t n = 2 + static_cast<std::size_t>(c % 8);
    Scene s = oracle::random_scene(rng, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Scene t = s;
    for (std::size_t i = 0; i < n; ++i) t.individuals[i] = s.individuals[perm[i]];

    const auto gs = build_graph(s, FeatureMode::orientation, c % 4 == 0 ? Injection::positives_only : Injection::full_negative);
    const auto gt = build_graph(t, FeatureMode::orientation, c % 4 == 0 ? Injection::positives_only : Injection::full_negative);
    for (auto scope : {EdgeScope::train_graph, EdgeScope::fully_connected}) {
      const auto hs = embed_nodes(gs, m, scope);
      const auto ht = embed_nodes(gt, m, scope);
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = ht.row(static_cast<Eigen::Index>(i)) - hs.row(static_cast<Eigen::Index>(perm[i]));
        EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-12);
      }
    }
    const auto ps = predict_scene(gs, m);
    const auto pt = predict_scene(gt, m);
    ASSERT_EQ(ps.size(), pt.size());
    for (const auto& sp : pt) {
      std::size_t a = perm[sp.pair.a], b = perm[sp.pair.b];
      const auto& orig = ps[pair_index(a, b, n)];
      EXPECT_NEAR(sp.probability, orig.probability, 1e-12);
      EXPECT_EQ(sp.label, orig.label);
    }
  }
}

TEST(EmbedNodes, DependsOnlyOnTwoHopNeighborhood) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int c = 0; c < 250; ++c) {
    const auto agg = c % 2 ? Aggregator::mean_with_self : Aggregator::self_and_neighbor_mean;
    const ModelConfig cfg = small_config(agg, 4);
    const GrowlModel m = oracle::random_model(cfg, rng);
    // Path 0-1-2-3 plus isolated 4: node 0 sees 1 and 2 within two hops, not 3 or 4.
    Eigen::MatrixXd f(5, 2);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = nd(rng);
    const SceneGraph g = graph_from_features(f, {{0, 1}, {1, 2}, {2, 3}});
    const auto h = embed_nodes(g, m, EdgeScope::train_graph);
    SceneGraph isolated = g;
    isolated.features.row(4) << nd(rng) * 5, nd(rng) * 5;
    const auto hi = embed_nodes(isolated, m, EdgeScope::train_graph);
    EXPECT_TRUE(h.topRows(4) == hi.topRows(4));
    SceneGraph far = g;
    far.features.row(3) << nd(rng) * 5, nd(rng) * 5;
    EXPECT_TRUE(h.row(0) == embed_nodes(far, m, EdgeScope::train_graph).row(0));
  }
}

TEST(ScoreEdge, ZeroNetworkIsOneHalf) {
  const ModelConfig c = small_config(Aggregator::self_and_neighbor_mean, 3);
  const GrowlModel m = GrowlModel::zeros(c);
  Eigen::VectorXd a = Eigen::VectorXd::Random(3), b = Eigen::VectorXd::Random(3);
  EXPECT_EQ(score_edge(a, b, std::nullopt, m), 0.5);
}

TEST(ScoreEdge, HandSetMlp) {
  ModelConfig c = small_config(Aggregator::mean_with_self, 1);
  c.mlp_hidden = 2;
  GrowlModel m = GrowlModel::zeros(c);
  m.M1 << 1, 0, 0, 1;
  m.M2 << 1, 1;
  Eigen::VectorXd hu(1), hv(1);
  hu << 1;
  hv << 2;
  EXPECT_DOUBLE_EQ(mlp_logit(m, pair_input(c, hu, hv, nullptr)), 3.0);
  EXPECT_DOUBLE_EQ(mlp_logit(m, pair_input(c, hv, hu, nullptr)), 3.0);
  EXPECT_NEAR(score_edge(hu, hv, std::nullopt, m), 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(score_edge(hu, hv, std::nullopt, m), 0.9526, 5e-5);
}

TEST(ScoreEdge, SymmetricAndInsideUnitInterval) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0, 2);
  for (int c = 0; c < 300; ++c) {
    ModelConfig cfg = small_config(Aggregator::self_and_neighbor_mean, 1 + c % 6, FeatureMode::orientation);
    cfg.use_edge_features = c % 2;
    const GrowlModel m = oracle::random_model(cfg, rng, 0.3);
    Eigen::VectorXd a(cfg.embed_dim), b(cfg.embed_dim);
    for (auto& v : a) v = nd(rng);
    for (auto& v : b) v = nd(rng);
    std::optional<EdgeFeatures> ef;
    if (cfg.use_edge_features) ef = EdgeFeatures{std::abs(nd(rng)), std::abs(nd(rng)), false};
    const double p = score_edge(a, b, ef, m);
    EXPECT_EQ(p, score_edge(b, a, ef, m));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(ScoreEdge, DimensionMismatch) {
  const ModelConfig c = small_config(Aggregator::mean_with_self, 3);
  const GrowlModel m = GrowlModel::zeros(c);
  EXPECT_THROW(score_edge(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), std::nullopt, m), DimensionMismatch);
  ModelConfig ce = c;
  ce.use_edge_features = true;
  EXPECT_THROW(score_edge(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), std::nullopt, GrowlModel::zeros(ce)),
               DimensionMismatch);
}

TEST(PredictScene, PairCounts) {
  std::mt19937_64 rng(6);
  const ModelConfig c = small_config(Aggregator::self_and_neighbor_mean, 4, FeatureMode::orientation);
  const GrowlModel m = oracle::random_model(c, rng);
  EXPECT_TRUE(predict_scene(build_inference_graph(oracle::random_scene(rng, 1), FeatureMode::orientation), m).empty());
  for (std::size_t k = 2; k < 20; ++k) {
    const auto scored = predict_scene(build_inference_graph(oracle::random_scene(rng, k), FeatureMode::orientation), m);
    EXPECT_EQ(scored.size(), k * (k - 1) / 2);
    for (const auto& s : scored) EXPECT_EQ(s.label, s.probability >= 0.5);
  }
}

TEST(PredictScene, IgnoresStoredEdges) {
  std::mt19937_64 rng(7);
  const ModelConfig c = small_config(Aggregator::self_and_neighbor_mean, 4, FeatureMode::orientation);
  const GrowlModel m = oracle::random_model(c, rng);
  const Scene s = oracle::random_scene(rng, 7);
  const auto a = predict_scene(build_graph(s, FeatureMode::orientation, Injection::positives_only), m);
  const auto b = predict_scene(build_inference_graph(s, FeatureMode::orientation), m);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].probability, b[i].probability);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(8);
  testing_support::TempDir dir;
  for (int c = 0; c < 20; ++c) {
    ModelConfig cfg = small_config(c % 2 ? Aggregator::mean_with_self : Aggregator::self_and_neighbor_mean, 2 + c,
                                   c % 3 ? FeatureMode::orientation : FeatureMode::position_only);
    cfg.use_edge_features = c % 4 == 1;
    cfg.activation = c % 5 == 2 ? Activation::logistic : Activation::relu;
    const GrowlModel m = oracle::random_model(cfg, rng, 1.0 / 3.0);
    save_model(m, dir.path() / "m.json");
    EXPECT_EQ(load_model(dir.path() / "m.json"), m);
  }
}

TEST(Checkpoint, Errors) {
  std::mt19937_64 rng(9);
  const GrowlModel m = oracle::random_model(small_config(Aggregator::mean_with_self, 3), rng);
  auto doc = nlohmann::ordered_json::parse(model_to_json(m));
  auto wrong_version = doc;
  wrong_version["version"] = 2;
  EXPECT_THROW(model_from_json(wrong_version.dump()), VersionMismatch);
  auto truncated = doc;
  truncated["W2"].erase(truncated["W2"].size() - 1);
  EXPECT_THROW(model_from_json(truncated.dump()), ShapeMismatch);
  auto short_row = doc;
  short_row["M1"][0].erase(0);
  EXPECT_THROW(model_from_json(short_row.dump()), ShapeMismatch);
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}

TEST(ModelConfig, Dimensions) {
  ModelConfig c;
  EXPECT_EQ(c.embed_dim, 20u);
  EXPECT_EQ(c.mlp_hidden, 32u);
  EXPECT_EQ(c.mlp_in(), 40u);
  c.use_edge_features = true;
  EXPECT_EQ(c.mlp_in(), 42u);
  c.feature_mode = FeatureMode::position_only;
  EXPECT_EQ(c.mlp_in(), 41u);
  c.embed_dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_aggregator("max"), ConfigError);
  EXPECT_EQ(parse_activation(to_string(Activation::logistic)), Activation::logistic);
}
