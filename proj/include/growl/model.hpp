#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "growl/graph.hpp"

namespace growl {

enum class Activation { relu, logistic };

// How a layer combines a node with its neighbourhood.
//   self_and_neighbor_mean  h' = act(W [h_v ; mean_{u in N(v)} h_u])   (GraphSAGE concat form)
//   mean_with_self          h' = act(W mean({h_v} u {h_u : u in N(v)}))
// On a fully connected graph mean_with_self gives every node the same
// embedding, so the concat form is the default.
enum class Aggregator { self_and_neighbor_mean, mean_with_self };

// Which neighbourhood the embedding traverses.
enum class EdgeScope { train_graph, fully_connected };

std::string_view to_string(Activation a);
std::string_view to_string(Aggregator a);
Activation parse_activation(std::string_view text);
Aggregator parse_aggregator(std::string_view text);

struct ModelConfig {
  FeatureMode feature_mode = FeatureMode::orientation;
  std::size_t embed_dim = 20;
  std::size_t mlp_hidden = 32;
  bool use_edge_features = false;
  Activation activation = Activation::relu;
  bool l2_normalize_layers = false;
  Aggregator aggregator = Aggregator::self_and_neighbor_mean;
  bool mlp_bias = true;

  std::size_t feature_dim() const { return growl::feature_dim(feature_mode); }
  std::size_t layer1_in() const;
  std::size_t layer2_in() const;
  // Effort angle and distance, or distance alone when orientation is absent.
  std::size_t edge_feature_dim() const;
  std::size_t mlp_in() const { return 2 * embed_dim + edge_feature_dim(); }

  void validate() const;  // throws ConfigError
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct GrowlModel {
  ModelConfig config;
  Eigen::MatrixXd W1;  // embed_dim x layer1_in
  Eigen::MatrixXd W2;  // embed_dim x layer2_in
  Eigen::MatrixXd M1;  // mlp_hidden x mlp_in
  Eigen::VectorXd b1;  // mlp_hidden
  Eigen::MatrixXd M2;  // 1 x mlp_hidden
  double b2 = 0.0;

  static GrowlModel zeros(const ModelConfig& config);
  void check_shapes() const;  // throws ShapeMismatch

  friend bool operator==(const GrowlModel& a, const GrowlModel& b) {
    return a.config == b.config && a.W1 == b.W1 && a.W2 == b.W2 && a.M1 == b.M1 && a.b1 == b.b1 &&
           a.M2 == b.M2 && a.b2 == b.b2;
  }
};

// Row-normalized aggregation operators for one graph and scope.
struct Aggregation {
  Eigen::MatrixXd with_self;  // (I + A) / (1 + deg)
  Eigen::MatrixXd neighbors;  // A / deg, zero rows for isolated nodes
};

Aggregation make_aggregation(const SceneGraph& g, EdgeScope scope);

// Intermediate values of the two embedding layers, kept for backpropagation.
struct EmbeddingTrace {
  Aggregation agg;
  Eigen::MatrixXd z1, pre1, act1, h1;
  Eigen::MatrixXd z2, pre2, act2, h2;
};

EmbeddingTrace embed_nodes_traced(const SceneGraph& g, const GrowlModel& m, EdgeScope scope);

// nodes x embed_dim, rows in g.node_ids order.
Eigen::MatrixXd embed_nodes(const SceneGraph& g, const GrowlModel& m, EdgeScope scope);

// Raw MLP output for the ordered concatenation [h_u ; h_v ; edge features].
double mlp_logit(const GrowlModel& m, const Eigen::VectorXd& input);
Eigen::VectorXd edge_feature_vector(const ModelConfig& config, const EdgeFeatures& ef);
Eigen::VectorXd pair_input(const ModelConfig& config, const Eigen::Ref<const Eigen::VectorXd>& h_u,
                           const Eigen::Ref<const Eigen::VectorXd>& h_v, const EdgeFeatures* ef);

double logistic(double x);

// Mean of the logistic outputs over both concatenation orders.
double score_edge(const Eigen::VectorXd& h_u, const Eigen::VectorXd& h_v, const std::optional<EdgeFeatures>& ef,
                  const GrowlModel& m);

struct ScoredPair {
  NodePair pair;
  double probability = 0.0;
  bool label = false;
};

// Scores every unordered pair under the fully connected scope.
std::vector<ScoredPair> predict_scene(const SceneGraph& g, const GrowlModel& m, double threshold = 0.5);

std::string model_to_json(const GrowlModel& m);
GrowlModel model_from_json(std::string_view text, std::string_view source = "<memory>");
void save_model(const GrowlModel& m, const std::filesystem::path& path);
GrowlModel load_model(const std::filesystem::path& path);

}  // namespace growl
