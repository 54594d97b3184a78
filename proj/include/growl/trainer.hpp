#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growl/evaluation.hpp"
#include "growl/graph.hpp"
#include "growl/model.hpp"
#include "growl/scene.hpp"

namespace growl {

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool negative_injection = true;
  // Train every edge in both concatenation orders.
  bool order_augmentation = true;
  // Loss weight of positive samples; 1 leaves the class imbalance untouched.
  double positive_weight = 1.0;

  void validate() const;  // throws ConfigError
};

// Gradients with the same shapes as the corresponding GrowlModel members.
struct GradientBundle {
  Eigen::MatrixXd W1, W2, M1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd M2;
  double b2 = 0.0;

  static GradientBundle zeros_like(const GrowlModel& m);
  bool all_finite() const;
};

struct LossAndGradients {
  double loss = 0.0;
  std::size_t samples = 0;
  GradientBundle gradients;
};

// Mean binary cross-entropy over the labeled edge samples of `g`, with the
// embedding computed on the training graph. Throws NoTrainingEdges.
LossAndGradients loss_and_gradients(const SceneGraph& g, const GrowlModel& m, const TrainConfig& cfg);
double training_loss(const SceneGraph& g, const GrowlModel& m, const TrainConfig& cfg);

// Xavier-uniform weights, zero biases.
GrowlModel initialize_model(const ModelConfig& config, std::uint64_t seed);

class AdamOptimizer {
 public:
  AdamOptimizer(const GrowlModel& m, const TrainConfig& cfg);
  void step(GrowlModel& m, const GradientBundle& g);

 private:
  GradientBundle first_, second_;
  double beta1_, beta2_, eps_, lr_;
  long t_ = 0;
};

struct TrainResult {
  GrowlModel model;
  std::vector<double> epoch_loss;  // mean per-graph loss of each epoch
};

// Called after each completed epoch (1-based) with the current weights.
using EpochCallback = std::function<void(std::size_t epoch, const GrowlModel& model)>;

// One Adam step per graph per epoch, graph order reshuffled every epoch.
// With negative_injection off, negative edges are stripped before training.
TrainResult train(const std::vector<SceneGraph>& train_set, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const EpochCallback& on_epoch = {});

std::vector<SceneGraph> build_training_graphs(const Dataset& dataset, FeatureMode mode, bool negative_injection);

std::string epoch_log_jsonl(const std::vector<double>& epoch_loss);

// Splits shuffled indices 0..n-1 into k folds whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

// {10, 15, ..., 50} followed by {100, 150, ..., 250}.
std::vector<std::size_t> default_epoch_grid();

struct GridSearchConfig {
  std::vector<std::size_t> embed_sizes{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::vector<std::size_t> epoch_grid = default_epoch_grid();
  std::size_t folds = 10;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double threshold = 0.5;
  EvalConfig eval;
};

struct CvResult {
  std::size_t embed_dim = 0;
  std::size_t epochs = 0;
  std::vector<double> fold_f1;  // repeats x folds validation mean F1s
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
};

struct GridSearchResult {
  CvResult best;
  std::vector<CvResult> table;  // embed size major, epochs minor
};

// Repeated k-fold cross-validation over the grid. Best = highest mean F1,
// ties to the smaller embedding and then fewer epochs.
GridSearchResult grid_search(const Dataset& train_set, const GridSearchConfig& grid, const TrainConfig& train_cfg,
                             const ModelConfig& model_cfg);

std::string grid_search_csv(const GridSearchResult& result);

struct RepeatConfig {
  std::size_t n_runs = 30;
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double threshold = 0.5;
  EvalConfig eval;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  double edge_positive_rate = 0.0;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;
};

struct RepeatResult {
  std::vector<RunResult> runs;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // across runs; 0 for a single run
};

// n_runs independent split/train/evaluate cycles with seeds derived from cfg.seed.
RepeatResult repeat_experiment(const Dataset& dataset, const RepeatConfig& cfg, const TrainConfig& train_cfg,
                               const ModelConfig& model_cfg);

std::string repeat_csv(const RepeatResult& result);

}  // namespace growl
