#include "growl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "growl/config_json.hpp"
#include "growl/error.hpp"
#include "growl/io_util.hpp"
#include "growl/parallel.hpp"
#include "growl/pipeline.hpp"

namespace growl {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(positive_weight > 0.0)) throw ConfigError("positive_weight must be positive");
}

GradientBundle GradientBundle::zeros_like(const GrowlModel& m) {
  GradientBundle g;
  g.W1 = Eigen::MatrixXd::Zero(m.W1.rows(), m.W1.cols());
  g.W2 = Eigen::MatrixXd::Zero(m.W2.rows(), m.W2.cols());
  g.M1 = Eigen::MatrixXd::Zero(m.M1.rows(), m.M1.cols());
  g.b1 = Eigen::VectorXd::Zero(m.b1.size());
  g.M2 = Eigen::MatrixXd::Zero(m.M2.rows(), m.M2.cols());
  return g;
}

bool GradientBundle::all_finite() const {
  return W1.allFinite() && W2.allFinite() && M1.allFinite() && b1.allFinite() && M2.allFinite() && std::isfinite(b2);
}

namespace {

struct Sample {
  std::size_t a, b;
  double label;
};

std::vector<Sample> edge_samples(const SceneGraph& g, bool both_orders) {
  std::vector<Sample> out;
  for (const auto& [edges, y] : {std::pair{&g.positive_edges, 1.0}, std::pair{&g.negative_edges, 0.0}})
    for (const auto& e : *edges) {
      out.push_back({e.a, e.b, y});
      if (both_orders) out.push_back({e.b, e.a, y});
    }
  return out;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Backpropagates through activation (and optional row normalization) and the
// layer's linear map; accumulates the weight gradient and returns dL/dZ.
Eigen::MatrixXd layer_backward(const ModelConfig& c, const Eigen::MatrixXd& dh, const Eigen::MatrixXd& pre,
                               const Eigen::MatrixXd& act, const Eigen::MatrixXd& h, const Eigen::MatrixXd& z,
                               const Eigen::MatrixXd& weights, Eigen::MatrixXd& dweights) {
  Eigen::MatrixXd da = dh;
  if (c.l2_normalize_layers) {
    for (Eigen::Index i = 0; i < da.rows(); ++i) {
      const double norm = act.row(i).norm();
      if (norm > 1e-12) da.row(i) = (dh.row(i) - h.row(i) * h.row(i).dot(dh.row(i))) / norm;
    }
  }
  Eigen::MatrixXd dpre;
  if (c.activation == Activation::relu)
    dpre = da.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  else
    dpre = da.cwiseProduct(act.cwiseProduct((1.0 - act.array()).matrix()));
  dweights = dpre.transpose() * z;
  return dpre * weights;
}

Eigen::MatrixXd aggregate_backward(const ModelConfig& c, const Aggregation& agg, const Eigen::MatrixXd& dz) {
  if (c.aggregator == Aggregator::mean_with_self) return agg.with_self.transpose() * dz;
  const Eigen::Index k = dz.cols() / 2;
  return dz.leftCols(k) + agg.neighbors.transpose() * dz.rightCols(k);
}

LossAndGradients evaluate_loss(const SceneGraph& g, const GrowlModel& m, const TrainConfig& cfg,
                               bool want_gradients) {
  const auto& c = m.config;
  const auto samples = edge_samples(g, cfg.order_augmentation);
  if (samples.empty()) throw NoTrainingEdges("frame '" + g.frame_id + "' has no labeled edges");
  const EmbeddingTrace t = embed_nodes_traced(g, m, EdgeScope::train_graph);

  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto e = static_cast<Eigen::Index>(c.embed_dim);
  const auto ed = static_cast<Eigen::Index>(c.edge_feature_dim());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(c.mlp_in()));
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& smp = samples[static_cast<std::size_t>(s)];
    x.row(s).head(e) = t.h2.row(static_cast<Eigen::Index>(smp.a));
    x.row(s).segment(e, e) = t.h2.row(static_cast<Eigen::Index>(smp.b));
    if (ed > 0) x.row(s).tail(ed) = edge_feature_vector(c, g.edge(smp.a, smp.b)).transpose();
  }
  Eigen::MatrixXd pre = x * m.M1.transpose();
  if (c.mlp_bias) pre.rowwise() += m.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  Eigen::VectorXd logits = hidden * m.M2.transpose();
  if (c.mlp_bias) logits.array() += m.b2;

  LossAndGradients out;
  out.samples = samples.size();
  Eigen::VectorXd dlogit(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double y = samples[static_cast<std::size_t>(s)].label;
    const double w = y > 0.5 ? cfg.positive_weight : 1.0;
    const double z = logits(s);
    out.loss += w * (softplus(z) - y * z) * inv_n;
    dlogit(s) = w * (logistic(z) - y) * inv_n;
  }
  if (!want_gradients) return out;

  auto& gr = out.gradients;
  gr = GradientBundle::zeros_like(m);
  gr.M2 = dlogit.transpose() * hidden;
  const Eigen::MatrixXd dpre = (dlogit * m.M2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  gr.M1 = dpre.transpose() * x;
  if (c.mlp_bias) {
    gr.b2 = dlogit.sum();
    gr.b1 = dpre.colwise().sum().transpose();
  }
  const Eigen::MatrixXd dx = dpre * m.M1;
  Eigen::MatrixXd dh2 = Eigen::MatrixXd::Zero(t.h2.rows(), t.h2.cols());
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& smp = samples[static_cast<std::size_t>(s)];
    dh2.row(static_cast<Eigen::Index>(smp.a)) += dx.row(s).head(e);
    dh2.row(static_cast<Eigen::Index>(smp.b)) += dx.row(s).segment(e, e);
  }
  const Eigen::MatrixXd dz2 = layer_backward(c, dh2, t.pre2, t.act2, t.h2, t.z2, m.W2, gr.W2);
  const Eigen::MatrixXd dh1 = aggregate_backward(c, t.agg, dz2);
  layer_backward(c, dh1, t.pre1, t.act1, t.h1, t.z1, m.W1, gr.W1);
  return out;
}

}  // namespace

LossAndGradients loss_and_gradients(const SceneGraph& g, const GrowlModel& m, const TrainConfig& cfg) {
  return evaluate_loss(g, m, cfg, true);
}

double training_loss(const SceneGraph& g, const GrowlModel& m, const TrainConfig& cfg) {
  return evaluate_loss(g, m, cfg, false).loss;
}

GrowlModel initialize_model(const ModelConfig& config, std::uint64_t seed) {
  GrowlModel m = GrowlModel::zeros(config);
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::MatrixXd& w) {
    const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-a, a);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
  };
  fill(m.W1);
  fill(m.W2);
  fill(m.M1);
  fill(m.M2);
  return m;
}

AdamOptimizer::AdamOptimizer(const GrowlModel& m, const TrainConfig& cfg)
    : first_(GradientBundle::zeros_like(m)),
      second_(GradientBundle::zeros_like(m)),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_eps),
      lr_(cfg.learning_rate) {}

void AdamOptimizer::step(GrowlModel& m, const GradientBundle& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, auto& mom1, auto& mom2, const auto& grad) {
    mom1 = beta1_ * mom1 + (1.0 - beta1_) * grad;
    mom2 = (beta2_ * mom2.array() + (1.0 - beta2_) * grad.array().square()).matrix();
    param.array() -= lr_ * (mom1.array() / c1) / ((mom2.array() / c2).sqrt() + eps_);
  };
  update(m.W1, first_.W1, second_.W1, g.W1);
  update(m.W2, first_.W2, second_.W2, g.W2);
  update(m.M1, first_.M1, second_.M1, g.M1);
  update(m.b1, first_.b1, second_.b1, g.b1);
  update(m.M2, first_.M2, second_.M2, g.M2);
  first_.b2 = beta1_ * first_.b2 + (1.0 - beta1_) * g.b2;
  second_.b2 = beta2_ * second_.b2 + (1.0 - beta2_) * g.b2 * g.b2;
  m.b2 -= lr_ * (first_.b2 / c1) / (std::sqrt(second_.b2 / c2) + eps_);
}

TrainResult train(const std::vector<SceneGraph>& train_set, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  model_cfg.validate();
  if (train_set.empty()) throw NoTrainingEdges("training set is empty");

  std::vector<SceneGraph> stripped;
  const std::vector<SceneGraph>* graphs = &train_set;
  if (!cfg.negative_injection) {
    stripped = train_set;
    for (auto& g : stripped) g.negative_edges.clear();
    graphs = &stripped;
  }
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < graphs->size(); ++i) {
    const auto& g = (*graphs)[i];
    if (!g.positive_edges.empty() || !g.negative_edges.empty()) usable.push_back(i);
  }
  if (usable.empty()) throw NoTrainingEdges("no graph in the training set has labeled edges");

  TrainResult result{initialize_model(model_cfg, mix_seed(cfg.seed, 0)), {}};
  AdamOptimizer adam(result.model, cfg);
  std::mt19937_64 order_rng(mix_seed(cfg.seed, 1));
  std::vector<std::size_t> order = usable;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double total = 0.0;
    for (auto i : order) {
      const auto lg = loss_and_gradients((*graphs)[i], result.model, cfg);
      if (!std::isfinite(lg.loss) || !lg.gradients.all_finite())
        throw DivergenceDetected("non-finite loss in epoch " + std::to_string(epoch) + " on frame '" +
                                 (*graphs)[i].frame_id + "'");
      total += lg.loss;
      adam.step(result.model, lg.gradients);
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
    if (on_epoch) on_epoch(epoch, result.model);
  }
  return result;
}

std::vector<SceneGraph> build_training_graphs(const Dataset& dataset, FeatureMode mode, bool negative_injection) {
  std::vector<SceneGraph> graphs;
  graphs.reserve(dataset.scenes.size());
  const auto injection = negative_injection ? Injection::full_negative : Injection::positives_only;
  for (const auto& s : dataset.scenes) graphs.push_back(build_graph(s, mode, injection));
  return graphs;
}

std::string epoch_log_jsonl(const std::vector<double>& epoch_loss) {
  std::string out;
  for (std::size_t i = 0; i < epoch_loss.size(); ++i)
    out += json{{"epoch", i + 1}, {"mean_loss", epoch_loss[i]}}.dump() + "\n";
  return out;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (n < k) throw InsufficientData(std::to_string(k) + "-fold cross-validation needs at least " +
                                    std::to_string(k) + " scenes, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

std::vector<std::size_t> default_epoch_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t e = 10; e <= 50; e += 5) grid.push_back(e);
  for (std::size_t e = 100; e <= 250; e += 50) grid.push_back(e);
  return grid;
}

GridSearchResult grid_search(const Dataset& train_set, const GridSearchConfig& grid, const TrainConfig& train_cfg,
                             const ModelConfig& model_cfg) {
  if (grid.embed_sizes.empty() || grid.epoch_grid.empty()) throw ConfigError("grid search needs a nonempty grid");
  if (grid.repeats < 1) throw ConfigError("grid search needs at least one repeat");
  const std::size_t n = train_set.scenes.size();
  if (n < grid.folds)
    throw InsufficientData(std::to_string(grid.folds) + "-fold grid search needs at least " +
                           std::to_string(grid.folds) + " scenes, got " + std::to_string(n));

  std::vector<std::size_t> epochs = grid.epoch_grid;
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
  if (epochs.front() < 1) throw ConfigError("epoch grid entries must be >= 1");

  const auto graphs = build_training_graphs(train_set, model_cfg.feature_mode, train_cfg.negative_injection);
  std::vector<std::vector<std::vector<std::size_t>>> folds_per_repeat;
  for (std::size_t r = 0; r < grid.repeats; ++r)
    folds_per_repeat.push_back(make_folds(n, grid.folds, mix_seed(grid.seed, 1000 + r)));

  const std::size_t per_embed = grid.repeats * grid.folds;
  const std::size_t tasks = grid.embed_sizes.size() * per_embed;
  // scores[task][epoch index] = validation mean F1
  std::vector<std::vector<double>> scores(tasks, std::vector<double>(epochs.size(), 0.0));

  parallel_for(tasks, grid.threads, [&](std::size_t task) {
    const std::size_t ei = task / per_embed;
    const std::size_t r = (task % per_embed) / grid.folds;
    const std::size_t f = task % grid.folds;
    const auto& held_out = folds_per_repeat[r][f];
    std::vector<bool> in_val(n, false);
    for (auto i : held_out) in_val[i] = true;

    std::vector<SceneGraph> train_graphs;
    Dataset validation{train_set.name, train_set.units, {}};
    for (std::size_t i = 0; i < n; ++i) {
      if (in_val[i])
        validation.scenes.push_back(train_set.scenes[i]);
      else
        train_graphs.push_back(graphs[i]);
    }
    ModelConfig mc = model_cfg;
    mc.embed_dim = grid.embed_sizes[ei];
    TrainConfig tc = train_cfg;
    tc.epochs = epochs.back();
    tc.seed = mix_seed(grid.seed, r * grid.folds + f);
    train(train_graphs, tc, mc, [&](std::size_t epoch, const GrowlModel& model) {
      auto it = std::lower_bound(epochs.begin(), epochs.end(), epoch);
      if (it == epochs.end() || *it != epoch) return;
      scores[task][static_cast<std::size_t>(it - epochs.begin())] =
          evaluate_model(validation, model, grid.eval, grid.threshold).mean_f1;
    });
  });

  GridSearchResult result;
  bool have_best = false;
  for (std::size_t ei = 0; ei < grid.embed_sizes.size(); ++ei)
    for (std::size_t k = 0; k < epochs.size(); ++k) {
      CvResult row;
      row.embed_dim = grid.embed_sizes[ei];
      row.epochs = epochs[k];
      for (std::size_t j = 0; j < per_embed; ++j) row.fold_f1.push_back(scores[ei * per_embed + j][k]);
      row.mean_f1 = mean_of(row.fold_f1);
      row.std_f1 = population_std(row.fold_f1);
      const bool better = !have_best || row.mean_f1 > result.best.mean_f1 ||
                          (row.mean_f1 == result.best.mean_f1 &&
                           (row.embed_dim < result.best.embed_dim ||
                            (row.embed_dim == result.best.embed_dim && row.epochs < result.best.epochs)));
      if (better) {
        result.best = row;
        have_best = true;
      }
      result.table.push_back(std::move(row));
    }
  return result;
}

std::string grid_search_csv(const GridSearchResult& result) {
  std::string out = "embed_dim,epochs,mean_f1,std_f1,folds\n";
  for (const auto& r : result.table)
    out += std::to_string(r.embed_dim) + "," + std::to_string(r.epochs) + "," + format_double(r.mean_f1) + "," +
           format_double(r.std_f1) + "," + std::to_string(r.fold_f1.size()) + "\n";
  return out;
}

RepeatResult repeat_experiment(const Dataset& dataset, const RepeatConfig& cfg, const TrainConfig& train_cfg,
                               const ModelConfig& model_cfg) {
  if (cfg.n_runs < 1) throw ConfigError("n_runs must be >= 1");
  RepeatResult result;
  result.runs.resize(cfg.n_runs);
  parallel_for(cfg.n_runs, cfg.threads, [&](std::size_t run) {
    const std::uint64_t run_seed = mix_seed(cfg.seed, run);
    const auto [train_part, test_part] = split_dataset(dataset, cfg.train_fraction, run_seed);
    const auto graphs = build_training_graphs(train_part, model_cfg.feature_mode, train_cfg.negative_injection);
    TrainConfig tc = train_cfg;
    tc.seed = mix_seed(run_seed, 1);
    const auto trained = train(graphs, tc, model_cfg);
    const auto predictions = predict_dataset(test_part, trained.model, cfg.threshold);
    const auto report = evaluate(to_frame_predictions(predictions), test_part, cfg.eval);
    const auto stats = sample_stats(graphs);
    result.runs[run] = {run,         run_seed,        report.mean_f1,  report.std_f1, edge_positive_rate(predictions),
                        stats.positives, stats.negatives};
  });
  std::vector<double> f1s;
  for (const auto& r : result.runs) f1s.push_back(r.mean_f1);
  result.mean_f1 = mean_of(f1s);
  result.std_f1 = population_std(f1s);
  return result;
}

std::string repeat_csv(const RepeatResult& result) {
  std::string out = "run,seed,mean_f1,std_f1,edge_positive_rate,train_positives,train_negatives\n";
  for (const auto& r : result.runs)
    out += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + format_double(r.mean_f1) + "," +
           format_double(r.std_f1) + "," + format_double(r.edge_positive_rate) + "," +
           std::to_string(r.train_positives) + "," + std::to_string(r.train_negatives) + "\n";
  return out;
}

json to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"seed", c.seed},
              {"negative_injection", c.negative_injection},
              {"order_augmentation", c.order_augmentation},
              {"positive_weight", c.positive_weight}};
}

void update_from_json(TrainConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "adam_eps") c.adam_eps = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "negative_injection") c.negative_injection = value.get<bool>();
      else if (key == "order_augmentation") c.order_augmentation = value.get<bool>();
      else if (key == "positive_weight") c.positive_weight = value.get<double>();
      else throw ConfigError("unknown train config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
}

json to_json(const EvalConfig& c) {
  return json{{"tolerance", c.tolerance},
              {"rounding", c.rounding == Rounding::strict ? "strict" : "lenient"},
              {"matching", c.matching == Matching::greedy ? "greedy" : "optimal"},
              {"restrict_universe_to_detected", c.restrict_universe_to_detected}};
}

void update_from_json(EvalConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("eval config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "tolerance") {
        c.tolerance = value.get<double>();
      } else if (key == "rounding") {
        const auto v = value.get<std::string>();
        if (v != "strict" && v != "lenient") throw ConfigError("rounding must be 'strict' or 'lenient'");
        c.rounding = v == "strict" ? Rounding::strict : Rounding::lenient;
      } else if (key == "matching") {
        const auto v = value.get<std::string>();
        if (v != "greedy" && v != "optimal") throw ConfigError("matching must be 'greedy' or 'optimal'");
        c.matching = v == "greedy" ? Matching::greedy : Matching::optimal;
      } else if (key == "restrict_universe_to_detected") {
        c.restrict_universe_to_detected = value.get<bool>();
      } else {
        throw ConfigError("unknown eval config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("eval config: ") + e.what());
  }
  c.validate();
}

}  // namespace growl
