#include "growl/model.hpp"

#include <cmath>

#include "growl/config_json.hpp"
#include "growl/error.hpp"
#include "growl/io_util.hpp"

namespace growl {

using json = nlohmann::ordered_json;

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "logistic"; }

std::string_view to_string(Aggregator a) {
  return a == Aggregator::self_and_neighbor_mean ? "self_and_neighbor_mean" : "mean_with_self";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::relu;
  if (text == "logistic" || text == "sigmoid") return Activation::logistic;
  throw ConfigError("unknown activation '" + std::string(text) + "'");
}

Aggregator parse_aggregator(std::string_view text) {
  if (text == "self_and_neighbor_mean") return Aggregator::self_and_neighbor_mean;
  if (text == "mean_with_self") return Aggregator::mean_with_self;
  throw ConfigError("unknown aggregator '" + std::string(text) + "'");
}

std::size_t ModelConfig::layer1_in() const {
  return aggregator == Aggregator::self_and_neighbor_mean ? 2 * feature_dim() : feature_dim();
}

std::size_t ModelConfig::layer2_in() const {
  return aggregator == Aggregator::self_and_neighbor_mean ? 2 * embed_dim : embed_dim;
}

std::size_t ModelConfig::edge_feature_dim() const {
  if (!use_edge_features) return 0;
  return feature_mode == FeatureMode::position_only ? 1 : 2;
}

void ModelConfig::validate() const {
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
}

GrowlModel GrowlModel::zeros(const ModelConfig& c) {
  c.validate();
  GrowlModel m;
  m.config = c;
  const auto e = static_cast<Eigen::Index>(c.embed_dim);
  const auto h = static_cast<Eigen::Index>(c.mlp_hidden);
  m.W1 = Eigen::MatrixXd::Zero(e, static_cast<Eigen::Index>(c.layer1_in()));
  m.W2 = Eigen::MatrixXd::Zero(e, static_cast<Eigen::Index>(c.layer2_in()));
  m.M1 = Eigen::MatrixXd::Zero(h, static_cast<Eigen::Index>(c.mlp_in()));
  m.b1 = Eigen::VectorXd::Zero(h);
  m.M2 = Eigen::MatrixXd::Zero(1, h);
  return m;
}

void GrowlModel::check_shapes() const {
  auto expect = [](const char* name, const Eigen::MatrixXd& mat, std::size_t rows, std::size_t cols) {
    if (static_cast<std::size_t>(mat.rows()) != rows || static_cast<std::size_t>(mat.cols()) != cols)
      throw ShapeMismatch(std::string(name) + " is " + std::to_string(mat.rows()) + "x" +
                          std::to_string(mat.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  };
  expect("W1", W1, config.embed_dim, config.layer1_in());
  expect("W2", W2, config.embed_dim, config.layer2_in());
  expect("M1", M1, config.mlp_hidden, config.mlp_in());
  expect("b1", b1, config.mlp_hidden, 1);
  expect("M2", M2, 1, config.mlp_hidden);
}

Aggregation make_aggregation(const SceneGraph& g, EdgeScope scope) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  if (scope == EdgeScope::fully_connected) {
    adj.setOnes();
    adj.diagonal().setZero();
  } else {
    for (const auto* edges : {&g.positive_edges, &g.negative_edges})
      for (const auto& e : *edges) {
        adj(static_cast<Eigen::Index>(e.a), static_cast<Eigen::Index>(e.b)) = 1.0;
        adj(static_cast<Eigen::Index>(e.b), static_cast<Eigen::Index>(e.a)) = 1.0;
      }
  }
  Aggregation agg;
  agg.with_self = adj + Eigen::MatrixXd::Identity(n, n);
  agg.neighbors = adj;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = adj.row(i).sum();
    agg.with_self.row(i) /= deg + 1.0;
    if (deg > 0.0) agg.neighbors.row(i) /= deg;
  }
  return agg;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

Eigen::MatrixXd aggregate(const ModelConfig& c, const Aggregation& agg, const Eigen::MatrixXd& h) {
  if (c.aggregator == Aggregator::mean_with_self) return agg.with_self * h;
  Eigen::MatrixXd z(h.rows(), 2 * h.cols());
  z << h, agg.neighbors * h;
  return z;
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre) {
  if (a == Activation::relu) return pre.cwiseMax(0.0);
  return pre.unaryExpr([](double v) { return logistic(v); });
}

Eigen::MatrixXd maybe_normalize(bool enabled, const Eigen::MatrixXd& act) {
  if (!enabled) return act;
  Eigen::MatrixXd out = act;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 1e-12) out.row(i) /= norm;
  }
  return out;
}

}  // namespace

EmbeddingTrace embed_nodes_traced(const SceneGraph& g, const GrowlModel& m, EdgeScope scope) {
  const auto& c = m.config;
  if (static_cast<std::size_t>(g.features.cols()) != c.feature_dim())
    throw DimensionMismatch("graph features have dimension " + std::to_string(g.features.cols()) +
                            ", model expects " + std::to_string(c.feature_dim()));
  EmbeddingTrace t;
  t.agg = make_aggregation(g, scope);
  t.z1 = aggregate(c, t.agg, g.features);
  t.pre1 = t.z1 * m.W1.transpose();
  t.act1 = activate(c.activation, t.pre1);
  t.h1 = maybe_normalize(c.l2_normalize_layers, t.act1);
  t.z2 = aggregate(c, t.agg, t.h1);
  t.pre2 = t.z2 * m.W2.transpose();
  t.act2 = activate(c.activation, t.pre2);
  t.h2 = maybe_normalize(c.l2_normalize_layers, t.act2);
  return t;
}

Eigen::MatrixXd embed_nodes(const SceneGraph& g, const GrowlModel& m, EdgeScope scope) {
  return embed_nodes_traced(g, m, scope).h2;
}

Eigen::VectorXd edge_feature_vector(const ModelConfig& c, const EdgeFeatures& ef) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c.edge_feature_dim()));
  if (c.edge_feature_dim() == 2) {
    v(0) = ef.effort_angle;
    v(1) = ef.distance;
  } else if (c.edge_feature_dim() == 1) {
    v(0) = ef.distance;
  }
  return v;
}

Eigen::VectorXd pair_input(const ModelConfig& c, const Eigen::Ref<const Eigen::VectorXd>& h_u,
                           const Eigen::Ref<const Eigen::VectorXd>& h_v, const EdgeFeatures* ef) {
  const auto e = static_cast<Eigen::Index>(c.embed_dim);
  if (h_u.size() != e || h_v.size() != e)
    throw DimensionMismatch("node embeddings must have dimension " + std::to_string(e));
  if (c.use_edge_features && ef == nullptr) throw DimensionMismatch("model expects edge features");
  Eigen::VectorXd x(static_cast<Eigen::Index>(c.mlp_in()));
  x.head(e) = h_u;
  x.segment(e, e) = h_v;
  if (c.use_edge_features) x.tail(static_cast<Eigen::Index>(c.edge_feature_dim())) = edge_feature_vector(c, *ef);
  return x;
}

double mlp_logit(const GrowlModel& m, const Eigen::VectorXd& input) {
  if (input.size() != m.M1.cols()) throw DimensionMismatch("MLP input has the wrong dimension");
  if (!m.config.mlp_bias) return (m.M2 * (m.M1 * input).cwiseMax(0.0))(0);
  const Eigen::VectorXd hidden = (m.M1 * input + m.b1).cwiseMax(0.0);
  return (m.M2 * hidden)(0) + m.b2;
}

double score_edge(const Eigen::VectorXd& h_u, const Eigen::VectorXd& h_v, const std::optional<EdgeFeatures>& ef,
                  const GrowlModel& m) {
  const EdgeFeatures* efp = ef ? &*ef : nullptr;
  const double forward = logistic(mlp_logit(m, pair_input(m.config, h_u, h_v, efp)));
  const double backward = logistic(mlp_logit(m, pair_input(m.config, h_v, h_u, efp)));
  return 0.5 * (forward + backward);
}

std::vector<ScoredPair> predict_scene(const SceneGraph& g, const GrowlModel& m, double threshold) {
  std::vector<ScoredPair> out;
  const std::size_t n = g.size();
  if (n < 2) return out;
  const Eigen::MatrixXd h = embed_nodes(g, m, EdgeScope::fully_connected);
  out.reserve(pair_count(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::optional<EdgeFeatures> ef;
      if (m.config.use_edge_features) ef = g.edge(i, j);
      const double p = score_edge(h.row(static_cast<Eigen::Index>(i)).transpose(),
                                  h.row(static_cast<Eigen::Index>(j)).transpose(), ef, m);
      out.push_back({{i, j}, p, p >= threshold});
    }
  return out;
}

json to_json(const ModelConfig& c) {
  return json{{"feature_mode", std::string(to_string(c.feature_mode))},
              {"feature_dim", c.feature_dim()},
              {"embed_dim", c.embed_dim},
              {"mlp_hidden", c.mlp_hidden},
              {"use_edge_features", c.use_edge_features},
              {"activation", std::string(to_string(c.activation))},
              {"l2_normalize_layers", c.l2_normalize_layers},
              {"aggregator", std::string(to_string(c.aggregator))},
              {"mlp_bias", c.mlp_bias}};
}

void update_from_json(ModelConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  std::optional<std::size_t> declared_dim;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "feature_mode") c.feature_mode = parse_feature_mode(value.get<std::string>());
      else if (key == "feature_dim") declared_dim = value.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "mlp_hidden") c.mlp_hidden = value.get<std::size_t>();
      else if (key == "use_edge_features") c.use_edge_features = value.get<bool>();
      else if (key == "activation") c.activation = parse_activation(value.get<std::string>());
      else if (key == "l2_normalize_layers") c.l2_normalize_layers = value.get<bool>();
      else if (key == "aggregator") c.aggregator = parse_aggregator(value.get<std::string>());
      else if (key == "mlp_bias") c.mlp_bias = value.get<bool>();
      else throw ConfigError("unknown model config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  if (declared_dim && *declared_dim != c.feature_dim())
    throw ConfigError("feature_dim " + std::to_string(*declared_dim) + " does not match feature_mode " +
                      std::string(to_string(c.feature_mode)));
  c.validate();
}

namespace {

constexpr int kCheckpointVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows)
    throw ShapeMismatch(std::string(name) + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw ShapeMismatch(std::string(name) + ": row " + std::to_string(r) + " should have " + std::to_string(cols) +
                          " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ShapeMismatch(std::string(name) + ": non-numeric entry");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string model_to_json(const GrowlModel& m) {
  m.check_shapes();
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["config"] = to_json(m.config);
  doc["W1"] = matrix_to_json(m.W1);
  doc["W2"] = matrix_to_json(m.W2);
  doc["M1"] = matrix_to_json(m.M1);
  doc["b1"] = std::vector<double>(m.b1.data(), m.b1.data() + m.b1.size());
  doc["M2"] = matrix_to_json(m.M2);
  doc["b2"] = m.b2;
  return doc.dump() + "\n";
}

GrowlModel model_from_json(std::string_view text, std::string_view source) {
  const std::string src(source);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ShapeMismatch(src + ": unreadable checkpoint: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kCheckpointVersion)
    throw VersionMismatch(src + ": checkpoint version is not " + std::to_string(kCheckpointVersion));
  for (const char* key : {"config", "W1", "W2", "M1", "b1", "M2", "b2"})
    if (!doc.contains(key)) throw ShapeMismatch(src + ": missing '" + std::string(key) + "'");
  ModelConfig config;
  update_from_json(config, doc["config"]);
  GrowlModel m = GrowlModel::zeros(config);
  try {
    m.W1 = matrix_from_json(doc["W1"], "W1", config.embed_dim, config.layer1_in());
    m.W2 = matrix_from_json(doc["W2"], "W2", config.embed_dim, config.layer2_in());
    m.M1 = matrix_from_json(doc["M1"], "M1", config.mlp_hidden, config.mlp_in());
    json b1_rows = json::array();
    if (doc["b1"].is_array())
      for (const auto& v : doc["b1"]) b1_rows.push_back(json::array({v}));
    m.b1 = matrix_from_json(b1_rows, "b1", config.mlp_hidden, 1);
    m.M2 = matrix_from_json(doc["M2"], "M2", 1, config.mlp_hidden);
    if (!doc["b2"].is_number()) throw ShapeMismatch("b2 must be a number");
    m.b2 = doc["b2"].get<double>();
  } catch (const ShapeMismatch& e) {
    throw ShapeMismatch(src + ": " + e.what());
  }
  return m;
}

void save_model(const GrowlModel& m, const std::filesystem::path& path) { write_file_atomic(path, model_to_json(m)); }

GrowlModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path), path.string()); }

}  // namespace growl
