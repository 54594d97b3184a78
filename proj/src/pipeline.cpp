#include "growl/pipeline.hpp"

#include "growl/parallel.hpp"

namespace growl {

ScenePrediction predict_groups(const Scene& scene, const GrowlModel& model, double threshold) {
  const SceneGraph g = build_inference_graph(scene, model.config.feature_mode);
  const auto scored = predict_scene(g, model, threshold);
  ScenePrediction out;
  out.frame_id = scene.frame_id;
  out.groups = extract_groups(scored, g.node_ids);
  out.edges.reserve(scored.size());
  for (const auto& s : scored)
    out.edges.push_back({g.node_ids[s.pair.a], g.node_ids[s.pair.b], s.probability, s.label});
  return out;
}

std::vector<ScenePrediction> predict_dataset(const Dataset& dataset, const GrowlModel& model, double threshold,
                                             unsigned threads) {
  std::vector<ScenePrediction> out(dataset.scenes.size());
  parallel_for(dataset.scenes.size(), threads,
               [&](std::size_t i) { out[i] = predict_groups(dataset.scenes[i], model, threshold); });
  return out;
}

std::vector<FramePrediction> to_frame_predictions(const std::vector<ScenePrediction>& predictions) {
  std::vector<FramePrediction> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back({p.frame_id, p.groups});
  return out;
}

double edge_positive_rate(const std::vector<ScenePrediction>& predictions) {
  std::size_t total = 0, positive = 0;
  for (const auto& p : predictions)
    for (const auto& e : p.edges) {
      ++total;
      positive += e.label ? 1 : 0;
    }
  return total == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(total);
}

EvalReport evaluate_model(const Dataset& dataset, const GrowlModel& model, const EvalConfig& cfg, double threshold,
                          unsigned threads) {
  return evaluate(to_frame_predictions(predict_dataset(dataset, model, threshold, threads)), dataset, cfg);
}

}  // namespace growl
