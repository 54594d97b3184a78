#pragma once

#include <vector>

#include "growl/evaluation.hpp"
#include "growl/grouping.hpp"
#include "growl/model.hpp"
#include "growl/scene.hpp"

namespace growl {

// Scores the fully connected graph of a scene, drops label-0 edges and
// returns the surviving components with every scored edge.
ScenePrediction predict_groups(const Scene& scene, const GrowlModel& model, double threshold = 0.5);

// One prediction per scene, in dataset order, computed on `threads` workers.
std::vector<ScenePrediction> predict_dataset(const Dataset& dataset, const GrowlModel& model, double threshold = 0.5,
                                             unsigned threads = 1);

std::vector<FramePrediction> to_frame_predictions(const std::vector<ScenePrediction>& predictions);

// Fraction of scored edges labeled 1.
double edge_positive_rate(const std::vector<ScenePrediction>& predictions);

EvalReport evaluate_model(const Dataset& dataset, const GrowlModel& model, const EvalConfig& cfg = {},
                          double threshold = 0.5, unsigned threads = 1);

}  // namespace growl
