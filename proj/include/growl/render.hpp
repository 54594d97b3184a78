#pragma once

#include <string>

#include "growl/grouping.hpp"
#include "growl/scene.hpp"

namespace growl {

// Top-down SVG of one scene: nodes with an orientation tick, ground-truth
// group edges (solid) and, when given, predicted label-1 edges (dashed).
// Output is byte-deterministic.
std::string render_scene_svg(const Scene& scene, const ScenePrediction* prediction = nullptr);

}  // namespace growl
