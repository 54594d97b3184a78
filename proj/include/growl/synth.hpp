#pragma once

#include <cstdint>
#include <random>

#include <json.hpp>

#include "growl/scene.hpp"

namespace growl {

struct SynthConfig {
  std::size_t n_scenes = 500;
  std::size_t people_min = 10;
  std::size_t people_max = 20;
  std::size_t group_min = 2;
  std::size_t group_max = 6;
  double formation_radius = 0.6;
  double min_center_separation = 1.8;  // 3 x formation_radius
  double position_jitter = 0.05;       // std-dev, scene units
  double orientation_jitter = 0.1;     // std-dev, radians
  double singleton_fraction = 0.1;
  double area_size = 10.0;  // scenes live in [0, area_size]^2
  std::size_t max_attempts = 10000;
  std::uint64_t seed = 0;

  // Hard sub-corpus: pairs of groups whose centers sit adjacent_spacing x
  // formation_radius apart, so only orientation separates them.
  std::size_t hard_pairs = 2;
  double adjacent_spacing = 2.2;

  void validate() const;  // throws ConfigError naming the violated invariant
};

nlohmann::ordered_json to_json(const SynthConfig& c);
void update_from_json(SynthConfig& c, const nlohmann::ordered_json& j);

// Rejection-sampled F-formations: members evenly spaced on a circle around
// each group center, facing it. Throws PlacementFailure.
Scene generate_scene(const SynthConfig& cfg, std::mt19937_64& rng, std::string frame_id);
Dataset generate_corpus(const SynthConfig& cfg);

Scene generate_hard_scene(const SynthConfig& cfg, std::mt19937_64& rng, std::string frame_id);
Dataset generate_hard_corpus(const SynthConfig& cfg);

}  // namespace growl
