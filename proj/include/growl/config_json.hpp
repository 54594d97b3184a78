#pragma once

// JSON (de)serialization of the configuration structs. Reading starts from
// the struct's current values, so partial objects override only the keys they
// name; unknown keys raise ConfigError.

#include <json.hpp>

#include "growl/model.hpp"

namespace growl {

nlohmann::ordered_json to_json(const ModelConfig& c);
void update_from_json(ModelConfig& c, const nlohmann::ordered_json& j);

}  // namespace growl

#include "growl/trainer.hpp"

namespace growl {

nlohmann::ordered_json to_json(const TrainConfig& c);
void update_from_json(TrainConfig& c, const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const EvalConfig& c);
void update_from_json(EvalConfig& c, const nlohmann::ordered_json& j);

}  // namespace growl
