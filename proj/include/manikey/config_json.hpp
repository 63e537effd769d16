#pragma once

#include <json.hpp>

#include "manikey/augment.hpp"
#include "manikey/synthrig.hpp"
#include "manikey/train.hpp"

namespace manikey {

/// JSON views of the config structs. apply_* overrides only the keys present,
/// which gives the file-then-flags merge its middle layer.

nlohmann::json to_json(const AugmentationConfig& c);
void apply_json(const nlohmann::json& j, AugmentationConfig& c);

nlohmann::json to_json(const TrainConfig& c);
void apply_json(const nlohmann::json& j, TrainConfig& c);

nlohmann::json to_json(const QuadrupedParams& p);
void apply_json(const nlohmann::json& j, QuadrupedParams& p);

nlohmann::json to_json(const RigConfig& r);
void apply_json(const nlohmann::json& j, RigConfig& r);

nlohmann::json to_json(const DatasetPipeline& p);
void apply_json(const nlohmann::json& j, DatasetPipeline& p);

}  // namespace manikey
