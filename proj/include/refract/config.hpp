#pragma once

#include <string>

#include "json.hpp"
#include "refract/model.hpp"

namespace refract {

struct ModelConfig {
    LevyModel model;
    RefractionConfig refraction;
};

// Parse {"gamma"|"c":.., "sigma":.., "jumps":{...}, "delta":.., "b":..}.
// "jumps" is {"type":"hyperexp","lambda":..,"weights":[..],"rates":[..]},
// {"type":"stable","alpha":..}, or {"type":"none"}. Unknown keys are rejected.
// Throws ConfigError on any schema or value problem.
ModelConfig parse_model_config(const nlohmann::json& j);

// Read and parse a config file; file errors are reported as ConfigError.
ModelConfig load_model_config(const std::string& path);

// Round-trip the model back into the config schema (always emits "gamma").
nlohmann::json model_config_to_json(const ModelConfig& cfg);

}  // namespace refract
