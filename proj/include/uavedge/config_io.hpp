#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "uavedge/train.hpp"

namespace uavedge {

// Config documents are JSON objects with optional "sim", "agent" and "train"
// sections; omitted keys keep their defaults, unknown keys are rejected.
// Errors are ConfigError with a dotted field path such as "sim.alpha".
TrainConfig config_from_json(const nlohmann::json& doc);
TrainConfig parse_config(std::string_view text);

// Throws IoError when the file cannot be read.
TrainConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const TrainConfig& config);

}  // namespace uavedge
