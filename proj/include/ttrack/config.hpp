// JSON scenario configuration. The schema mirrors ScenarioConfig field for
// field; to_json emits every value including defaults so a summary embeds
// the fully resolved configuration.
#pragma once

#include <string>

#include <json.hpp>

#include "ttrack/pipeline.hpp"

namespace ttrack {

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

// Throws Error with a diagnostic on missing file, parse failure, or invalid
// values.
ScenarioConfig load_config(const std::string& path);

}  // namespace ttrack
