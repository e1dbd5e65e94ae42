// JSON serialization of ScenarioConfig. Key names follow the struct fields.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "opsel/model.hpp"

namespace opsel {

/// Malformed configuration document (bad JSON, missing keys, wrong types).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ConfigError listing every violation when validate() is not empty.
void require_valid(const ScenarioConfig& config);

nlohmann::json qos_to_json(const QosProfile& profile);
QosProfile qos_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

std::string serialize_scenario(const ScenarioConfig& config);
ScenarioConfig parse_scenario(const std::string& text);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

}  // namespace opsel
