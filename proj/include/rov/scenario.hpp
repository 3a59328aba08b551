#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rov/control.hpp"
#include "rov/dynamics.hpp"
#include "rov/estimation.hpp"
#include "rov/link.hpp"
#include "rov/protocol.hpp"
#include "rov/sensors.hpp"

namespace rov {

/// Onboard configuration at power-up.
struct ControlConfig {
    double alpha = kDefaultFilterAlpha;
    PIGains yaw_gains = PIGains::default_yaw();
    PIGains depth_gains = PIGains::default_depth();
    ControlSetpoints setpoints;
};

struct ScriptEntry {
    double t = 0.0;  // s from run start
    proto::CommandMessage command;
};

struct Scenario {
    std::string name = "custom";
    VehicleParams params;
    NoiseConfig noise;
    TurbidityField field;
    LinkConfig link;
    ControlConfig control;
    VehicleState initial;
    double duration = 10.0;
    std::uint64_t seed = 1;
    std::vector<ScriptEntry> script;

    /// Throws ScenarioError describing the first problem found.
    void validate() const;
};

/// Parses a scenario document. Omitted keys keep their defaults; unknown keys
/// are rejected. Throws ScenarioError.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

const std::vector<std::string>& builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
/// Throws ScenarioError for unknown names.
Scenario builtin_scenario(const std::string& name);

/// Builtin name or path to a JSON file.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace rov
