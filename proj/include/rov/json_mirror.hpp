#pragma once

// JSON mirror of the tether messages for the dashboard bridge. Field names
// match the message structs; values are SI floats. Every object carries
// "type": "telemetry" | "command" | "log".

#include <json.hpp>

#include "rov/protocol.hpp"

namespace rov::json_mirror {

using nlohmann::json;

json to_json(const proto::TelemetryFrame& frame);
json to_json(const proto::CommandMessage& cmd);
json to_json(const proto::Message& msg);

/// Throws InvalidInput on a missing "kind", an unknown kind, or ill-typed fields.
/// Unrecognised extra keys are ignored.
proto::CommandMessage command_from_json(const json& j);
proto::TelemetryFrame telemetry_from_json(const json& j);
proto::Message message_from_json(const json& j);

}  // namespace rov::json_mirror
