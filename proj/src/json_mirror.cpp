#include "rov/json_mirror.hpp"

#include <string>

namespace rov::json_mirror {
namespace {

json duties_json(const ThrusterDuties& d) {
    return {{"left", d.left}, {"right", d.right}, {"vertical", d.vertical}};
}

json gains_json(const proto::GainPair& g) { return {{"kp", g.kp}, {"ki", g.ki}}; }

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("json: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string("json: field '") + key + "' has the wrong type");
    }
}

double number(const json& j, const char* key) {
    const auto& v = j.contains(key) ? j.at(key) : json();
    if (!v.is_number()) throw InvalidInput(std::string("json: field '") + key + "' must be a number");
    return v.get<double>();
}

ThrusterDuties duties_from(const json& j) {
    if (!j.is_object()) throw InvalidInput("json: duties must be an object");
    return {number(j, "left"), number(j, "right"), number(j, "vertical")};
}

proto::GainPair gains_from(const json& j) {
    if (!j.is_object()) throw InvalidInput("json: gains must be an object");
    return {number(j, "kp"), number(j, "ki")};
}

ControlMode mode_from(const std::string& s) {
    if (s == "manual") return ControlMode::manual;
    if (s == "closed_loop") return ControlMode::closed_loop;
    throw InvalidInput("json: unknown mode '" + s + "'");
}

}  // namespace

json to_json(const proto::TelemetryFrame& f) {
    return {{"type", "telemetry"},
            {"seq", f.seq},
            {"t", f.t},
            {"yaw_est", f.yaw_est},
            {"depth_est", f.depth_est},
            {"turbidity", f.turbidity},
            {"duties", duties_json(f.duties)},
            {"mode", proto::to_string(f.mode)},
            {"yaw_gains", gains_json(f.yaw_gains)},
            {"depth_gains", gains_json(f.depth_gains)},
            {"flags", f.flags}};
}

json to_json(const proto::CommandMessage& c) {
    json j = {{"type", "command"}, {"seq", c.seq}, {"kind", proto::to_string(c.kind())}};
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, proto::SetMode>) {
                j["mode"] = proto::to_string(p.mode);
            } else if constexpr (std::is_same_v<T, proto::SetSetpoints>) {
                j["yaw_ref"] = p.yaw_ref;
                j["depth_ref"] = p.depth_ref;
                j["surge_duty"] = p.surge_duty;
            } else if constexpr (std::is_same_v<T, proto::SetGains>) {
                if (p.yaw) j["yaw_gains"] = gains_json(*p.yaw);
                if (p.depth) j["depth_gains"] = gains_json(*p.depth);
                if (p.alpha) j["alpha"] = *p.alpha;
            } else if constexpr (std::is_same_v<T, proto::ManualDuties>) {
                j["duties"] = duties_json(p.duties);
            }
        },
        c.payload);
    return j;
}

json to_json(const proto::Message& msg) {
    if (const auto* tf = std::get_if<proto::TelemetryFrame>(&msg)) return to_json(*tf);
    if (const auto* cmd = std::get_if<proto::CommandMessage>(&msg)) return to_json(*cmd);
    return {{"type", "log"}, {"text", std::get<proto::LogText>(msg).text}};
}

proto::CommandMessage command_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("json: command must be an object");
    proto::CommandMessage c;
    if (j.contains("seq")) c.seq = field<std::uint32_t>(j, "seq");
    const auto kind = field<std::string>(j, "kind");

    if (kind == "set_mode") {
        c.payload = proto::SetMode{mode_from(field<std::string>(j, "mode"))};
    } else if (kind == "set_setpoints") {
        c.payload = proto::SetSetpoints{number(j, "yaw_ref"), number(j, "depth_ref"),
                                        j.contains("surge_duty") ? number(j, "surge_duty") : 0.0};
    } else if (kind == "set_gains") {
        proto::SetGains g;
        if (j.contains("yaw_gains")) g.yaw = gains_from(j.at("yaw_gains"));
        if (j.contains("depth_gains")) g.depth = gains_from(j.at("depth_gains"));
        if (j.contains("alpha")) g.alpha = number(j, "alpha");
        c.payload = g;
    } else if (kind == "manual_duties") {
        if (j.contains("mode") && mode_from(field<std::string>(j, "mode")) != ControlMode::manual)
            throw InvalidInput("json: manual_duties implies mode 'manual'");
        c.payload = proto::ManualDuties{duties_from(field<json>(j, "duties"))};
    } else if (kind == "ping") {
        c.payload = proto::Ping{};
    } else {
        throw InvalidInput("json: unknown command kind '" + kind + "'");
    }
    return c;
}

proto::TelemetryFrame telemetry_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("json: telemetry must be an object");
    proto::TelemetryFrame f;
    f.seq = field<std::uint32_t>(j, "seq");
    f.t = number(j, "t");
    f.yaw_est = number(j, "yaw_est");
    f.depth_est = number(j, "depth_est");
    f.turbidity = number(j, "turbidity");
    f.duties = duties_from(field<json>(j, "duties"));
    f.mode = mode_from(field<std::string>(j, "mode"));
    f.yaw_gains = gains_from(field<json>(j, "yaw_gains"));
    f.depth_gains = gains_from(field<json>(j, "depth_gains"));
    f.flags = field<std::uint8_t>(j, "flags");
    return f;
}

proto::Message message_from_json(const json& j) {
    const auto type = field<std::string>(j, "type");
    if (type == "telemetry") return telemetry_from_json(j);
    if (type == "command") return command_from_json(j);
    if (type == "log") return proto::LogText{field<std::string>(j, "text")};
    throw InvalidInput("json: unknown message type '" + type + "'");
}

}  // namespace rov::json_mirror
