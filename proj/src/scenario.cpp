#include "rov/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "rov/json_mirror.hpp"

namespace rov {
namespace {

using nlohmann::json;

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ScenarioError(std::string(where) + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ScenarioError(std::string(where) + ": unknown key '" + key + "'");
}

void read(const json& j, const char* key, double& out, const char* where) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number())
        throw ScenarioError(std::string(where) + "." + key + ": expected a number");
    out = j.at(key).get<double>();
}

void read_params(const json& j, VehicleParams& p) {
    if (j.contains("weight_force"))
        throw ScenarioError("params.weight_force is derived from mass * gravity and cannot be set");
    check_keys(j, "params",
               {"mass", "buoyant_force", "max_thrust_per_motor", "thrust_deadband", "drag_surge",
                "drag_heave", "drag_yaw", "yaw_inertia", "thruster_arm", "gravity", "water_density",
                "max_depth"});
    read(j, "mass", p.mass, "params");
    read(j, "buoyant_force", p.buoyant_force, "params");
    read(j, "max_thrust_per_motor", p.max_thrust_per_motor, "params");
    read(j, "thrust_deadband", p.thrust_deadband, "params");
    read(j, "drag_surge", p.drag_surge, "params");
    read(j, "drag_heave", p.drag_heave, "params");
    read(j, "drag_yaw", p.drag_yaw, "params");
    read(j, "yaw_inertia", p.yaw_inertia, "params");
    read(j, "thruster_arm", p.thruster_arm, "params");
    read(j, "gravity", p.gravity, "params");
    read(j, "water_density", p.water_density, "params");
    read(j, "max_depth", p.max_depth, "params");
}

void read_noise(const json& j, NoiseConfig& n) {
    check_keys(j, "noise",
               {"gyro_sigma", "gyro_bias_walk", "mag_sigma", "pressure_sigma", "turbidity_sigma", "seed"});
    read(j, "gyro_sigma", n.gyro_sigma, "noise");
    read(j, "gyro_bias_walk", n.gyro_bias_walk, "noise");
    read(j, "mag_sigma", n.mag_sigma, "noise");
    read(j, "pressure_sigma", n.pressure_sigma, "noise");
    read(j, "turbidity_sigma", n.turbidity_sigma, "noise");
    if (j.contains("seed")) n.seed = j.at("seed").get<std::uint64_t>();
}

TurbidityField read_field(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ScenarioError("field: expected an object with a 'kind' string");
    const auto kind = j.at("kind").get<std::string>();
    TurbidityField f;
    if (kind == "constant") {
        check_keys(j, "field", {"kind", "ntu"});
        double ntu = f.base_ntu;
        read(j, "ntu", ntu, "field");
        f = TurbidityField::constant(ntu);
    } else if (kind == "linear_depth") {
        check_keys(j, "field", {"kind", "surface_ntu", "ntu_per_m"});
        double surface = f.base_ntu, per_m = 0.0;
        read(j, "surface_ntu", surface, "field");
        read(j, "ntu_per_m", per_m, "field");
        f = TurbidityField::linear_depth(surface, per_m);
    } else if (kind == "linear") {
        check_keys(j, "field", {"kind", "base_ntu", "gradient_x", "gradient_y", "gradient_depth"});
        read(j, "base_ntu", f.base_ntu, "field");
        read(j, "gradient_x", f.gradient_x, "field");
        read(j, "gradient_y", f.gradient_y, "field");
        read(j, "gradient_depth", f.gradient_depth, "field");
    } else {
        throw ScenarioError("field: unknown kind '" + kind + "'");
    }
    return f;
}

void read_gains(const json& j, PIGains& g, const char* where) {
    check_keys(j, where, {"kp", "ki", "out_min", "out_max", "integral_limit"});
    read(j, "kp", g.kp, where);
    read(j, "ki", g.ki, where);
    read(j, "out_min", g.out_min, where);
    read(j, "out_max", g.out_max, where);
    read(j, "integral_limit", g.integral_limit, where);
}

ControlMode read_mode(const json& j) {
    const auto s = j.get<std::string>();
    if (s == "manual") return ControlMode::manual;
    if (s == "closed_loop") return ControlMode::closed_loop;
    throw ScenarioError("control.mode: unknown mode '" + s + "'");
}

void read_control(const json& j, ControlConfig& c) {
    check_keys(j, "control",
               {"alpha", "yaw_gains", "depth_gains", "mode", "yaw_ref", "depth_ref", "surge_duty",
                "manual_duties"});
    read(j, "alpha", c.alpha, "control");
    if (j.contains("yaw_gains")) read_gains(j.at("yaw_gains"), c.yaw_gains, "control.yaw_gains");
    if (j.contains("depth_gains")) read_gains(j.at("depth_gains"), c.depth_gains, "control.depth_gains");
    if (j.contains("mode")) c.setpoints.mode = read_mode(j.at("mode"));
    read(j, "yaw_ref", c.setpoints.yaw_ref, "control");
    read(j, "depth_ref", c.setpoints.depth_ref, "control");
    read(j, "surge_duty", c.setpoints.surge_duty, "control");
    if (j.contains("manual_duties")) {
        const auto& d = j.at("manual_duties");
        check_keys(d, "control.manual_duties", {"left", "right", "vertical"});
        read(d, "left", c.setpoints.manual_duties.left, "control.manual_duties");
        read(d, "right", c.setpoints.manual_duties.right, "control.manual_duties");
        read(d, "vertical", c.setpoints.manual_duties.vertical, "control.manual_duties");
    }
}

void read_initial(const json& j, VehicleState& s) {
    check_keys(j, "initial", {"x", "y", "depth", "yaw", "u", "w", "r"});
    read(j, "x", s.x, "initial");
    read(j, "y", s.y, "initial");
    read(j, "depth", s.depth, "initial");
    read(j, "yaw", s.yaw, "initial");
    read(j, "u", s.u, "initial");
    read(j, "w", s.w, "initial");
    read(j, "r", s.r, "initial");
}

std::vector<ScriptEntry> read_script(const json& j) {
    if (!j.is_array()) throw ScenarioError("script: expected an array");
    std::vector<ScriptEntry> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        const std::string where = "script[" + std::to_string(i) + "]";
        check_keys(e, where.c_str(), {"t", "command"});
        if (!e.contains("t") || !e.at("t").is_number()) throw ScenarioError(where + ".t: expected a number");
        if (!e.contains("command")) throw ScenarioError(where + ": missing 'command'");
        ScriptEntry entry;
        entry.t = e.at("t").get<double>();
        try {
            entry.command = json_mirror::command_from_json(e.at("command"));
        } catch (const InvalidInput& ex) {
            throw ScenarioError(where + ".command: " + ex.what());
        }
        out.push_back(std::move(entry));
    }
    return out;
}

json gains_to_json(const PIGains& g) {
    return {{"kp", g.kp}, {"ki", g.ki}, {"out_min", g.out_min}, {"out_max", g.out_max},
            {"integral_limit", g.integral_limit}};
}

proto::CommandMessage setpoints_cmd(double yaw_ref, double depth_ref, double surge) {
    return {0, proto::SetSetpoints{yaw_ref, depth_ref, surge}};
}

proto::CommandMessage manual_cmd(double left, double right, double vertical) {
    return {0, proto::ManualDuties{{left, right, vertical}}};
}

Scenario closed_loop_base(const std::string& name, double duration) {
    Scenario s;
    s.name = name;
    s.duration = duration;
    s.control.setpoints.mode = ControlMode::closed_loop;
    return s;
}

using Builder = std::function<Scenario()>;

const std::map<std::string, Builder>& builders() {
    static const std::map<std::string, Builder> table = {
        {"openloop_yaw",
         [] {
             Scenario s;
             s.name = "openloop_yaw";
             s.duration = 20.0;
             s.script = {{1.0, manual_cmd(0.4, -0.4, 0.0)}, {6.0, manual_cmd(0.0, 0.0, 0.0)}};
             return s;
         }},
        {"yaw_step_30deg",
         [] {
             Scenario s = closed_loop_base("yaw_step_30deg", 20.0);
             s.script = {{1.0, setpoints_cmd(30.0 * kPi / 180.0, 0.0, 0.0)}};
             return s;
         }},
        {"depth_step_1m",
         [] {
             Scenario s = closed_loop_base("depth_step_1m", 30.0);
             s.script = {{1.0, setpoints_cmd(0.0, 1.0, 0.0)}};
             return s;
         }},
        {"resurface_drift",
         [] {
             Scenario s;
             s.name = "resurface_drift";
             s.duration = 30.0;
             s.initial.depth = 2.0;
             s.initial.u = 0.2;
             return s;
         }},
        {"turbidity_survey",
         [] {
             Scenario s = closed_loop_base("turbidity_survey", 45.0);
             s.field = {5.0, 2.0, 0.0, 40.0};
             s.control.setpoints.depth_ref = 0.5;
             s.control.setpoints.surge_duty = 0.6;
             s.script = {{15.0, setpoints_cmd(0.0, 1.5, 0.6)}, {30.0, setpoints_cmd(0.0, 3.0, 0.6)}};
             return s;
         }},
        {"link_impaired_yaw_step",
         [] {
             Scenario s = closed_loop_base("link_impaired_yaw_step", 20.0);
             s.link = {100.0, 0.2, 0.002};
             // The uplink is lossy, so the setpoint is repeated.
             for (int i = 0; i < 9; ++i)
                 s.script.push_back({1.0 + 0.5 * i, setpoints_cmd(30.0 * kPi / 180.0, 0.0, 0.0)});
             return s;
         }},
    };
    return table;
}

}  // namespace

void Scenario::validate() const {
    try {
        params.validate();
        noise.validate();
        link.validate();
        control.yaw_gains.validate();
        control.depth_gains.validate();
    } catch (const InvalidConfig& e) {
        throw ScenarioError(e.what());
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ScenarioError("duration must be > 0");
    if (!(control.alpha >= 0.0 && control.alpha <= 1.0))
        throw ScenarioError("control.alpha must be in [0, 1]");
    if (!(control.setpoints.depth_ref >= 0.0 && control.setpoints.depth_ref <= params.max_depth))
        throw ScenarioError("control.depth_ref must be in [0, max_depth]");
    if (!(initial.depth >= 0.0 && initial.depth <= params.max_depth))
        throw ScenarioError("initial.depth must be in [0, max_depth]");
    double prev = 0.0;
    for (const auto& e : script) {
        if (!(e.t >= prev)) throw ScenarioError("script times must be non-decreasing and >= 0");
        if (e.t > duration) throw ScenarioError("script time exceeds duration");
        prev = e.t;
    }
}

Scenario scenario_from_json(const json& j) {
    check_keys(j, "scenario",
               {"name", "duration", "seed", "params", "noise", "field", "link", "control", "initial",
                "script"});
    Scenario s;
    try {
        if (j.contains("name")) s.name = j.at("name").get<std::string>();
        read(j, "duration", s.duration, "scenario");
        if (j.contains("params")) read_params(j.at("params"), s.params);
        if (j.contains("noise")) read_noise(j.at("noise"), s.noise);
        s.seed = s.noise.seed;
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        s.noise.seed = s.seed;
        if (j.contains("field")) s.field = read_field(j.at("field"));
        if (j.contains("link")) {
            check_keys(j.at("link"), "link", {"latency_ms", "drop_prob", "corrupt_prob"});
            read(j.at("link"), "latency_ms", s.link.latency_ms, "link");
            read(j.at("link"), "drop_prob", s.link.drop_prob, "link");
            read(j.at("link"), "corrupt_prob", s.link.corrupt_prob, "link");
        }
        if (j.contains("control")) read_control(j.at("control"), s.control);
        if (j.contains("initial")) read_initial(j.at("initial"), s.initial);
        if (j.contains("script")) s.script = read_script(j.at("script"));
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError("scenario file '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
    const auto& p = s.params;
    const auto& sp = s.control.setpoints;
    json script = json::array();
    for (const auto& e : s.script) {
        json cmd = json_mirror::to_json(e.command);
        cmd.erase("type");
        script.push_back({{"t", e.t}, {"command", cmd}});
    }
    return {
        {"name", s.name},
        {"duration", s.duration},
        {"seed", s.seed},
        {"params",
         {{"mass", p.mass}, {"buoyant_force", p.buoyant_force},
          {"max_thrust_per_motor", p.max_thrust_per_motor}, {"thrust_deadband", p.thrust_deadband},
          {"drag_surge", p.drag_surge}, {"drag_heave", p.drag_heave}, {"drag_yaw", p.drag_yaw},
          {"yaw_inertia", p.yaw_inertia}, {"thruster_arm", p.thruster_arm}, {"gravity", p.gravity},
          {"water_density", p.water_density}, {"max_depth", p.max_depth}}},
        {"noise",
         {{"gyro_sigma", s.noise.gyro_sigma}, {"gyro_bias_walk", s.noise.gyro_bias_walk},
          {"mag_sigma", s.noise.mag_sigma}, {"pressure_sigma", s.noise.pressure_sigma},
          {"turbidity_sigma", s.noise.turbidity_sigma}}},
        {"field",
         {{"kind", "linear"}, {"base_ntu", s.field.base_ntu}, {"gradient_x", s.field.gradient_x},
          {"gradient_y", s.field.gradient_y}, {"gradient_depth", s.field.gradient_depth}}},
        {"link",
         {{"latency_ms", s.link.latency_ms}, {"drop_prob", s.link.drop_prob},
          {"corrupt_prob", s.link.corrupt_prob}}},
        {"control",
         {{"alpha", s.control.alpha},
          {"yaw_gains", gains_to_json(s.control.yaw_gains)},
          {"depth_gains", gains_to_json(s.control.depth_gains)},
          {"mode", proto::to_string(sp.mode)},
          {"yaw_ref", sp.yaw_ref},
          {"depth_ref", sp.depth_ref},
          {"surge_duty", sp.surge_duty},
          {"manual_duties",
           {{"left", sp.manual_duties.left}, {"right", sp.manual_duties.right},
            {"vertical", sp.manual_duties.vertical}}}}},
        {"initial",
         {{"x", s.initial.x}, {"y", s.initial.y}, {"depth", s.initial.depth}, {"yaw", s.initial.yaw},
          {"u", s.initial.u}, {"w", s.initial.w}, {"r", s.initial.r}}},
        {"script", script},
    };
}

const std::vector<std::string>& builtin_scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : builders()) v.push_back(name);
        return v;
    }();
    return names;
}

bool is_builtin_scenario(const std::string& name) { return builders().count(name) > 0; }

Scenario builtin_scenario(const std::string& name) {
    const auto it = builders().find(name);
    if (it == builders().end()) throw ScenarioError("unknown builtin scenario '" + name + "'");
    Scenario s = it->second();
    s.noise.seed = s.seed;
    s.validate();
    return s;
}

Scenario resolve_scenario(const std::string& name_or_path) {
    if (is_builtin_scenario(name_or_path)) return builtin_scenario(name_or_path);
    return load_scenario_file(name_or_path);
}

}  // namespace rov
