#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "rov/scenario.hpp"

using namespace rov;
using nlohmann::json;

TEST_CASE("empty document gives defaults") {
    const Scenario s = scenario_from_json(json::object());
    CHECK(s.params.mass == 1.6);
    CHECK(s.params.buoyant_force == 16.7);
    CHECK(s.params.max_depth == 20.0);
    CHECK(s.control.alpha == 0.98);
    CHECK(s.control.yaw_gains == PIGains::default_yaw());
    CHECK(s.link.latency_ms == 0.0);
    CHECK(s.script.empty());
}

TEST_CASE("keys mirror the parameter names") {
    const auto j = json::parse(R"({
        "name": "t1", "duration": 12.5, "seed": 77,
        "params": {"buoyant_force": 13.0, "drag_surge": 90, "max_depth": 10},
        "noise": {"mag_sigma": 0.0},
        "field": {"kind": "linear_depth", "surface_ntu": 3, "ntu_per_m": 12},
        "link": {"latency_ms": 40, "drop_prob": 0.1, "corrupt_prob": 0.001},
        "control": {"alpha": 0.9, "mode": "closed_loop", "depth_ref": 2.0,
                    "depth_gains": {"kp": 1.0, "integral_limit": 3}},
        "initial": {"depth": 1.0, "yaw": 0.5},
        "script": [{"t": 1.0, "command": {"kind": "set_setpoints", "yaw_ref": 0.5, "depth_ref": 3.0}},
                   {"t": 2.0, "command": {"kind": "ping"}}]
    })");
    const Scenario s = scenario_from_json(j);
    CHECK(s.name == "t1");
    CHECK(s.duration == 12.5);
    CHECK(s.seed == 77);
    CHECK(s.noise.seed == 77);
    CHECK(s.params.buoyant_force == 13.0);
    CHECK(s.params.drag_surge == 90.0);
    CHECK(s.params.mass == 1.6);
    CHECK(s.noise.mag_sigma == 0.0);
    CHECK(s.field.gradient_depth == 12.0);
    CHECK(s.link.latency_ms == 40.0);
    CHECK(s.control.alpha == 0.9);
    CHECK(s.control.setpoints.mode == ControlMode::closed_loop);
    CHECK(s.control.depth_gains.kp == 1.0);
    CHECK(s.control.depth_gains.ki == PIGains::default_depth().ki);
    CHECK(s.control.depth_gains.integral_limit == 3.0);
    CHECK(s.initial.depth == 1.0);
    REQUIRE(s.script.size() == 2);
    CHECK(s.script[1].command.kind() == proto::CommandKind::ping);
}

TEST_CASE("scenario errors") {
    auto bad = [](const char* text) { return scenario_from_json(json::parse(text)); };
    CHECK_THROWS_AS(bad(R"({"params": {"mas": 1}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"params": {"weight_force": 15}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"params": {"mass": -1}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"duration": 0})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"frobnicate": 1})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"control": {"alpha": 2}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"field": {"kind": "spiral"}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"duration": 5, "script": [{"t": 6, "command": {"kind": "ping"}}]})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"script": [{"t": 2, "command": {"kind": "ping"}}, {"t": 1, "command": {"kind": "ping"}}]})"),
                    ScenarioError);
    CHECK_THROWS_AS(bad(R"({"script": [{"t": 1, "command": {"kind": "warp"}}]})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"link": {"drop_prob": 3}})"), ScenarioError);
    CHECK_THROWS_AS(bad(R"({"params": {"mass": "heavy"}})"), ScenarioError);
}

TEST_CASE("builtins exist and validate") {
    const auto& names = builtin_scenario_names();
    for (const char* expected : {"openloop_yaw", "yaw_step_30deg", "depth_step_1m", "resurface_drift",
                                 "turbidity_survey", "link_impaired_yaw_step"}) {
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
        CHECK_NOTHROW(builtin_scenario(expected));
    }
    CHECK_THROWS_AS(builtin_scenario("nope"), ScenarioError);
}

TEST_CASE("scenario_to_json round-trips through the parser") {
    for (const auto& name : builtin_scenario_names()) {
        const Scenario a = builtin_scenario(name);
        const Scenario b = scenario_from_json(scenario_to_json(a));
        CHECK(scenario_to_json(b) == scenario_to_json(a));
    }
}

TEST_CASE("scenario files load from disk") {
    const std::string path = "test_scenario_tmp.json";
    {
        std::ofstream out(path);
        out << R"({"name": "disk", "duration": 3})";
    }
    CHECK(resolve_scenario(path).name == "disk");
    CHECK(resolve_scenario("openloop_yaw").name == "openloop_yaw");
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/file.json"), ScenarioError);
}
