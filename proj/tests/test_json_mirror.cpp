#include <doctest.h>

#include "protocol_fixtures.hpp"
#include "rov/json_mirror.hpp"

using namespace rov;
using namespace rov::proto;
using nlohmann::json;

TEST_CASE("telemetry JSON uses the message field names in SI units") {
    const json j = json_mirror::to_json(fixtures::reference_telemetry());
    CHECK(j["type"] == "telemetry");
    CHECK(j["seq"] == 7);
    CHECK(j["t"].get<double>() == doctest::Approx(1.234));
    CHECK(j["yaw_est"].get<double>() == doctest::Approx(0.52));
    CHECK(j["depth_est"].get<double>() == doctest::Approx(1.5));
    CHECK(j["duties"]["right"].get<double>() == doctest::Approx(-0.25));
    CHECK(j["mode"] == "closed_loop");
    CHECK(j["yaw_gains"]["kp"].get<double>() == doctest::Approx(0.8));
    CHECK(j["flags"] == 2);
    CHECK(json_mirror::telemetry_from_json(j) == fixtures::reference_telemetry());
}

TEST_CASE("dashboard setpoint command parses") {
    const auto j = json::parse(
        R"({"type":"command","kind":"set_setpoints","seq":4,"yaw_ref":0.7854,"depth_ref":1.5,"surge_duty":0.2})");
    const auto c = json_mirror::command_from_json(j);
    CHECK(c.seq == 4);
    const auto& sp = std::get<SetSetpoints>(c.payload);
    CHECK(sp.yaw_ref == 0.7854);
    CHECK(sp.depth_ref == 1.5);
    CHECK(sp.surge_duty == 0.2);
}

TEST_CASE("all-stop command: manual mode with zero duties") {
    const auto j = json::parse(
        R"({"type":"command","kind":"manual_duties","mode":"manual","duties":{"left":0,"right":0,"vertical":0}})");
    const auto c = json_mirror::command_from_json(j);
    CHECK(std::get<ManualDuties>(c.payload).duties == ThrusterDuties{});
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(
                        R"({"kind":"manual_duties","mode":"closed_loop","duties":{"left":0,"right":0,"vertical":0}})")),
                    InvalidInput);
}

TEST_CASE("partial gain updates keep absent fields absent") {
    const auto c = json_mirror::command_from_json(
        json::parse(R"({"kind":"set_gains","depth_gains":{"kp":1.2,"ki":0.3}})"));
    const auto& g = std::get<SetGains>(c.payload);
    CHECK(!g.yaw);
    CHECK(!g.alpha);
    CHECK(g.depth->kp == 1.2);
}

TEST_CASE("malformed commands are rejected") {
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(R"({"kind":"launch"})")), InvalidInput);
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(R"({"seq":1})")), InvalidInput);
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(R"({"kind":"set_mode","mode":"auto"})")),
                    InvalidInput);
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(R"({"kind":"set_setpoints","yaw_ref":"x"})")),
                    InvalidInput);
    CHECK_THROWS_AS(json_mirror::command_from_json(json::parse(R"([1,2])")), InvalidInput);
}

TEST_CASE("every command kind survives the JSON mirror") {
    fixtures::GridRng g(31);
    for (int i = 0; i < 500; ++i) {
        const auto c = fixtures::random_command(g);
        const json j = json_mirror::to_json(c);
        CHECK(j["kind"] == to_string(c.kind()));
        CHECK(json_mirror::command_from_json(j) == c);
        CHECK(std::get<CommandMessage>(json_mirror::message_from_json(j)) == c);
    }
}

TEST_CASE("log messages mirror as text") {
    const json j = json_mirror::to_json(Message{LogText{"hello"}});
    CHECK(j == json{{"type", "log"}, {"text", "hello"}});
    CHECK(std::get<LogText>(json_mirror::message_from_json(j)).text == "hello");
}
