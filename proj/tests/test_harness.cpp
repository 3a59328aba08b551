#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rov/harness.hpp"

using namespace rov;

TEST_CASE("step metrics: perfect instantaneous step") {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(i * 0.1);
        y.push_back(i * 0.1 >= 2.0 ? 1.0 : 0.0);
    }
    const auto m = step_response_metrics(t, y, 2.0, 0.0, 1.0, 0.02);
    CHECK(m.settling_time == 0.0);
    CHECK(m.overshoot == 0.0);
    CHECK(m.sse == 0.0);
}

TEST_CASE("step metrics: first-order response settles at tau * ln(50)") {
    const double dt = 1e-3;
    std::vector<double> t, y;
    for (int i = 0; i <= 10000; ++i) {
        t.push_back(i * dt);
        y.push_back(1.0 - std::exp(-i * dt));
    }
    const auto m = step_response_metrics(t, y, 0.0, 0.0, 1.0, 0.02);
    // e^(-t) = 0.02 solved by hand: t = ln 50 = 3.912023.
    CHECK(m.settling_time == doctest::Approx(3.912023).epsilon(dt));
    CHECK(m.overshoot == 0.0);
}

TEST_CASE("step metrics: overshoot, never-settled sentinel, steady-state error") {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(i);
        y.push_back(i < 10 ? 1.3 : 1.0);
    }
    auto m = step_response_metrics(t, y, 0.0, 0.0, 1.0, 0.05);
    CHECK(m.overshoot == doctest::Approx(30.0));
    CHECK(m.settling_time == 10.0);

    for (auto& v : y) v = 0.5;
    m = step_response_metrics(t, y, 0.0, 0.0, 1.0, 0.05);
    CHECK(std::isinf(m.settling_time));
    CHECK(m.sse == doctest::Approx(0.5));

    for (auto& v : y) v = 1.0;
    CHECK(step_response_metrics(t, y, 0.0, 0.0, 1.0, 0.05).sse == 0.0);

    // Negative step: overshoot counted below the target.
    for (int i = 0; i <= 100; ++i) y[i] = i < 5 ? -1.2 : -1.0;
    m = step_response_metrics(t, y, 0.0, 0.0, -1.0, 0.05);
    CHECK(m.overshoot == doctest::Approx(20.0));
}

TEST_CASE("step metrics: angular errors wrap") {
    std::vector<double> t = {0.0, 1.0, 2.0};
    std::vector<double> y = {kPi - 0.01, -kPi + 0.005, -kPi + 0.001};
    const auto m = step_response_metrics(t, y, 0.0, 0.0, -kPi + 0.002, 0.02, true);
    CHECK(m.settling_time == 0.0);
}

TEST_CASE("default settling band floors") {
    CHECK(default_settling_band(StepChannel::yaw, 0.01) == doctest::Approx(0.5 * kPi / 180.0));
    CHECK(default_settling_band(StepChannel::depth, 0.1) == doctest::Approx(0.01));
    CHECK(default_settling_band(StepChannel::depth, 2.0) == doctest::Approx(0.04));
}

TEST_CASE("quiet surface run: all rows show the same ground truth") {
    Scenario s;
    s.noise = NoiseConfig::none();
    s.duration = 2.0;
    const RunLog log = run_scenario(s);
    REQUIRE(log.rows.size() == 101);
    for (std::size_t k = 0; k < log.rows.size(); ++k) {
        auto truth = log.rows[k].truth;
        CHECK(truth.t == doctest::Approx(k * kControlDt));
        truth.t = 0.0;
        CHECK(truth == VehicleState{});
        CHECK(log.rows[k].duties == ThrusterDuties{});
    }
}

TEST_CASE("same seed gives byte-identical CSV, different seed differs") {
    Scenario s = builtin_scenario("yaw_step_30deg");
    s.duration = 5.0;
    const auto a = to_csv(run_scenario(s));
    const auto b = to_csv(run_scenario(s));
    CHECK(a == b);
    s.seed = s.noise.seed = 99;
    CHECK(to_csv(run_scenario(s)) != a);
}

TEST_CASE("CSV layout") {
    Scenario s;
    s.duration = 0.1;
    const auto csv = to_csv(run_scenario(s));
    std::istringstream in(csv);
    std::string header, row;
    std::getline(in, header);
    CHECK(header.rfind("t_s,x_m,y_m,depth_m,yaw_rad", 0) == 0);
    CHECK(header.back() == '\r');
    std::getline(in, row);
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
    CHECK(row.rfind("0.000000,", 0) == 0);
    std::size_t lines = 2;  // header + first row
    while (std::getline(in, row)) ++lines;
    CHECK(lines == 7);
}

TEST_CASE("replaying logged duties through the dynamics reproduces ground truth") {
    for (const char* name : {"yaw_step_30deg", "turbidity_survey", "link_impaired_yaw_step"}) {
        const Scenario s = builtin_scenario(name);
        const RunLog log = run_scenario(s);
        const auto replay = replay_duties(log, s.params);
        REQUIRE(replay.size() == log.rows.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < replay.size(); ++k) {
            const auto& a = replay[k];
            const auto& b = log.rows[k].truth;
            for (double d : {a.x - b.x, a.y - b.y, a.depth - b.depth, angle_diff(a.yaw, b.yaw), a.u - b.u,
                             a.w - b.w, a.r - b.r})
                worst = std::max(worst, std::fabs(d));
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("session: a gain change is echoed by the next telemetry frame") {
    Session session(Scenario{});
    session.tick();
    proto::SetGains g;
    g.yaw = proto::GainPair{1.5, 0.25};
    g.alpha = 0.9;
    session.send_command({7, g});
    const auto rec = session.tick();
    CHECK(rec.telemetry.yaw_gains == proto::GainPair{1.5, 0.25});
    CHECK(rec.telemetry.depth_gains.kp == PIGains::default_depth().kp);
    CHECK(session.alpha() == 0.9);
    REQUIRE(!rec.surface_received.empty());
    CHECK(std::get<proto::TelemetryFrame>(rec.surface_received.back()).yaw_gains.kp == doctest::Approx(1.5));
}

TEST_CASE("session: later command wins") {
    Session session(Scenario{});
    session.send_command({1, proto::SetSetpoints{0.5, 1.0, 0.1}});
    session.send_command({2, proto::SetSetpoints{-0.5, 2.0, 0.2}});
    session.tick();
    CHECK(session.setpoints().yaw_ref == -0.5);
    CHECK(session.setpoints().depth_ref == 2.0);
}

TEST_CASE("session: invalid commands are rejected with a log message") {
    Session session(Scenario{});
    proto::SetGains g;
    g.yaw = proto::GainPair{-1.0, 0.0};
    session.send_command({1, g});
    session.send_command({2, proto::SetSetpoints{0.0, 25.0, 0.0}});
    const auto rec = session.tick();
    CHECK(session.stats().commands_rejected == 2);
    CHECK(session.yaw_gains() == PIGains::default_yaw());
    int logs = 0;
    for (const auto& m : rec.surface_received) logs += std::holds_alternative<proto::LogText>(m);
    CHECK(logs == 2);
}

TEST_CASE("session: manual_duties switches to manual mode; ping answers") {
    Scenario s;
    s.control.setpoints.mode = ControlMode::closed_loop;
    Session session(s);
    session.send_command({1, proto::ManualDuties{{0.3, 0.3, 0.0}}});
    session.send_command({2, proto::Ping{}});
    const auto rec = session.tick();
    CHECK(session.setpoints().mode == ControlMode::manual);
    CHECK(rec.telemetry.mode == ControlMode::manual);
    CHECK(rec.row.duties == ThrusterDuties{0.3, 0.3, 0.0});
    bool pong = false;
    for (const auto& m : rec.surface_received)
        if (auto* l = std::get_if<proto::LogText>(&m)) pong = pong || l->text == "pong #2";
    CHECK(pong);
}

TEST_CASE("telemetry latency: a setpoint change shows within two ticks") {
    Session session(Scenario{});
    for (int i = 0; i < 5; ++i) session.tick();
    session.send_command({1, proto::SetMode{ControlMode::closed_loop}});
    int ticks = 0;
    bool seen = false;
    while (!seen && ticks < 2) {
        const auto rec = session.tick();
        ++ticks;
        for (const auto& m : rec.surface_received)
            if (auto* f = std::get_if<proto::TelemetryFrame>(&m)) seen = seen || f->mode == ControlMode::closed_loop;
    }
    CHECK(seen);
}

TEST_CASE("telemetry seq increases by one per frame") {
    Session session(Scenario{});
    for (std::uint32_t k = 0; k < 50; ++k) CHECK(session.tick().telemetry.seq == k);
}

TEST_CASE("divergence carries the tick index") {
    Scenario s;
    s.params.yaw_inertia = 1e-300;
    s.control.setpoints.manual_duties = {1.0, -1.0, 0.0};
    try {
        run_scenario(s);
        FAIL("expected divergence");
    } catch (const SimulationDiverged& e) {
        CHECK(e.tick() >= 0);
    }
}

TEST_CASE("detect_steps finds scripted setpoint changes") {
    const RunLog log = run_scenario(builtin_scenario("turbidity_survey"));
    const auto steps = detect_steps(log, StepChannel::depth);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == doctest::Approx(15.0));
    CHECK(steps[1] == doctest::Approx(30.0));
    // Deeper water is murkier in the survey field.
    CHECK(log.rows.back().turbidity_ntu > log.rows.front().turbidity_ntu + 50.0);
}

TEST_CASE("link impairment scenario still applies the repeated step") {
    const RunLog log = run_scenario(builtin_scenario("link_impaired_yaw_step"));
    CHECK(log.stats.commands_applied >= 1);
    CHECK(log.rows.back().setpoints.yaw_ref == doctest::Approx(0.52));
}
