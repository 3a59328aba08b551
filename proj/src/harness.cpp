#include "rov/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rov {

RunLog run_scenario(const Scenario& scenario) {
    scenario.validate();
    Session session(scenario);

    RunLog log;
    log.scenario = scenario.name;
    log.seed = scenario.seed;
    const auto ticks = static_cast<std::uint64_t>(std::floor(scenario.duration / kControlDt + 1e-9)) + 1;
    log.rows.reserve(ticks);

    std::size_t next = 0;
    std::uint32_t seq = 1;
    for (std::uint64_t k = 0; k < ticks; ++k) {
        const double now = static_cast<double>(k) * kControlDt;
        while (next < scenario.script.size() && scenario.script[next].t <= now + 1e-9) {
            proto::CommandMessage cmd = scenario.script[next].command;
            if (cmd.seq == 0) cmd.seq = seq;
            ++seq;
            session.send_command(cmd);
            ++next;
        }
        TickRecord rec = session.tick();
        for (auto& e : rec.events) {
            char stamp[32];
            std::snprintf(stamp, sizeof stamp, "t=%.3f: ", now);
            log.events.push_back(stamp + e);
        }
        log.rows.push_back(rec.row);
    }
    log.stats = session.stats();
    return log;
}

namespace {

void csv_field(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void csv_num(std::ostream& out, double v) {
    char buf[64];
    // Avoid "-0.000000" so equal states print identically.
    if (v == 0.0 || std::fabs(v) < 5e-7) v = 0.0;
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << buf;
}

constexpr const char* kCsvHeader[] = {
    "t_s",         "x_m",          "y_m",         "depth_m",          "yaw_rad",
    "u_mps",       "w_mps",        "r_radps",     "gyro_z_radps",     "accel_x_mps2",
    "accel_y_mps2", "accel_z_mps2", "mag_yaw_rad", "pressure_pa",     "turbidity_v",
    "yaw_est_rad", "depth_est_m",  "turbidity_ntu", "mode",           "yaw_ref_rad",
    "depth_ref_m", "surge_duty",   "duty_left",   "duty_right",       "duty_vertical",
    "flags"};

}  // namespace

void write_csv(const RunLog& log, std::ostream& out) {
    bool first = true;
    for (const char* h : kCsvHeader) {
        if (!first) out << ',';
        csv_field(out, h);
        first = false;
    }
    out << "\r\n";
    for (const auto& r : log.rows) {
        const double nums_a[] = {r.truth.t, r.truth.x, r.truth.y, r.truth.depth, r.truth.yaw,
                                 r.truth.u, r.truth.w, r.truth.r, r.sensors.gyro_z,
                                 r.sensors.accel_xyz[0], r.sensors.accel_xyz[1],
                                 r.sensors.accel_xyz[2], r.sensors.mag_yaw, r.sensors.pressure,
                                 r.sensors.turbidity_voltage, r.yaw_est, r.depth_est,
                                 r.turbidity_ntu};
        for (std::size_t i = 0; i < std::size(nums_a); ++i) {
            if (i) out << ',';
            csv_num(out, nums_a[i]);
        }
        out << ',';
        csv_field(out, proto::to_string(r.setpoints.mode));
        const double nums_b[] = {r.setpoints.yaw_ref, r.setpoints.depth_ref, r.setpoints.surge_duty,
                                 r.duties.left, r.duties.right, r.duties.vertical};
        for (double v : nums_b) {
            out << ',';
            csv_num(out, v);
        }
        out << ',' << static_cast<int>(r.flags) << "\r\n";
    }
}

std::string to_csv(const RunLog& log) {
    std::ostringstream out;
    write_csv(log, out);
    return out.str();
}

StepMetrics step_response_metrics(std::span<const double> times, std::span<const double> values,
                                  double step_time, double initial, double target, double band,
                                  bool angular) {
    if (times.size() != values.size()) throw InvalidInput("step metrics: times/values size mismatch");
    StepMetrics m;
    m.step_time = step_time;
    m.magnitude = angular ? angle_diff(target, initial) : target - initial;

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= step_time - 1e-9) idx.push_back(i);
    if (idx.empty()) throw InvalidInput("step metrics: no samples at or after the step");

    auto error = [&](std::size_t i) {
        return angular ? angle_diff(target, values[i]) : target - values[i];
    };

    std::optional<std::size_t> last_out;
    double peak = 0.0;
    const double dir = m.magnitude < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double e = error(idx[k]);
        if (std::fabs(e) > band) last_out = k;
        peak = std::max(peak, -dir * e);  // response beyond target in the step direction
    }
    if (!last_out)
        m.settling_time = times[idx.front()] - step_time;
    else if (*last_out + 1 < idx.size())
        m.settling_time = times[idx[*last_out + 1]] - step_time;
    else
        m.settling_time = kNeverSettled;

    m.overshoot = m.magnitude != 0.0 ? 100.0 * peak / std::fabs(m.magnitude) : 0.0;

    const std::size_t tail = std::max<std::size_t>(1, idx.size() / 10);
    double sum = 0.0;
    for (std::size_t k = idx.size() - tail; k < idx.size(); ++k) sum += error(idx[k]);
    m.sse = sum / static_cast<double>(tail);
    return m;
}

double default_settling_band(StepChannel channel, double magnitude) {
    const double floor = channel == StepChannel::yaw ? 0.5 * kPi / 180.0 : 0.01;
    return std::max(0.02 * std::fabs(magnitude), floor);
}

namespace {

double reference(const LogRow& r, StepChannel c) {
    return c == StepChannel::yaw ? r.setpoints.yaw_ref : r.setpoints.depth_ref;
}

double response(const LogRow& r, StepChannel c) {
    return c == StepChannel::yaw ? r.truth.yaw : r.truth.depth;
}

}  // namespace

std::vector<double> detect_steps(const RunLog& log, StepChannel channel) {
    std::vector<double> out;
    for (std::size_t i = 1; i < log.rows.size(); ++i) {
        const auto& a = log.rows[i - 1];
        const auto& b = log.rows[i];
        if (b.setpoints.mode == ControlMode::closed_loop && reference(a, channel) != reference(b, channel))
            out.push_back(b.truth.t);
    }
    return out;
}

StepMetrics compute_step_metrics(const RunLog& log, StepChannel channel, double step_time,
                                 std::optional<double> band) {
    const auto& rows = log.rows;
    auto first = std::find_if(rows.begin(), rows.end(),
                              [&](const LogRow& r) { return r.truth.t >= step_time - 1e-9; });
    if (first == rows.end()) throw InvalidInput("step metrics: step_time beyond the end of the log");

    const double target = reference(*first, channel);
    const double initial =
        first == rows.begin() ? response(*first, channel) : response(*(first - 1), channel);

    std::vector<double> times;
    std::vector<double> values;
    for (auto it = first; it != rows.end(); ++it) {
        if (reference(*it, channel) != target) break;
        times.push_back(it->truth.t);
        values.push_back(response(*it, channel));
    }
    const bool angular = channel == StepChannel::yaw;
    const double magnitude = angular ? angle_diff(target, initial) : target - initial;
    return step_response_metrics(times, values, step_time, initial, target,
                                 band.value_or(default_settling_band(channel, magnitude)), angular);
}

std::vector<VehicleState> replay_duties(const RunLog& log, const VehicleParams& params) {
    std::vector<VehicleState> out;
    if (log.rows.empty()) return out;
    out.reserve(log.rows.size());
    VehicleState s = log.rows.front().truth;
    for (std::size_t k = 0; k < log.rows.size(); ++k) {
        out.push_back(s);
        for (int i = 0; i < kSubstepsPerTick; ++i) s = step(s, log.rows[k].duties, params, kSimDt);
        s.t = static_cast<double>(k + 1) * kControlDt;
    }
    return out;
}

const char* to_string(StepChannel channel) { return channel == StepChannel::yaw ? "yaw" : "depth"; }

}  // namespace rov
