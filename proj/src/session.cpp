#include "rov/session.hpp"

#include <cmath>

namespace rov {
namespace {

constexpr std::uint64_t kUplinkSeedSalt = 0x75706c696e6bULL;
constexpr std::uint64_t kDownlinkSeedSalt = 0x646f776e6c6eULL;

std::uint8_t sensor_fault_flags(const SensorFrame& s, double depth_est, const VehicleParams& p) {
    const bool finite = std::isfinite(s.gyro_z) && std::isfinite(s.mag_yaw) &&
                        std::isfinite(s.pressure) && std::isfinite(s.turbidity_voltage);
    const bool plausible = s.pressure > 0.5 * kAtmosphericPressure && depth_est < p.max_depth + 1.0;
    return (finite && plausible) ? 0 : proto::kFlagSensorFault;
}

}  // namespace

Session::Session(Scenario scenario)
    : scenario_(std::move(scenario)),
      state_(scenario_.initial),
      prev_state_(scenario_.initial),
      noise_(scenario_.seed),
      uplink_(scenario_.link, scenario_.seed ^ kUplinkSeedSalt),
      downlink_(scenario_.link, scenario_.seed ^ kDownlinkSeedSalt) {
    scenario_.validate();
    state_.t = 0.0;
    state_.yaw = wrap_angle(state_.yaw);
    prev_state_ = state_;
    filter_.alpha = scenario_.control.alpha;
    setpoints_ = scenario_.control.setpoints;
    setpoints_.yaw_ref = wrap_angle(setpoints_.yaw_ref);
    yaw_.gains = scenario_.control.yaw_gains;
    depth_.gains = scenario_.control.depth_gains;
}

void Session::send_command(const proto::CommandMessage& cmd) {
    uplink_.send(state_.t, proto::encode_frame(cmd));
}

void Session::send_log(const std::string& text) {
    std::string clipped = text.substr(0, proto::kMaxPayload);
    downlink_.send(state_.t, proto::encode_frame(proto::LogText{std::move(clipped)}));
    ++log_seq_;
}

void Session::apply(const proto::CommandMessage& cmd, std::vector<std::string>& events) {
    const std::string tag = std::string(proto::to_string(cmd.kind())) + " #" + std::to_string(cmd.seq);
    auto reject = [&](const std::string& why) {
        ++stats_.commands_rejected;
        events.push_back("rejected " + tag + ": " + why);
        send_log("rejected " + tag + ": " + why);
    };

    if (const auto* m = std::get_if<proto::SetMode>(&cmd.payload)) {
        if (m->mode == ControlMode::closed_loop && setpoints_.mode != ControlMode::closed_loop) {
            yaw_.state = {};
            depth_.state = {};
        }
        setpoints_.mode = m->mode;
    } else if (const auto* s = std::get_if<proto::SetSetpoints>(&cmd.payload)) {
        if (!(s->depth_ref >= 0.0 && s->depth_ref <= scenario_.params.max_depth)) {
            reject("depth_ref outside [0, max_depth]");
            return;
        }
        setpoints_.yaw_ref = wrap_angle(s->yaw_ref);
        setpoints_.depth_ref = s->depth_ref;
        setpoints_.surge_duty = clamp(s->surge_duty, -1.0, 1.0);
    } else if (const auto* g = std::get_if<proto::SetGains>(&cmd.payload)) {
        PIGains yaw = yaw_.gains;
        PIGains depth = depth_.gains;
        if (g->yaw) {
            yaw.kp = g->yaw->kp;
            yaw.ki = g->yaw->ki;
        }
        if (g->depth) {
            depth.kp = g->depth->kp;
            depth.ki = g->depth->ki;
        }
        try {
            yaw.validate();
            depth.validate();
        } catch (const InvalidConfig& e) {
            reject(e.what());
            return;
        }
        if (g->alpha && !(*g->alpha >= 0.0 && *g->alpha <= 1.0)) {
            reject("alpha outside [0, 1]");
            return;
        }
        yaw_.gains = yaw;
        depth_.gains = depth;
        if (g->alpha) filter_.alpha = *g->alpha;
    } else if (const auto* d = std::get_if<proto::ManualDuties>(&cmd.payload)) {
        setpoints_.mode = ControlMode::manual;
        setpoints_.manual_duties = d->duties.clamped();
    } else {
        send_log("pong #" + std::to_string(cmd.seq));
    }
    ++stats_.commands_applied;
    events.push_back("applied " + tag);
}

TickRecord Session::tick() {
    TickRecord rec;
    const double dt = kControlDt;
    const auto tick_no = static_cast<long long>(tick_);

    // Uplink: commands take effect in arrival order before this tick's control.
    const auto up = uplink_.receive(state_.t);
    if (!up.empty() || vehicle_rx_.pending() > 0) {
        auto decoded = vehicle_rx_.feed(up);
        for (const auto& err : decoded.errors) {
            ++stats_.uplink_decode_errors;
            rec.events.push_back(std::string("uplink ") + proto::to_string(err.kind));
        }
        for (const auto& msg : decoded.messages)
            if (const auto* cmd = std::get_if<proto::CommandMessage>(&msg)) apply(*cmd, rec.events);
    }

    BodyAccel accel;
    if (tick_ > 0) {
        accel.surge = (state_.u - prev_state_.u) / dt;
        accel.heave = (state_.w - prev_state_.w) / dt;
        accel.lateral = state_.u * state_.r;
    }
    const SensorFrame sensors =
        sample(state_, scenario_.field, scenario_.noise, noise_, scenario_.params, accel);

    if (!filter_started_) {
        filter_.yaw_est = sensors.mag_yaw;
        filter_started_ = true;
    } else {
        filter_ = filter_update(filter_, sensors.gyro_z, sensors.mag_yaw, dt);
    }
    const double depth_est = depth_avg_.push(depth_from_pressure(
        sensors.pressure, scenario_.params.water_density, scenario_.params.gravity));
    const double turbidity = std::max(0.0, voltage_to_ntu(sensors.turbidity_voltage));

    const ControlResult ctl = control_step(setpoints_, filter_.yaw_est, depth_est, yaw_, depth_, dt);
    yaw_ = ctl.yaw;
    depth_ = ctl.depth;

    LogRow& row = rec.row;
    row.truth = state_;
    row.sensors = sensors;
    row.yaw_est = filter_.yaw_est;
    row.depth_est = depth_est;
    row.turbidity_ntu = turbidity;
    row.setpoints = setpoints_;
    row.duties = ctl.duties;
    row.flags = sensor_fault_flags(sensors, depth_est, scenario_.params) |
                (ctl.saturated ? proto::kFlagSaturated : 0);

    proto::TelemetryFrame& tf = rec.telemetry;
    tf.seq = static_cast<std::uint32_t>(tick_);
    tf.t = state_.t;
    tf.yaw_est = filter_.yaw_est;
    tf.depth_est = depth_est;
    tf.turbidity = turbidity;
    tf.duties = ctl.duties;
    tf.mode = setpoints_.mode;
    tf.yaw_gains = {yaw_.gains.kp, yaw_.gains.ki};
    tf.depth_gains = {depth_.gains.kp, depth_.gains.ki};
    tf.flags = row.flags;
    downlink_.send(state_.t, proto::encode_frame(tf));

    const auto down = downlink_.receive(state_.t);
    if (!down.empty() || surface_rx_.pending() > 0) {
        auto decoded = surface_rx_.feed(down);
        stats_.downlink_decode_errors += decoded.errors.size();
        for (auto& msg : decoded.messages) {
            if (std::holds_alternative<proto::TelemetryFrame>(msg)) ++stats_.telemetry_received;
            rec.surface_received.push_back(std::move(msg));
        }
    }

    prev_state_ = state_;
    try {
        for (int i = 0; i < kSubstepsPerTick; ++i)
            state_ = step(state_, ctl.duties, scenario_.params, kSimDt);
    } catch (const SimulationDiverged& e) {
        throw SimulationDiverged(e.what(), tick_no);
    }
    // Keep the clock on the tick grid instead of accumulating substep rounding.
    state_.t = static_cast<double>(tick_ + 1) * kControlDt;
    ++tick_;
    return rec;
}

}  // namespace rov
