#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rov/scenario.hpp"

namespace rov {

/// Everything observed and decided during one control tick. `truth` is the
/// plant state at the start of the tick; `duties` are held for the following
/// kSubstepsPerTick physics steps.
struct LogRow {
    VehicleState truth;
    SensorFrame sensors;
    double yaw_est = 0.0;
    double depth_est = 0.0;
    double turbidity_ntu = 0.0;
    ControlSetpoints setpoints;
    ThrusterDuties duties;
    std::uint8_t flags = 0;
};

struct TickRecord {
    LogRow row;
    proto::TelemetryFrame telemetry;                 // as sent by the vehicle
    std::vector<proto::Message> surface_received;    // downlink output this tick
    std::vector<std::string> events;                 // applied/rejected commands, decode faults
};

struct SessionStats {
    std::uint64_t commands_applied = 0;
    std::uint64_t commands_rejected = 0;
    std::uint64_t uplink_decode_errors = 0;
    std::uint64_t downlink_decode_errors = 0;
    std::uint64_t telemetry_received = 0;
};

/// The simulated vehicle, its onboard computer, and both directions of the
/// tether. Single-threaded: callers serialise send_command() and tick().
class Session {
public:
    explicit Session(Scenario scenario);

    /// Surface side: transmits a command over the uplink at the current time.
    void send_command(const proto::CommandMessage& cmd);

    /// Advances one control tick. Throws SimulationDiverged carrying the tick index.
    TickRecord tick();

    double time() const { return state_.t; }
    std::uint64_t tick_index() const { return tick_; }
    const VehicleState& truth() const { return state_; }
    const ControlSetpoints& setpoints() const { return setpoints_; }
    const PIGains& yaw_gains() const { return yaw_.gains; }
    const PIGains& depth_gains() const { return depth_.gains; }
    double alpha() const { return filter_.alpha; }
    const SessionStats& stats() const { return stats_; }
    const Scenario& scenario() const { return scenario_; }

private:
    void apply(const proto::CommandMessage& cmd, std::vector<std::string>& events);
    void send_log(const std::string& text);

    Scenario scenario_;
    VehicleState state_;
    VehicleState prev_state_;
    SensorNoiseState noise_;
    Link uplink_;
    Link downlink_;
    proto::StreamDecoder vehicle_rx_;
    proto::StreamDecoder surface_rx_;

    FilterState filter_;
    bool filter_started_ = false;
    DepthAverager depth_avg_;
    ControlSetpoints setpoints_;
    AxisController yaw_;
    AxisController depth_;

    std::uint64_t tick_ = 0;
    std::uint32_t log_seq_ = 0;
    SessionStats stats_;
};

}  // namespace rov
