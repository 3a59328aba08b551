#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rov/session.hpp"

namespace rov {

struct RunLog {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<LogRow> rows;  // one per control tick, t = k * kControlDt
    SessionStats stats;
    std::vector<std::string> events;  // "t=...: <event>"
};

/// Runs the scenario for floor(duration / kControlDt) + 1 ticks, delivering
/// script commands over the emulated uplink at their scheduled times.
/// Throws SimulationDiverged (with tick index) or ScenarioError.
RunLog run_scenario(const Scenario& scenario);

void write_csv(const RunLog& log, std::ostream& out);
std::string to_csv(const RunLog& log);

enum class StepChannel { yaw, depth };

inline constexpr double kNeverSettled = std::numeric_limits<double>::infinity();

struct StepMetrics {
    double settling_time = kNeverSettled;  // s after the step; infinity if never settled
    double overshoot = 0.0;                // % of step magnitude
    double sse = 0.0;                      // mean error over the final 10% of the window
    double step_time = 0.0;
    double magnitude = 0.0;
};

/// Generic step-response metrics over a sampled trace. Samples before
/// step_time are ignored. `angular` wraps errors onto the circle.
StepMetrics step_response_metrics(std::span<const double> times, std::span<const double> values,
                                  double step_time, double initial, double target, double band,
                                  bool angular = false);

/// Settling band default: 2% of the step, floored at 0.5 deg (yaw) or 0.01 m (depth).
double default_settling_band(StepChannel channel, double magnitude);

/// Metrics for the setpoint step on `channel` at step_time, measured on the
/// ground-truth response until the next setpoint change on that channel.
/// `band` overrides the default settling band.
StepMetrics compute_step_metrics(const RunLog& log, StepChannel channel, double step_time,
                                 std::optional<double> band = std::nullopt);

/// Times at which the channel's setpoint changes while in closed-loop mode.
std::vector<double> detect_steps(const RunLog& log, StepChannel channel);

/// Re-integrates the logged duties through the dynamics alone, starting from
/// the first row's ground truth. Returns one state per row.
std::vector<VehicleState> replay_duties(const RunLog& log, const VehicleParams& params);

const char* to_string(StepChannel channel);

}  // namespace rov
