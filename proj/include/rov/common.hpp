#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rov {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kAtmosphericPressure = 101325.0;  // Pa

/// Physics step used by the simulator and the control period built on top of it.
inline constexpr double kSimDt = 0.005;
inline constexpr int kSubstepsPerTick = 4;
inline constexpr double kControlDt = kSimDt * kSubstepsPerTick;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class SimulationDiverged : public Error {
public:
    explicit SimulationDiverged(const std::string& what, long long tick = -1)
        : Error(tick >= 0 ? what + " (tick " + std::to_string(tick) + ")" : what), tick_(tick) {}
    /// Control tick at which the run diverged, or -1 when raised outside a run.
    long long tick() const noexcept { return tick_; }

private:
    long long tick_;
};

class EncodingError : public Error {
public:
    EncodingError(std::string field, const std::string& what)
        : Error("cannot encode '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

/// Wraps an angle to (-pi, pi]. Identity inside the range, and odd
/// (wrap(-a) == -wrap(a)) away from the +-pi seam.
inline double wrap_angle(double a) {
    if (a > -kPi && a <= kPi) return a;
    double r = a - 2.0 * kPi * std::round(a / (2.0 * kPi));
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

/// Shortest signed angular distance from `from` to `to`, in (-pi, pi].
inline double angle_diff(double to, double from) { return wrap_angle(to - from); }

inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace rov
