#pragma once

#include <cstdint>

#include "rov/dynamics.hpp"

namespace rov {

struct PIGains {
    double kp = 0.0;
    double ki = 0.0;
    double out_min = -1.0;
    double out_max = 1.0;
    double integral_limit = 0.5;

    void validate() const;
    bool operator==(const PIGains&) const = default;

    static PIGains default_yaw() { return {0.8, 0.1, -1.0, 1.0, 0.5}; }
    // Integral authority must cover the ~0.24 duty needed to hold depth against
    // net buoyancy: ki * integral_limit = 0.3.
    static PIGains default_depth() { return {0.6, 0.15, -1.0, 1.0, 2.0}; }
};

struct PIState {
    double integral = 0.0;
    double last_t = 0.0;
};

struct PIResult {
    double output = 0.0;
    PIState state;
    bool saturated = false;
};

/// Proportional-integral step with a clamped integrator and conditional
/// anti-windup: the integrator holds while the output is saturated and the
/// error pushes further into the limit.
PIResult pi_step(const PIGains& gains, const PIState& st, double error, double dt);

enum class ControlMode : std::uint8_t { manual = 0, closed_loop = 1 };

struct ControlSetpoints {
    ControlMode mode = ControlMode::manual;
    double yaw_ref = 0.0;     // rad
    double depth_ref = 0.0;   // m
    double surge_duty = 0.0;  // [-1, 1]
    ThrusterDuties manual_duties;

    bool operator==(const ControlSetpoints&) const = default;
};

struct AxisController {
    PIGains gains;
    PIState state;
};

struct ControlResult {
    ThrusterDuties duties;
    AxisController yaw;
    AxisController depth;
    bool saturated = false;
};

ControlResult control_step(const ControlSetpoints& sp, double yaw_est, double depth_est,
                           const AxisController& yaw, const AxisController& depth, double dt);

}  // namespace rov
