#pragma once

#include "rov/common.hpp"

namespace rov {

/// Physical constants of the vehicle. Defaults describe the 1.6 kg open-frame ROV.
struct VehicleParams {
    double mass = 1.6;                 // kg
    double buoyant_force = 16.7;       // N
    double max_thrust_per_motor = 5.0; // N
    double thrust_deadband = 0.05;     // duty
    double drag_surge = 110.0;         // N s^2/m^2
    double drag_heave = 40.0;          // N s^2/m^2
    double drag_yaw = 2.0;             // N m s^2/rad^2
    double yaw_inertia = 0.02;         // kg m^2
    double thruster_arm = 0.13;        // m
    double gravity = 9.81;             // m/s^2
    double water_density = 1000.0;     // kg/m^3
    double max_depth = 20.0;           // m

    double weight_force() const { return mass * gravity; }

    /// Throws InvalidConfig naming the first violated constraint.
    void validate() const;
};

struct VehicleState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;  // positive down
    double yaw = 0.0;    // (-pi, pi]
    double u = 0.0;      // body surge velocity
    double w = 0.0;      // heave velocity, positive down
    double r = 0.0;      // yaw rate

    bool operator==(const VehicleState&) const = default;
};

/// Signed PWM duties, each in [-1, 1].
struct ThrusterDuties {
    double left = 0.0;
    double right = 0.0;
    double vertical = 0.0;

    ThrusterDuties clamped() const {
        return {clamp(left, -1.0, 1.0), clamp(right, -1.0, 1.0), clamp(vertical, -1.0, 1.0)};
    }
    bool operator==(const ThrusterDuties&) const = default;
};

struct BodyForces {
    double surge = 0.0;  // N
    double heave = 0.0;  // N, positive down
    double yaw = 0.0;    // N m
};

/// Piecewise-linear odd thrust curve: zero inside the deadband, linear up to
/// max_thrust_per_motor at |duty| = 1.
double duty_to_thrust(double duty, const VehicleParams& params);

BodyForces net_forces(const VehicleState& state, const ThrusterDuties& duties,
                      const VehicleParams& params);

/// One semi-implicit Euler step. dt must lie in (0, 0.02].
/// Throws SimulationDiverged if the result is not finite.
VehicleState step(const VehicleState& state, const ThrusterDuties& duties,
                  const VehicleParams& params, double dt);

}  // namespace rov
