#include "rov/dynamics.hpp"

#include <cmath>

namespace rov {

void VehicleParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidConfig(std::string("vehicle params: ") + what);
    };
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(std::isfinite(yaw_inertia) && yaw_inertia > 0.0, "yaw_inertia must be > 0");
    require(std::isfinite(thruster_arm) && thruster_arm > 0.0, "thruster_arm must be > 0");
    require(drag_surge >= 0.0 && drag_heave >= 0.0 && drag_yaw >= 0.0,
            "drag coefficients must be >= 0");
    require(std::isfinite(drag_surge) && std::isfinite(drag_heave) && std::isfinite(drag_yaw),
            "drag coefficients must be finite");
    require(std::isfinite(max_depth) && max_depth > 0.0, "max_depth must be > 0");
    require(std::isfinite(max_thrust_per_motor) && max_thrust_per_motor >= 0.0,
            "max_thrust_per_motor must be >= 0");
    require(thrust_deadband >= 0.0 && thrust_deadband < 1.0, "thrust_deadband must be in [0, 1)");
    require(std::isfinite(buoyant_force) && buoyant_force >= 0.0, "buoyant_force must be >= 0");
    require(std::isfinite(gravity) && gravity > 0.0, "gravity must be > 0");
    require(std::isfinite(water_density) && water_density > 0.0, "water_density must be > 0");
}

double duty_to_thrust(double duty, const VehicleParams& params) {
    if (!std::isfinite(duty)) throw InvalidInput("duty_to_thrust: duty is not finite");
    const double mag = std::min(std::fabs(duty), 1.0);
    if (mag < params.thrust_deadband) return 0.0;
    const double thrust =
        params.max_thrust_per_motor * (mag - params.thrust_deadband) / (1.0 - params.thrust_deadband);
    return duty < 0.0 ? -thrust : thrust;
}

BodyForces net_forces(const VehicleState& s, const ThrusterDuties& duties,
                      const VehicleParams& p) {
    const double left = duty_to_thrust(duties.left, p);
    const double right = duty_to_thrust(duties.right, p);
    const double vertical = duty_to_thrust(duties.vertical, p);

    BodyForces f;
    f.surge = left + right - p.drag_surge * s.u * std::fabs(s.u);
    f.heave = p.weight_force() - p.buoyant_force + vertical - p.drag_heave * s.w * std::fabs(s.w);
    f.yaw = (left - right) * p.thruster_arm - p.drag_yaw * s.r * std::fabs(s.r);
    return f;
}

VehicleState step(const VehicleState& s, const ThrusterDuties& duties, const VehicleParams& p,
                  double dt) {
    if (!(dt > 0.0 && dt <= 0.02)) throw InvalidInput("step: dt must be in (0, 0.02]");
    const BodyForces f = net_forces(s, duties.clamped(), p);

    VehicleState n = s;
    n.t = s.t + dt;
    n.u = s.u + f.surge / p.mass * dt;
    n.w = s.w + f.heave / p.mass * dt;
    n.r = s.r + f.yaw / p.yaw_inertia * dt;

    n.x = s.x + n.u * std::cos(s.yaw) * dt;
    n.y = s.y + n.u * std::sin(s.yaw) * dt;
    n.depth = s.depth + n.w * dt;
    n.yaw = wrap_angle(s.yaw + n.r * dt);

    if (n.depth < 0.0) {
        n.depth = 0.0;
        n.w = std::max(n.w, 0.0);
    } else if (n.depth > p.max_depth) {
        n.depth = p.max_depth;
        n.w = std::min(n.w, 0.0);
    }

    const bool finite = std::isfinite(n.x) && std::isfinite(n.y) && std::isfinite(n.depth) &&
                        std::isfinite(n.yaw) && std::isfinite(n.u) && std::isfinite(n.w) &&
                        std::isfinite(n.r);
    if (!finite) throw SimulationDiverged("step: non-finite state at t = " + std::to_string(n.t));
    return n;
}

}  // namespace rov
