#include "rov/control.hpp"

#include <cmath>

namespace rov {

void PIGains::validate() const {
    if (!(kp >= 0.0 && ki >= 0.0)) throw InvalidConfig("PI gains: kp and ki must be >= 0");
    if (!(out_min < out_max)) throw InvalidConfig("PI gains: out_min must be < out_max");
    if (!(integral_limit >= 0.0)) throw InvalidConfig("PI gains: integral_limit must be >= 0");
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(integral_limit))
        throw InvalidConfig("PI gains: non-finite value");
}

PIResult pi_step(const PIGains& g, const PIState& st, double error, double dt) {
    g.validate();
    if (!(dt > 0.0)) throw InvalidInput("pi_step: dt must be > 0");
    if (!std::isfinite(error)) throw InvalidInput("pi_step: error is not finite");

    double integral = clamp(st.integral + error * dt, -g.integral_limit, g.integral_limit);
    double raw = g.kp * error + g.ki * integral;
    const bool pushing_high = raw > g.out_max && error > 0.0;
    const bool pushing_low = raw < g.out_min && error < 0.0;
    if (pushing_high || pushing_low) {
        integral = clamp(st.integral, -g.integral_limit, g.integral_limit);
        raw = g.kp * error + g.ki * integral;
    }

    PIResult res;
    res.output = clamp(raw, g.out_min, g.out_max);
    res.saturated = raw != res.output;
    res.state.integral = integral;
    res.state.last_t = st.last_t + dt;
    return res;
}

ControlResult control_step(const ControlSetpoints& sp, double yaw_est, double depth_est,
                           const AxisController& yaw, const AxisController& depth, double dt) {
    ControlResult res;
    res.yaw = yaw;
    res.depth = depth;

    if (sp.mode == ControlMode::manual) {
        res.duties = sp.manual_duties.clamped();
        res.saturated = std::fabs(res.duties.left) == 1.0 || std::fabs(res.duties.right) == 1.0 ||
                        std::fabs(res.duties.vertical) == 1.0;
        return res;
    }

    const PIResult yaw_pi = pi_step(yaw.gains, yaw.state, angle_diff(sp.yaw_ref, yaw_est), dt);
    const PIResult depth_pi = pi_step(depth.gains, depth.state, sp.depth_ref - depth_est, dt);
    res.yaw.state = yaw_pi.state;
    res.depth.state = depth_pi.state;

    const double left = sp.surge_duty + yaw_pi.output;
    const double right = sp.surge_duty - yaw_pi.output;
    res.duties.left = clamp(left, -1.0, 1.0);
    res.duties.right = clamp(right, -1.0, 1.0);
    res.duties.vertical = clamp(depth_pi.output, -1.0, 1.0);
    res.saturated = yaw_pi.saturated || depth_pi.saturated || res.duties.left != left ||
                    res.duties.right != right;
    return res;
}

}  // namespace rov
