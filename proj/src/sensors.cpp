#include "rov/sensors.hpp"

#include <cmath>

namespace rov {

void NoiseConfig::validate() const {
    const bool ok = gyro_sigma >= 0.0 && gyro_bias_walk >= 0.0 && mag_sigma >= 0.0 &&
                    pressure_sigma >= 0.0 && turbidity_sigma >= 0.0;
    if (!ok) throw InvalidConfig("noise: all sigmas must be >= 0");
}

double TurbidityField::at(double x, double y, double depth) const {
    return std::max(0.0, base_ntu + gradient_x * x + gradient_y * y + gradient_depth * depth);
}

SensorFrame sample(const VehicleState& s, const TurbidityField& field, const NoiseConfig& noise,
                   SensorNoiseState& rng, const VehicleParams& params, const BodyAccel& accel) {
    if (rng.started && !(s.t > rng.last_t))
        throw InvalidInput("sample: time must strictly increase between frames");

    std::normal_distribution<double> unit(0.0, 1.0);
    // Fixed draw order keeps the stream aligned regardless of which sigmas are zero.
    const double n_bias = unit(rng.engine);
    const double n_gyro = unit(rng.engine);
    const double n_mag = unit(rng.engine);
    const double n_pressure = unit(rng.engine);
    const double n_turbidity = unit(rng.engine);

    if (rng.started) rng.gyro_bias += noise.gyro_bias_walk * std::sqrt(s.t - rng.last_t) * n_bias;
    rng.started = true;
    rng.last_t = s.t;

    SensorFrame f;
    f.t = s.t;
    f.gyro_z = s.r + rng.gyro_bias + noise.gyro_sigma * n_gyro;
    f.accel_xyz = {accel.surge, accel.lateral, accel.heave - params.gravity};
    f.mag_yaw = wrap_angle(s.yaw + noise.mag_sigma * n_mag);
    f.pressure = std::max(0.0, kAtmosphericPressure +
                                   params.water_density * params.gravity * s.depth +
                                   noise.pressure_sigma * n_pressure);
    f.turbidity_voltage = clamp(ntu_to_voltage(field.at(s.x, s.y, s.depth)) +
                                    noise.turbidity_sigma * n_turbidity,
                                0.0, 5.0);
    return f;
}

double depth_from_pressure(double pressure, double water_density, double gravity) {
    if (!(water_density > 0.0) || !(gravity > 0.0))
        throw InvalidInput("depth_from_pressure: density and gravity must be > 0");
    if (!std::isfinite(pressure)) throw InvalidInput("depth_from_pressure: pressure is not finite");
    return (pressure - kAtmosphericPressure) / (water_density * gravity);
}

double ntu_to_voltage(double ntu) {
    if (!(ntu >= 0.0)) throw InvalidInput("ntu_to_voltage: ntu must be >= 0");
    return clamp(kTurbidityClearVoltage - kTurbidityVoltsPerNtu * ntu, 0.0, kTurbidityClearVoltage);
}

double voltage_to_ntu(double v) {
    if (!(v >= 0.0 && v <= 5.0)) throw InvalidInput("voltage_to_ntu: voltage must be in [0, 5]");
    return (kTurbidityClearVoltage - v) / kTurbidityVoltsPerNtu;
}

}  // namespace rov
