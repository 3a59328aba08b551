#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "rov/dynamics.hpp"

namespace rov {

struct SensorFrame {
    double t = 0.0;
    double gyro_z = 0.0;                      // rad/s
    std::array<double, 3> accel_xyz{};        // m/s^2, body frame, z down
    double mag_yaw = 0.0;                     // rad
    double pressure = kAtmosphericPressure;   // Pa, absolute
    double turbidity_voltage = 0.0;           // V

    bool operator==(const SensorFrame&) const = default;
};

struct NoiseConfig {
    double gyro_sigma = 0.005;        // rad/s
    double gyro_bias_walk = 0.0005;   // rad/s per sqrt(s)
    double mag_sigma = 0.01;          // rad
    double pressure_sigma = 20.0;     // Pa
    double turbidity_sigma = 0.01;    // V
    std::uint64_t seed = 1;

    static NoiseConfig none() { return {0.0, 0.0, 0.0, 0.0, 0.0, 1}; }
    void validate() const;
};

/// Affine turbidity field over position: ntu = base + gx*x + gy*y + gz*depth,
/// floored at 0. "constant" and "linear_depth" are the two named presets.
struct TurbidityField {
    double base_ntu = 5.0;
    double gradient_x = 0.0;      // NTU/m
    double gradient_y = 0.0;      // NTU/m
    double gradient_depth = 0.0;  // NTU/m

    static TurbidityField constant(double ntu) { return {ntu, 0.0, 0.0, 0.0}; }
    static TurbidityField linear_depth(double surface_ntu, double ntu_per_m) {
        return {surface_ntu, 0.0, 0.0, ntu_per_m};
    }

    double at(double x, double y, double depth) const;
};

/// Caller-owned random stream plus the gyro bias random walk it drives.
struct SensorNoiseState {
    std::mt19937_64 engine;
    double gyro_bias = 0.0;
    double last_t = 0.0;
    bool started = false;

    explicit SensorNoiseState(std::uint64_t seed) : engine(seed) {}
};

/// Ground-truth body acceleration fed to the accelerometer channel.
struct BodyAccel {
    double surge = 0.0;
    double lateral = 0.0;
    double heave = 0.0;
};

/// Emulated sensor readout of `state`. The accelerometer reports specific
/// force (body acceleration minus gravity, z down) and is noise-free.
/// Throws InvalidInput if state.t does not advance past the previous sample.
SensorFrame sample(const VehicleState& state, const TurbidityField& field, const NoiseConfig& noise,
                   SensorNoiseState& rng, const VehicleParams& params = {},
                   const BodyAccel& accel = {});

/// Hydrostatic depth relative to atmospheric pressure. Not clamped.
double depth_from_pressure(double pressure, double water_density, double gravity);

/// Turbidity probe transfer curve: V = 4.2 - 0.0008 * NTU, clamped to [0, 4.2].
double ntu_to_voltage(double ntu);
/// Inverse of the affine curve. Accepts v in [0, 5]; readings above 4.2 V give
/// negative NTU, which callers floor for display.
double voltage_to_ntu(double v);

inline constexpr double kTurbidityClearVoltage = 4.2;
inline constexpr double kTurbidityVoltsPerNtu = 0.0008;

}  // namespace rov
