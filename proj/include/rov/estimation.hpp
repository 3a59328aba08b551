#pragma once

#include <array>
#include <cstddef>

#include "rov/common.hpp"

namespace rov {

inline constexpr double kDefaultFilterAlpha = 0.98;

/// Yaw complementary filter state. alpha weights the gyro-propagated estimate.
struct FilterState {
    double yaw_est = 0.0;
    double alpha = kDefaultFilterAlpha;
};

/// Blends the gyro-propagated heading with the magnetometer heading along the
/// shortest arc between them. Throws InvalidConfig for alpha outside [0, 1].
FilterState filter_update(const FilterState& fs, double gyro_z, double mag_yaw, double dt);

/// Depth estimate: plain moving average over the last N pressure-derived depths.
class DepthAverager {
public:
    static constexpr std::size_t kWindow = 5;

    double push(double depth);
    double value() const;
    std::size_t size() const { return count_; }

private:
    std::array<double, kWindow> buf_{};
    std::size_t next_ = 0;
    std::size_t count_ = 0;
};

}  // namespace rov
