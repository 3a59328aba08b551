#include "rov/estimation.hpp"

#include <cmath>

namespace rov {

FilterState filter_update(const FilterState& fs, double gyro_z, double mag_yaw, double dt) {
    if (!(fs.alpha >= 0.0 && fs.alpha <= 1.0))
        throw InvalidConfig("complementary filter: alpha must be in [0, 1]");
    if (!(dt > 0.0)) throw InvalidInput("complementary filter: dt must be > 0");
    if (!std::isfinite(gyro_z) || !std::isfinite(mag_yaw) || !std::isfinite(fs.yaw_est))
        throw InvalidInput("complementary filter: non-finite input");

    FilterState out = fs;
    if (fs.alpha == 0.0) {
        out.yaw_est = wrap_angle(mag_yaw);
        return out;
    }
    const double predicted = wrap_angle(fs.yaw_est + gyro_z * dt);
    out.yaw_est = wrap_angle(predicted + (1.0 - fs.alpha) * angle_diff(mag_yaw, predicted));
    return out;
}

double DepthAverager::push(double depth) {
    buf_[next_] = depth;
    next_ = (next_ + 1) % kWindow;
    if (count_ < kWindow) ++count_;
    return value();
}

double DepthAverager::value() const {
    if (count_ == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < count_; ++i) sum += buf_[i];
    return sum / static_cast<double>(count_);
}

}  // namespace rov
