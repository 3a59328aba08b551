#include "rov/link.hpp"

#include <cmath>

#include "rov/common.hpp"

namespace rov {
namespace {

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

void LinkConfig::validate() const {
    if (!(latency_ms >= 0.0 && std::isfinite(latency_ms)))
        throw InvalidConfig("link: latency_ms must be >= 0");
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw InvalidConfig("link: drop_prob must be in [0, 1]");
    if (!(corrupt_prob >= 0.0 && corrupt_prob <= 1.0))
        throw InvalidConfig("link: corrupt_prob must be in [0, 1]");
}

Link::Link(const LinkConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

void Link::send(double now, std::vector<std::uint8_t> bytes) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (cfg_.drop_prob > 0.0 && uniform(rng_) < cfg_.drop_prob) {
        ++dropped_;
        return;
    }
    if (cfg_.corrupt_prob > 0.0) {
        std::uniform_int_distribution<int> bit(0, 7);
        for (auto& b : bytes) {
            if (uniform(rng_) < cfg_.corrupt_prob) {
                b ^= static_cast<std::uint8_t>(1u << bit(rng_));
                ++corrupted_;
            }
        }
    }
    queue_.push_back({to_us(now) + std::llround(cfg_.latency_ms * 1e3), std::move(bytes)});
}

std::vector<std::uint8_t> Link::receive(double now) {
    std::vector<std::uint8_t> out;
    const std::int64_t now_us = to_us(now);
    while (!queue_.empty() && queue_.front().due_us <= now_us) {
        auto& front = queue_.front().bytes;
        out.insert(out.end(), front.begin(), front.end());
        queue_.pop_front();
    }
    return out;
}

}  // namespace rov
