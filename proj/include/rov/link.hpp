#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

namespace rov {

/// Tether impairments. All default to a perfect link.
struct LinkConfig {
    double latency_ms = 0.0;
    double drop_prob = 0.0;     // per message
    double corrupt_prob = 0.0;  // per byte, flips one random bit

    bool impaired() const { return latency_ms > 0.0 || drop_prob > 0.0 || corrupt_prob > 0.0; }
    void validate() const;
};

/// One direction of the emulated tether. Messages are byte blobs stamped with
/// the simulation time they were sent; delivery preserves send order.
class Link {
public:
    Link(const LinkConfig& cfg, std::uint64_t seed);

    void send(double now, std::vector<std::uint8_t> bytes);
    /// All bytes whose delivery time is <= now, concatenated in send order.
    std::vector<std::uint8_t> receive(double now);

    std::size_t in_flight() const { return queue_.size(); }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t corrupted_bytes() const { return corrupted_; }

private:
    struct Pending {
        std::int64_t due_us;
        std::vector<std::uint8_t> bytes;
    };

    LinkConfig cfg_;
    std::mt19937_64 rng_;
    std::deque<Pending> queue_;
    std::uint64_t dropped_ = 0;
    std::uint64_t corrupted_ = 0;
};

}  // namespace rov
