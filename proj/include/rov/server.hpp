#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "rov/scenario.hpp"

namespace rov {

struct ServeOptions {
    std::string bind_address = "127.0.0.1";
    std::uint16_t tcp_port = 7700;  // 0 picks an ephemeral port
    std::uint16_t ws_port = 7780;
    bool realtime = false;                 // lock ticks to the wall clock
    std::optional<double> duration;        // simulated seconds; run until stop() when unset
    std::size_t max_client_queue = 256;    // per-connection outbound messages before dropping
};

/// Live session server: one simulation thread (the single writer of session
/// state) and one I/O thread owning every connection. Telemetry is streamed
/// to raw-protocol clients on the TCP port and mirrored as JSON to WebSocket
/// clients at /ws. Commands from any client are applied in arrival order.
class Server {
public:
    Server(Scenario scenario, ServeOptions options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds both listeners and starts the threads. Throws Error if a port is busy.
    void start();
    void stop();
    /// Blocks until the simulation finishes (duration reached) or stop() is called.
    void wait();
    /// True once the simulation loop has finished.
    bool wait_for(std::chrono::milliseconds timeout);
    /// Error text if the simulation loop died (e.g. divergence), else empty.
    std::string failure() const;

    std::uint16_t tcp_port() const;
    std::uint16_t ws_port() const;
    std::uint64_t ticks() const;
    std::uint64_t frames_dropped() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Blocking entry point used by the CLI: runs until SIGINT/SIGTERM or the
/// optional duration elapses.
void serve(const Scenario& scenario, const ServeOptions& options);

}  // namespace rov
