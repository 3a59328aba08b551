#include "rov/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "rov/json_mirror.hpp"
#include "rov/session.hpp"

namespace rov {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

using Bytes = std::vector<std::uint8_t>;

/// Connection handlers push, the simulation thread drains.
class CommandInbox {
public:
    void push(proto::CommandMessage cmd) {
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(cmd));
    }
    std::deque<proto::CommandMessage> drain() {
        std::lock_guard lock(mu_);
        std::deque<proto::CommandMessage> out;
        out.swap(queue_);
        return out;
    }

private:
    std::mutex mu_;
    std::deque<proto::CommandMessage> queue_;
};

class RawClient;
class WsClient;

/// Connection registry. Touched only from the I/O thread.
class Hub {
public:
    Hub(CommandInbox& inbox, std::size_t max_queue) : inbox_(inbox), max_queue_(max_queue) {}

    void add(std::shared_ptr<RawClient> c) { raw_.insert(std::move(c)); }
    void add(std::shared_ptr<WsClient> c) { ws_.insert(std::move(c)); }
    void remove(const std::shared_ptr<RawClient>& c) { raw_.erase(c); }
    void remove(const std::shared_ptr<WsClient>& c) { ws_.erase(c); }

    void broadcast(const std::shared_ptr<const Bytes>& frame,
                   const std::shared_ptr<const std::string>& text);
    void close_all();

    CommandInbox& inbox() { return inbox_; }
    std::size_t max_queue() const { return max_queue_; }

private:
    CommandInbox& inbox_;
    std::size_t max_queue_;
    std::set<std::shared_ptr<RawClient>> raw_;
    std::set<std::shared_ptr<WsClient>> ws_;
};

class RawClient : public std::enable_shared_from_this<RawClient> {
public:
    RawClient(tcp::socket socket, Hub& hub) : socket_(std::move(socket)), hub_(hub) {}

    void start() {
        hub_.add(shared_from_this());
        read();
    }

    void send(std::shared_ptr<const Bytes> frame) {
        if (closed_ || out_.size() >= hub_.max_queue()) return;
        out_.push_back(std::move(frame));
        if (out_.size() == 1) write();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        boost::system::error_code ignored;
        socket_.shutdown(tcp::socket::shutdown_both, ignored);
        socket_.close(ignored);
        hub_.remove(shared_from_this());
    }

private:
    void read() {
        socket_.async_read_some(asio::buffer(buf_), [self = shared_from_this()](
                                                        boost::system::error_code ec, std::size_t n) {
            if (ec) return self->close();
            auto res = self->decoder_.feed(std::span<const std::uint8_t>(self->buf_.data(), n));
            if (!res.errors.empty()) return self->close();
            for (auto& msg : res.messages) {
                auto* cmd = std::get_if<proto::CommandMessage>(&msg);
                if (!cmd) return self->close();
                self->hub_.inbox().push(std::move(*cmd));
            }
            self->read();
        });
    }

    void write() {
        asio::async_write(socket_, asio::buffer(*out_.front()),
                          [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                              if (ec) return self->close();
                              self->out_.pop_front();
                              if (!self->out_.empty()) self->write();
                          });
    }

    tcp::socket socket_;
    Hub& hub_;
    std::array<std::uint8_t, 512> buf_{};
    proto::StreamDecoder decoder_;
    std::deque<std::shared_ptr<const Bytes>> out_;
    bool closed_ = false;
};

class WsClient : public std::enable_shared_from_this<WsClient> {
public:
    WsClient(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

    void start() {
        http::async_read(ws_.next_layer(), http_buf_, req_,
                         [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                             if (!ec) self->on_request();
                         });
    }

    void send(std::shared_ptr<const std::string> text) {
        if (!open_ || out_.size() >= hub_.max_queue()) return;
        out_.push_back(std::move(text));
        if (out_.size() == 1) write();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        open_ = false;
        boost::system::error_code ignored;
        ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
        ws_.next_layer().close(ignored);
        hub_.remove(shared_from_this());
    }

private:
    void on_request() {
        if (!websocket::is_upgrade(req_) || req_.target() != "/ws") {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found,
                                                                           req_.version());
            res->set(http::field::content_type, "text/plain");
            res->body() = "websocket endpoint is /ws\n";
            res->prepare_payload();
            http::async_write(ws_.next_layer(), *res,
                              [self = shared_from_this(), res](boost::system::error_code, std::size_t) {
                                  boost::system::error_code ignored;
                                  self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
                              });
            return;
        }
        ws_.text(true);
        ws_.async_accept(req_, [self = shared_from_this()](boost::system::error_code ec) {
            if (ec) return;
            self->open_ = true;
            self->hub_.add(self);
            self->read();
        });
    }

    void read() {
        ws_.async_read(read_buf_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
            if (ec) return self->close();
            const std::string text = beast::buffers_to_string(self->read_buf_.data());
            self->read_buf_.consume(self->read_buf_.size());
            try {
                const json j = json::parse(text);
                if (!j.is_object() || j.value("type", "") != "command")
                    throw InvalidInput("expected a command object");
                self->hub_.inbox().push(json_mirror::command_from_json(j));
            } catch (const std::exception&) {
                return self->close();
            }
            self->read();
        });
    }

    void write() {
        ws_.async_write(asio::buffer(*out_.front()),
                        [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                            if (ec) return self->close();
                            self->out_.pop_front();
                            if (!self->out_.empty()) self->write();
                        });
    }

    websocket::stream<tcp::socket> ws_;
    Hub& hub_;
    beast::flat_buffer http_buf_;
    http::request<http::string_body> req_;
    beast::flat_buffer read_buf_;
    std::deque<std::shared_ptr<const std::string>> out_;
    bool open_ = false;
    bool closed_ = false;
};

void Hub::broadcast(const std::shared_ptr<const Bytes>& frame,
                    const std::shared_ptr<const std::string>& text) {
    // Copies: send() may remove a failed client from the set.
    for (auto c : std::vector(raw_.begin(), raw_.end())) c->send(frame);
    for (auto c : std::vector(ws_.begin(), ws_.end())) c->send(text);
}

void Hub::close_all() {
    for (auto c : std::vector(raw_.begin(), raw_.end())) c->close();
    for (auto c : std::vector(ws_.begin(), ws_.end())) c->close();
}

template <typename Client>
void accept_loop(tcp::acceptor& acceptor, Hub& hub) {
    acceptor.async_accept([&acceptor, &hub](boost::system::error_code ec, tcp::socket socket) {
        if (ec == asio::error::operation_aborted || !acceptor.is_open()) return;
        if (!ec) std::make_shared<Client>(std::move(socket), hub)->start();
        accept_loop<Client>(acceptor, hub);
    });
}

json bridge_json(const proto::Message& msg, const LogRow& row, const Session& session) {
    json j = json_mirror::to_json(msg);
    if (!std::holds_alternative<proto::TelemetryFrame>(msg)) return j;
    const auto& sp = row.setpoints;
    j["setpoints"] = {{"yaw_ref", sp.yaw_ref}, {"depth_ref", sp.depth_ref}, {"surge_duty", sp.surge_duty}};
    j["alpha"] = session.alpha();
    const auto& s = row.truth;
    j["truth"] = {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"depth", s.depth}, {"yaw", s.yaw},
                  {"u", s.u}, {"w", s.w}, {"r", s.r}};
    return j;
}

}  // namespace

struct Server::Impl {
    Impl(Scenario sc, ServeOptions opts)
        : scenario(std::move(sc)), options(std::move(opts)), hub(inbox, options.max_client_queue) {}

    void sim_loop();

    Scenario scenario;
    ServeOptions options;
    CommandInbox inbox;
    asio::io_context io;
    Hub hub;  // declared after io
    std::optional<tcp::acceptor> raw_acceptor;
    std::optional<tcp::acceptor> ws_acceptor;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    std::thread io_thread;
    std::thread sim_thread;

    std::atomic<bool> stop_requested{false};
    std::atomic<std::uint64_t> ticks{0};
    std::atomic<std::uint64_t> dropped{0};
    std::atomic<int> pending_broadcasts{0};

    std::mutex done_mu;
    std::condition_variable done_cv;
    bool done = false;
    std::string failure;
    bool started = false;
};

void Server::Impl::sim_loop() {
    constexpr int kMaxPendingBroadcasts = 64;
    Session session(scenario);
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(kControlDt));
    auto next = std::chrono::steady_clock::now();

    while (!stop_requested) {
        if (options.duration && session.time() > *options.duration + 1e-9) break;
        for (auto& cmd : inbox.drain()) session.send_command(cmd);

        TickRecord rec;
        try {
            rec = session.tick();
        } catch (const std::exception& e) {
            std::lock_guard lock(done_mu);
            failure = e.what();
            break;
        }
        ++ticks;

        for (const auto& msg : rec.surface_received) {
            if (pending_broadcasts.load() >= kMaxPendingBroadcasts) {
                ++dropped;
                continue;
            }
            auto frame = std::make_shared<const Bytes>(proto::encode_frame(msg));
            auto text = std::make_shared<const std::string>(bridge_json(msg, rec.row, session).dump());
            ++pending_broadcasts;
            asio::post(io, [this, frame, text] {
                --pending_broadcasts;
                hub.broadcast(frame, text);
            });
        }

        if (options.realtime) {
            next += period;
            std::this_thread::sleep_until(next);
        } else {
            std::this_thread::yield();
        }
    }

    std::lock_guard lock(done_mu);
    done = true;
    done_cv.notify_all();
}

Server::Server(Scenario scenario, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {
    impl_->scenario.validate();
}

Server::~Server() { stop(); }

void Server::start() {
    auto& im = *impl_;
    if (im.started) return;
    const auto address = asio::ip::make_address(im.options.bind_address);
    auto open = [&](std::uint16_t port, const char* what) {
        try {
            tcp::acceptor acc(im.io);
            const tcp::endpoint ep(address, port);
            acc.open(ep.protocol());
            acc.set_option(asio::socket_base::reuse_address(true));
            acc.bind(ep);
            acc.listen();
            return acc;
        } catch (const boost::system::system_error& e) {
            throw Error(std::string("cannot listen on ") + what + " port " + std::to_string(port) +
                        ": " + e.what());
        }
    };
    im.raw_acceptor.emplace(open(im.options.tcp_port, "tcp"));
    im.ws_acceptor.emplace(open(im.options.ws_port, "websocket"));
    accept_loop<RawClient>(*im.raw_acceptor, im.hub);
    accept_loop<WsClient>(*im.ws_acceptor, im.hub);

    im.work.emplace(asio::make_work_guard(im.io));
    im.io_thread = std::thread([&im] { im.io.run(); });
    im.sim_thread = std::thread([&im] { im.sim_loop(); });
    im.started = true;
}

void Server::stop() {
    if (!impl_ || !impl_->started) return;
    auto& im = *impl_;
    im.stop_requested = true;
    if (im.sim_thread.joinable()) im.sim_thread.join();
    asio::post(im.io, [&im] {
        boost::system::error_code ignored;
        im.raw_acceptor->close(ignored);
        im.ws_acceptor->close(ignored);
        im.hub.close_all();
    });
    im.work.reset();
    im.io.stop();
    if (im.io_thread.joinable()) im.io_thread.join();
    im.started = false;
}

void Server::wait() {
    auto& im = *impl_;
    std::unique_lock lock(im.done_mu);
    im.done_cv.wait(lock, [&im] { return im.done; });
}

bool Server::wait_for(std::chrono::milliseconds timeout) {
    auto& im = *impl_;
    std::unique_lock lock(im.done_mu);
    return im.done_cv.wait_for(lock, timeout, [&im] { return im.done; });
}

std::string Server::failure() const {
    std::lock_guard lock(impl_->done_mu);
    return impl_->failure;
}

std::uint16_t Server::tcp_port() const { return impl_->raw_acceptor->local_endpoint().port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_acceptor->local_endpoint().port(); }
std::uint64_t Server::ticks() const { return impl_->ticks; }
std::uint64_t Server::frames_dropped() const { return impl_->dropped; }

namespace {
std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }
}  // namespace

void serve(const Scenario& scenario, const ServeOptions& options) {
    Server server(scenario, options);
    server.start();
    std::cerr << "rov: serving '" << scenario.name << "' raw tcp on " << options.bind_address << ':'
              << server.tcp_port() << ", websocket on ws://" << options.bind_address << ':'
              << server.ws_port() << "/ws" << (options.realtime ? " (realtime)" : "") << '\n';

    g_interrupted = false;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    while (!server.wait_for(std::chrono::milliseconds(100)) && !g_interrupted) {
    }
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    server.stop();
    if (!server.failure().empty()) throw SimulationDiverged(server.failure());
}

}  // namespace rov
