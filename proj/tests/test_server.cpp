#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <thread>

#include "rov/json_mirror.hpp"
#include "rov/server.hpp"

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::ip::tcp;
using nlohmann::json;
using namespace rov;

namespace {

ServeOptions test_options() {
    ServeOptions o;
    o.tcp_port = 0;
    o.ws_port = 0;
    o.realtime = true;
    return o;
}

struct RawClient {
    asio::io_context io;
    tcp::socket sock{io};
    proto::StreamDecoder rx;

    explicit RawClient(std::uint16_t port) {
        sock.connect({asio::ip::make_address("127.0.0.1"), port});
    }

    void send(const proto::Message& msg) { asio::write(sock, asio::buffer(proto::encode_frame(msg))); }

    /// Reads until pred accepts a message or the deadline passes.
    template <class Pred>
    bool read_until(Pred pred, std::chrono::seconds limit = std::chrono::seconds(10)) {
        const auto deadline = std::chrono::steady_clock::now() + limit;
        std::array<std::uint8_t, 512> buf{};
        while (std::chrono::steady_clock::now() < deadline) {
            boost::system::error_code ec;
            const std::size_t n = sock.read_some(asio::buffer(buf), ec);
            if (ec) return false;
            for (const auto& m : rx.feed(std::span(buf.data(), n)).messages)
                if (pred(m)) return true;
        }
        return false;
    }
};

struct WsClient {
    asio::io_context io;
    websocket::stream<tcp::socket> ws{io};

    explicit WsClient(std::uint16_t port) {
        ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
        ws.handshake("127.0.0.1", "/ws");
    }

    void send(const json& j) { ws.write(asio::buffer(j.dump())); }

    template <class Pred>
    bool read_until(Pred pred, std::chrono::seconds limit = std::chrono::seconds(10)) {
        const auto deadline = std::chrono::steady_clock::now() + limit;
        while (std::chrono::steady_clock::now() < deadline) {
            beast::flat_buffer buf;
            boost::system::error_code ec;
            ws.read(buf, ec);
            if (ec) return false;
            if (pred(json::parse(beast::buffers_to_string(buf.data())))) return true;
        }
        return false;
    }
};

bool is_telemetry(const proto::Message& m) { return std::holds_alternative<proto::TelemetryFrame>(m); }

}  // namespace

TEST_CASE("server advances ticks with no clients attached") {
    Server server(Scenario{}, test_options());
    server.start();
    CHECK(server.tcp_port() != 0);
    CHECK(server.ws_port() != 0);
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    CHECK(server.ticks() >= 5);
    server.stop();
    CHECK(server.failure().empty());
}

TEST_CASE("duration-limited server finishes on its own") {
    auto opts = test_options();
    opts.realtime = false;
    opts.duration = 2.0;
    Server server(Scenario{}, opts);
    server.start();
    REQUIRE(server.wait_for(std::chrono::seconds(20)));
    CHECK(server.ticks() == 101);
}

TEST_CASE("raw TCP client: telemetry stream and gain-change echo") {
    Server server(Scenario{}, test_options());
    server.start();
    RawClient client(server.tcp_port());

    std::uint32_t last_seq = 0;
    int frames = 0;
    bool monotone = true;
    CHECK(client.read_until([&](const proto::Message& m) {
        if (!is_telemetry(m)) return false;
        const auto seq = std::get<proto::TelemetryFrame>(m).seq;
        if (frames > 0 && seq <= last_seq) monotone = false;
        last_seq = seq;
        return ++frames >= 5;
    }));
    CHECK(monotone);

    proto::SetGains g;
    g.yaw = proto::GainPair{1.25, 0.05};
    client.send(proto::CommandMessage{11, g});
    CHECK(client.read_until([](const proto::Message& m) {
        return is_telemetry(m) && std::get<proto::TelemetryFrame>(m).yaw_gains == proto::GainPair{1.25, 0.05};
    }));

    client.send(proto::CommandMessage{12, proto::Ping{}});
    CHECK(client.read_until([](const proto::Message& m) {
        auto* log = std::get_if<proto::LogText>(&m);
        return log && log->text == "pong #12";
    }));
    server.stop();
}

TEST_CASE("websocket client: JSON telemetry and JSON commands") {
    Server server(Scenario{}, test_options());
    server.start();
    WsClient client(server.ws_port());

    json first;
    REQUIRE(client.read_until([&](const json& j) {
        if (j.at("type") != "telemetry") return false;
        first = j;
        return true;
    }));
    CHECK(first.contains("yaw_est"));
    CHECK(first.contains("setpoints"));
    CHECK(first.contains("truth"));
    CHECK_NOTHROW(json_mirror::telemetry_from_json(first));

    client.send({{"type", "command"}, {"seq", 3}, {"kind", "set_setpoints"},
                 {"yaw_ref", 0.4}, {"depth_ref", 1.5}, {"surge_duty", 0.0}});
    CHECK(client.read_until([](const json& j) {
        return j.at("type") == "telemetry" && j.at("setpoints").at("depth_ref") == 1.5;
    }));
    server.stop();
}

TEST_CASE("conflicting commands from two clients: last arrival wins") {
    Server server(Scenario{}, test_options());
    server.start();
    RawClient raw(server.tcp_port());
    WsClient ws(server.ws_port());

    raw.send(proto::CommandMessage{1, proto::SetSetpoints{0.1, 1.0, 0.0}});
    REQUIRE(ws.read_until([](const json& j) {
        return j.at("type") == "telemetry" && j.at("setpoints").at("depth_ref") == 1.0;
    }));
    ws.send({{"type", "command"}, {"seq", 2}, {"kind", "set_setpoints"},
             {"yaw_ref", -0.1}, {"depth_ref", 2.0}, {"surge_duty", 0.0}});
    CHECK(ws.read_until([](const json& j) {
        return j.at("type") == "telemetry" && j.at("setpoints").at("depth_ref") == 2.0;
    }));
    // Stays at the later value.
    int later = 0;
    CHECK(ws.read_until([&](const json& j) {
        if (j.at("type") != "telemetry") return false;
        CHECK(j.at("setpoints").at("depth_ref") == 2.0);
        return ++later >= 10;
    }));
    server.stop();
}

TEST_CASE("malformed input closes only the offending connection") {
    Server server(Scenario{}, test_options());
    server.start();
    RawClient bad(server.tcp_port());
    RawClient good(server.tcp_port());
    WsClient ws_bad(server.ws_port());
    WsClient ws_good(server.ws_port());

    const std::array<std::uint8_t, 6> garbage{0x01, 0x02, 0x03, 0x04, 0x05, 0x06};
    asio::write(bad.sock, asio::buffer(garbage));
    ws_bad.ws.write(asio::buffer(std::string("{not json")));

    CHECK_FALSE(bad.read_until([](const proto::Message&) { return false; }));
    CHECK_FALSE(ws_bad.read_until([](const json&) { return false; }));

    int frames = 0;
    CHECK(good.read_until([&](const proto::Message& m) { return is_telemetry(m) && ++frames >= 5; }));
    frames = 0;
    CHECK(ws_good.read_until([&](const json& j) { return j.at("type") == "telemetry" && ++frames >= 5; }));
    server.stop();
    CHECK(server.failure().empty());
}

TEST_CASE("websocket port rejects other paths") {
    Server server(Scenario{}, test_options());
    server.start();
    asio::io_context io;
    tcp::socket sock(io);
    sock.connect({asio::ip::make_address("127.0.0.1"), server.ws_port()});
    http::request<http::empty_body> req{http::verb::get, "/", 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(sock, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    CHECK(res.result() == http::status::not_found);
    server.stop();
}

TEST_CASE("busy port is reported") {
    auto opts = test_options();
    Server first(Scenario{}, opts);
    first.start();
    opts.tcp_port = first.tcp_port();
    Server second(Scenario{}, opts);
    CHECK_THROWS_AS(second.start(), Error);
    first.stop();
}
