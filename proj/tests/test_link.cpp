#include <doctest.h>

#include "rov/link.hpp"
#include "rov/protocol.hpp"

using namespace rov;

TEST_CASE("perfect link delivers immediately and in order") {
    Link link({}, 1);
    link.send(0.0, {1, 2});
    link.send(0.0, {3});
    CHECK(link.receive(0.0) == std::vector<std::uint8_t>{1, 2, 3});
    CHECK(link.receive(0.02).empty());
}

TEST_CASE("latency delays delivery by the configured time") {
    Link link({100.0, 0.0, 0.0}, 1);
    link.send(0.0, {9});
    CHECK(link.receive(0.08).empty());
    CHECK(link.in_flight() == 1);
    CHECK(link.receive(0.1) == std::vector<std::uint8_t>{9});
}

TEST_CASE("drop probability one drops everything") {
    Link link({0.0, 1.0, 0.0}, 1);
    for (int i = 0; i < 10; ++i) link.send(0.0, {1, 2, 3});
    CHECK(link.receive(1.0).empty());
    CHECK(link.dropped() == 10);
}

TEST_CASE("corruption flips bits and the decoder rejects the damaged frames") {
    Link link({0.0, 0.0, 1.0}, 3);
    const auto frame = proto::encode_frame(proto::CommandMessage{1, proto::Ping{}});
    link.send(0.0, frame);
    const auto got = link.receive(0.0);
    REQUIRE(got.size() == frame.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] != frame[i]);
    CHECK(proto::decode_stream(got).messages.empty());
}

TEST_CASE("impairments are deterministic per seed") {
    auto run = [](std::uint64_t seed) {
        Link link({0.0, 0.3, 0.05}, seed);
        std::vector<std::uint8_t> all;
        for (int i = 0; i < 200; ++i) {
            link.send(i * 0.02, std::vector<std::uint8_t>(16, static_cast<std::uint8_t>(i)));
            const auto got = link.receive(i * 0.02);
            all.insert(all.end(), got.begin(), got.end());
        }
        return all;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}

TEST_CASE("invalid link configs") {
    CHECK_THROWS_AS(Link({-1.0, 0.0, 0.0}, 1), InvalidConfig);
    CHECK_THROWS_AS(Link({0.0, 1.5, 0.0}, 1), InvalidConfig);
    CHECK_THROWS_AS(Link({0.0, 0.0, -0.1}, 1), InvalidConfig);
}
