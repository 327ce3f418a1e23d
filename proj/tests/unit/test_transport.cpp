#include <random>
#include <thread>

#include "doctest.h"
#include "spots/transport.hpp"

using namespace spots;
using namespace spots::proto;

namespace {

ProofNumbers random_numbers(std::mt19937_64& rng) {
    auto v = [&] { return rng() % 8 == 0 ? kInf : PnValue(rng() % 1'000'000'000'000ULL); };
    return {v(), v()};
}

std::string random_key(std::mt19937_64& rng) {
    static const std::string alphabet = "0123ABCabc.}+'";
    std::string s(rng() % 12, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    return s;
}

GnDelta random_delta(std::mt19937_64& rng) {
    GnDelta d(rng() % 4);
    for (auto& e : d) e = {random_key(rng), static_cast<NimValue>(rng() % 7)};
    return d;
}

Message random_message(std::mt19937_64& rng) {
    switch (rng() % 5) {
        case 0:
            return Hello{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng() % 9),
                         static_cast<std::uint32_t>(1 + rng() % 8)};
        case 1:
            return Assign{Job{rng(), Couple{random_key(rng), static_cast<NimValue>(rng() % 5)}, 1 + rng() % 100000,
                              1 + rng() % 1000, random_delta(rng)}};
        case 2:
            return Progress{rng(), random_numbers(rng), rng() % 100000, random_delta(rng)};
        case 3: {
            Done d;
            d.job_id = rng();
            d.status = rng() % 2 ? JobStatus::kSolved : JobStatus::kBudgetExhausted;
            d.numbers = random_numbers(rng);
            d.iterations_done = rng() % 1000;
            for (std::size_t i = rng() % 4; i > 0; --i) d.children.push_back({random_key(rng), random_numbers(rng)});
            d.gn_delta = random_delta(rng);
            return d;
        }
        default:
            return Shutdown{};
    }
}

}  // namespace

TEST_CASE("random messages survive encode and decode") {
    std::mt19937_64 rng(1234);
    for (int t = 0; t < 1000; ++t) {
        const Message m = random_message(rng);
        const std::string frame = encode(m);
        CHECK(frame.back() == '\n');
        CHECK(frame.find('\n') == frame.size() - 1);
        CHECK(decode(frame) == m);
    }
}

TEST_CASE("wire format details") {
    const auto frame = encode(Progress{7, {3, kInf}, 10, {}});
    CHECK(frame.find("\"inf\"") != std::string::npos);
    CHECK(frame.find("\"type\":\"progress\"") != std::string::npos);
    CHECK(encode(Hello{1, 2, 3}).find(std::string(kVersion)) != std::string::npos);
}

TEST_CASE("malformed frames are protocol errors") {
    CHECK_THROWS_AS(decode("{\"type\":\"bogus\"}"), ProtocolError);
    CHECK_THROWS_AS(decode("{\"type\":\"progress\",\"job_id\":1"), ProtocolError);
    CHECK_THROWS_AS(decode("[1,2]"), ProtocolError);
    CHECK_THROWS_AS(decode(""), ProtocolError);
    CHECK_THROWS_AS(decode("{\"type\":\"hello\",\"version\":\"other\",\"worker_id\":0,\"group_id\":0,\"threads\":1}"),
                    ProtocolError);
    const auto good = encode(Progress{1, {2, 3}, 4, {}});
    for (std::size_t cut = 0; cut + 2 < good.size(); cut += 3) CHECK_THROWS_AS(decode(good.substr(0, cut)), ProtocolError);
    auto neg = good;
    neg.replace(neg.find("\"iterations_done\":4"), 19, "\"iterations_done\":-4");
    CHECK_THROWS_AS(decode(neg), ProtocolError);
}

TEST_CASE("decode never crashes on random bytes") {
    std::mt19937_64 rng(77);
    const std::string seed = encode(Done{5, JobStatus::kSolved, {0, kInf}, 3, {{"0|1", {1, 2}}}, {{"0", 0}}});
    std::size_t accepted = 0;
    for (int t = 0; t < 100'000; ++t) {
        std::string s;
        if (t % 2) {
            s.resize(rng() % 64);
            for (auto& c : s) c = static_cast<char>(rng() & 0xff);
        } else {
            s = seed;
            for (int k = 1 + rng() % 4; k > 0; --k) s[rng() % s.size()] = static_cast<char>(rng() & 0xff);
        }
        try {
            decode(s);
            ++accepted;
        } catch (const ProtocolError&) {
        }
    }
    CHECK(accepted < 100'000);
}

TEST_CASE("long deltas are split and reassembled") {
    Progress p{3, {1, 1}, 5, {}};
    for (std::size_t i = 0; i < kMaxDelta * 2 + 17; ++i) p.gn_delta.push_back({"k" + std::to_string(i), 1});
    const auto frames = encode_frames(p);
    CHECK(frames.size() == 3);
    CHECK(frames[0].find("\"more\":true") != std::string::npos);
    CHECK(frames[2].find("\"more\"") == std::string::npos);

    auto [a, b] = make_channel_pair();
    a->send(p);
    a->send(Shutdown{});
    auto got = b->receive();
    REQUIRE(got);
    CHECK(std::get<Progress>(*got) == p);
    CHECK(std::holds_alternative<Shutdown>(*b->receive()));
    a->close();
    CHECK(!b->receive());
}

TEST_CASE("tcp endpoints carry the same messages") {
    TcpListener listener("127.0.0.1", 0);
    std::mt19937_64 rng(5);
    std::vector<Message> sent;
    for (int i = 0; i < 200; ++i) sent.push_back(random_message(rng));
    std::thread client([&] {
        auto ep = tcp_connect("127.0.0.1", listener.port());
        for (const auto& m : sent) ep->send(m);
        ep->close();
    });
    auto server = listener.accept();
    std::vector<Message> got;
    while (auto m = server->receive()) got.push_back(*m);
    client.join();
    CHECK(got == sent);
}

TEST_CASE("connecting to nothing fails") {
    CHECK_THROWS(tcp_connect("127.0.0.1", 1, 200));
}
