#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "spots/oracle.hpp"
#include "spots/sprouts.hpp"

using namespace spots;
namespace sp = spots::sprouts;

TEST_CASE("empty and start positions") {
    sp::SproutsGame g;
    CHECK(g.parse("0*0").empty());
    CHECK(g.parse("").empty());
    CHECK(sp::n_spot(3).total_lives() == 9);
    CHECK(sp::canonical_key(sp::n_spot(2)) == sp::canonical_key(sp::parse("0.0")));
    CHECK(g.is_terminal(""));
    CHECK(g.decompose("").empty());
}

TEST_CASE("parse rejects malformed text") {
    CHECK_THROWS_AS(sp::parse("0.4"), SyntaxError);
    CHECK_THROWS_AS(sp::parse("0*x"), SyntaxError);
    CHECK_THROWS(sp::parse("A"));  // a one-life label must occur twice
}

TEST_CASE("render then parse is the identity on canonical keys") {
    sp::SproutsGame g;
    for (int n = 1; n <= 4; ++n)
        for (const auto& key : testing::random_reachable(g, n, 60, 100 + n)) {
            const auto p = sp::parse(key);
            CHECK(sp::render(p) == key);
            CHECK_NOTHROW(sp::validate(p));
        }
}

TEST_CASE("canonical key ignores the symmetry group") {
    sp::SproutsGame g;
    std::mt19937_64 rng(42);
    std::vector<std::string> pool;
    for (int n = 2; n <= 4; ++n)
        for (const auto& key : testing::random_reachable(g, n, 40, n)) pool.push_back(key);
    REQUIRE(!pool.empty());
    for (int t = 0; t < 1000; ++t) {
        const auto& key = pool[rng() % pool.size()];
        const auto p = sp::parse(key);
        CHECK(sp::canonical_key(testing::scramble(p, rng)) == sp::canonical_key(p));
    }
}

TEST_CASE("children match a naive enumeration of moves") {
    sp::SproutsGame g;
    std::vector<std::string> pool{g.parse("0*1"), g.parse("0*2"), g.parse("0*3")};
    for (int n = 2; n <= 4; ++n)
        for (const auto& key : testing::random_reachable(g, n, 25, 7 * n)) pool.push_back(key);
    for (const auto& key : pool) {
        if (key.empty()) continue;
        std::set<std::string> mine;
        for (const auto& q : sp::moves(sp::parse(key))) mine.insert(sp::canonical_key(sp::simplify(q)));
        CHECK_MESSAGE(mine == testing::naive_child_keys(key), key);
        const auto kids = g.children(key);
        CHECK(std::set<std::string>(kids.begin(), kids.end()) == mine);
        CHECK(std::set<std::string>(kids.begin(), kids.end()).size() == kids.size());
    }
}

TEST_CASE("first moves from the small starts") {
    sp::SproutsGame g;
    // one spot: only the loop
    CHECK(g.children(g.parse("0*1")).size() == 1);
    // two spots: loop on either (same up to symmetry, two sides) or a join
    CHECK(!g.children(g.parse("0*2")).empty());
}

TEST_CASE("decomposition keeps the game value") {
    sp::SproutsGame g;
    testing::NaiveGrundy naive(g);
    for (int n = 2; n <= 4; ++n)
        for (const auto& key : testing::random_reachable(g, n, 30, 31 * n)) {
            const auto parts = g.decompose(key);
            if (key.empty()) {
                CHECK(parts.empty());
                continue;
            }
            NimValue x = 0;
            for (const auto& c : parts) {
                CHECK(g.decompose(c) == std::vector<PositionKey>{c});
                x ^= naive(c);
            }
            CHECK(x == naive(key));
        }
}

TEST_CASE("simplify keeps the game value") {
    sp::SproutsGame g;
    testing::NaiveGrundy naive(g);
    for (const auto& key : testing::random_reachable(g, 3, 40, 5)) {
        if (key.empty()) continue;
        for (const auto& q : sp::moves(sp::parse(key))) {
            // unsimplified successor, valued by naive moves on the raw position
            std::set<NimValue> seen;
            for (const auto& r : testing::naive_moves(q)) seen.insert(naive(sp::canonical_key(sp::simplify(r))));
            NimValue m = 0;
            while (seen.count(m)) ++m;
            CHECK(m == naive(sp::canonical_key(sp::simplify(q))));
        }
    }
}

TEST_CASE("outcomes of the small starts") {
    sp::SproutsGame g;
    const Outcome expected[] = {Outcome::kLoss, Outcome::kLoss, Outcome::kWin, Outcome::kWin, Outcome::kWin};
    for (int n = 1; n <= 4; ++n) CHECK(brute_outcome(g, g.parse("0*" + std::to_string(n))) == expected[n - 1]);
}

TEST_CASE("games end within 3n - 1 moves") {
    sp::SproutsGame g;
    std::mt19937_64 rng(9);
    for (int n = 1; n <= 7; ++n)
        for (int t = 0; t < 50; ++t) {
            std::string p = g.parse("0*" + std::to_string(n));
            int moves = 0;
            for (;;) {
                auto kids = g.children(p);
                if (kids.empty()) break;
                p = kids[rng() % kids.size()];
                ++moves;
            }
            CHECK(moves <= 3 * n - 1);
            CHECK(moves >= 2 * n);
        }
}

TEST_CASE("lives strictly decrease along a move") {
    sp::SproutsGame g;
    for (const auto& key : testing::random_reachable(g, 4, 30, 77)) {
        if (key.empty()) continue;
        const auto p = sp::parse(key);
        for (const auto& q : sp::moves(p)) CHECK(q.total_lives() == p.total_lives() - 1);
    }
}
