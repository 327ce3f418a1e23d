#include <random>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "spots/nim.hpp"
#include "spots/pdfpn.hpp"
#include "spots/sprouts.hpp"

using namespace spots;

TEST_CASE("registry counts and balance") {
    ThreadRegistry reg(2);
    CHECK(reg.balanced());
    reg.push(0, "r");
    reg.push(0, "x");
    reg.push(1, "r");
    CHECK(reg.count("r") == 2);
    CHECK(reg.count("x") == 1);
    CHECK(reg.path_length(0) == 2);
    CHECK(!reg.balanced());
    reg.pop(0);
    reg.pop(0);
    reg.pop(1);
    CHECK(reg.count("r") == 0);
    CHECK(reg.balanced());
}

TEST_CASE("a solved key asks the other threads to unwind") {
    ThreadRegistry reg(3);
    reg.push(0, "r");
    reg.push(0, "k");
    reg.push(1, "r");
    reg.push(1, "a");
    reg.push(1, "k");
    reg.push(2, "r");
    CHECK(reg.notify_solved("k", 0) == 1);
    CHECK(reg.abort_depth(0) == ThreadRegistry::kNoAbort);
    CHECK(reg.abort_depth(1) == 2);
    CHECK(reg.abort_depth(2) == ThreadRegistry::kNoAbort);
    // a shallower request wins
    CHECK(reg.notify_solved("r", 0) == 2);
    CHECK(reg.abort_depth(1) == 0);
    reg.clear_abort(1);
    CHECK(reg.abort_depth(1) == ThreadRegistry::kNoAbort);
}

TEST_CASE("one thread makes exactly the sequential expansions") {
    sprouts::SproutsGame g;
    const Couple root{g.parse("0*4"), 0};
    GrundyDatabase db1, db2;
    TranspositionTable tt1(100000), tt2(100000);
    const auto seq = dfpn_solve(root, g, tt1, db1);
    const auto par = pdfpn_solve(root, g, tt2, db2, 1);
    CHECK(seq.outcome == par.outcome);
    CHECK(seq.stats.expansions == par.stats.expansions);
}

TEST_CASE("outcomes do not depend on the thread count") {
    sprouts::SproutsGame g;
    const Outcome expected[] = {Outcome::kLoss, Outcome::kLoss, Outcome::kWin, Outcome::kWin, Outcome::kWin,
                                Outcome::kLoss};
    for (unsigned threads : {1u, 2u, 4u, 8u})
        for (int n = 1; n <= 6; ++n) {
            GrundyDatabase db;
            TranspositionTable tt(1'000'000);
            const auto r = pdfpn_solve(Couple{g.parse("0*" + std::to_string(n)), 0}, g, tt, db, threads);
            CHECK_MESSAGE(r.outcome == expected[n - 1], "threads " << threads << " n " << n);
        }
}

TEST_CASE("parallel Nim agrees with Bouton and leaves the registry balanced") {
    NimGame nim;
    std::mt19937_64 rng(99);
    for (int t = 0; t < 60; ++t) {
        const auto heaps = testing::random_heaps(rng, 4, 5);
        const NimValue n = rng() % 3;
        const Couple c{nim.parse(testing::heaps_text(heaps)), n};
        if (c.is_terminal()) continue;
        GrundyDatabase db;
        TranspositionTable tt(10000);
        // pdfpn_solve throws if the registry is unbalanced afterwards
        const auto r = pdfpn_solve(c, nim, tt, db, 1 + t % 4);
        CHECK((r.outcome == Outcome::kLoss) == (testing::bouton(heaps) == n));
        for (const auto& e : db.sorted_entries()) CHECK(e.value == testing::bouton(NimGame::heaps(e.key)));
    }
}

TEST_CASE("parallel search on a tiny table") {
    sprouts::SproutsGame g;
    GrundyDatabase db;
    TranspositionTable tt(500);
    const auto r = pdfpn_solve(Couple{g.parse("0*5"), 0}, g, tt, db, 4);
    CHECK(r.outcome == Outcome::kWin);
    CHECK(r.stats.tt_entries_peak <= 500);
}
