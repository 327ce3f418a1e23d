#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spots/dfpn.hpp"
#include "spots/nim.hpp"
#include "spots/oracle.hpp"
#include "spots/pdfpn.hpp"
#include "spots/sprouts.hpp"

using namespace spots;

TEST_CASE("descend condition") {
    ThresholdSet t{5, 4, 10, 2, 3};
    CHECK(descend_condition({4, 3}, t));
    CHECK(!descend_condition({5, 3}, t));
    CHECK(!descend_condition({4, 4}, t));
    // min(8 + 2, 7 + 3) = 10 is not below mt
    CHECK(!descend_condition({8, 7}, ThresholdSet{kInf, kInf, 10, 2, 3}));
    CHECK(descend_condition({1, 1}, ThresholdSet::root()));
    CHECK(!descend_condition(ProofNumbers::proved(), ThresholdSet::root()));
}

TEST_CASE("thresholds below an atomic node") {
    const ThresholdSet v{10, 8, kInf, 0, 0};
    const auto w = child_thresholds_atomic(v, {2, 5}, {3, 2}, 4);
    CHECK(w.pt == PnValue(8 - 5 + 3));
    CHECK(w.dt == PnValue(4 + 1));
    CHECK(w.mt == kInf);
    CHECK(w.ps == PnValue(5 - 3));
    CHECK(w.ds == PnValue(0));
    // an only child inherits pt as its disproof threshold
    CHECK(child_thresholds_atomic(v, {2, 5}, {3, 2}, kInf).dt == PnValue(10));
    // root thresholds stay infinite
    const auto r = child_thresholds_atomic(ThresholdSet::root(), {1, 3}, {1, 1}, 1);
    CHECK(r.pt == kInf);
    CHECK(r.dt == PnValue(2));
}

TEST_CASE("thresholds below a sum") {
    const ThresholdSet v{10, 12, 9, 2, 5};
    CHECK(sum_budget(v) == PnValue(7));
    CHECK(child_thresholds_decomposable(v, {3, 3}, {2, 6}, true) == v);
    const auto w = child_thresholds_decomposable(v, {3, 3}, {2, 6}, false);
    CHECK(w.pt == kInf);
    CHECK(w.dt == kInf);
    CHECK(w.mt == PnValue(7 - 3 + 2));
    CHECK(w.ps == PnValue(0));
    CHECK(w.ds == PnValue(0));
    CHECK(sum_budget(ThresholdSet::root()) == kInf);
}

TEST_CASE("adjusted disproof threshold and virtual disproof numbers") {
    CHECK(adjusted_dt(10, 4, 0) == PnValue(5));
    CHECK(adjusted_dt(10, 4, 2) == PnValue(3));
    CHECK(adjusted_dt(3, 4, 0) == PnValue(3));
    CHECK(adjusted_dt(10, 1, 5) == PnValue(0));
    CHECK(adjusted_dt(kInf, kInf, 3) == kInf);

    ThreadRegistry reg(3);
    reg.push(0, "a");
    reg.push(1, "a");
    reg.push(2, "b");
    CHECK(effective_dn("a", 4, reg) == PnValue(6));
    CHECK(effective_dn("b", 4, reg) == PnValue(5));
    CHECK(effective_dn("c", 4, reg) == PnValue(4));
    CHECK(effective_dn("a", kInf, reg).is_inf());
}

TEST_CASE("transposition table evicts the cheapest unsolved entries") {
    TranspositionTable tt(2);
    tt.store("a", {1, 1}, 5);
    tt.store("b", {1, 1}, 1);
    tt.store("c", {1, 1}, 3);
    CHECK(tt.size() <= 2);
    CHECK(tt.lookup("a"));
    CHECK(!tt.lookup("b"));
    CHECK(tt.lookup("c"));
    CHECK(tt.evictions() == 1);

    TranspositionTable solved(2);
    solved.store("w", ProofNumbers::proved(), 0);
    solved.store("x", {2, 2}, 100);
    solved.store("y", {1, 1}, 0);
    CHECK(solved.lookup("w"));
    CHECK(!solved.lookup("x"));
}

TEST_CASE("solved entries are never downgraded") {
    TranspositionTable tt(10);
    CHECK(tt.store("k", ProofNumbers::disproved(), 1));
    CHECK(!tt.store("k", {3, 3}, 1));
    CHECK(tt.lookup("k")->numbers.is_disproved());
    CHECK(tt.lookup("k")->effort == 2);
}

TEST_CASE("table size never exceeds capacity") {
    std::mt19937_64 rng(1);
    for (std::size_t cap : {1u, 7u, 100u, 70000u}) {
        TranspositionTable tt(cap);
        for (int i = 0; i < 5000; ++i) tt.store("k" + std::to_string(rng() % 3000), {1, 1}, rng() % 9);
        CHECK(tt.size() <= cap);
        CHECK(tt.peak() <= cap);
    }
}

TEST_CASE("Grundy nodes walk the heap sizes in order") {
    NimGame nim;
    GrundyDatabase db;
    TranspositionTable tt(10000);
    // 2 + 3 + *0: the component "2" needs the probes *0, *1, *2
    const auto r = dfpn_solve(Couple{nim.parse("2,3"), 0}, nim, tt, db);
    CHECK(r.outcome == Outcome::kWin);
    REQUIRE(db.find("2"));
    CHECK(*db.find("2") == 2);
    CHECK(!db.find("3|0"));
}

TEST_CASE("dfpn on exhaustive small Nim with invariant checks") {
    NimGame nim;
    SearchConfig cfg;
    cfg.check_invariants = true;
    std::uint64_t violations = 0;
    for (unsigned a = 0; a <= 4; ++a)
        for (unsigned b = a; b <= 4; ++b)
            for (unsigned c = b; c <= 4; ++c)
                for (NimValue n = 0; n <= 4; ++n) {
                    GrundyDatabase db;
                    TranspositionTable tt(100000);
                    const auto key = nim.parse(testing::heaps_text({a, b, c}));
                    if (Couple{key, n}.is_terminal()) continue;
                    const auto r = dfpn_solve(Couple{key, n}, nim, tt, db, cfg);
                    CHECK((r.outcome == Outcome::kLoss) == (testing::bouton({a, b, c}) == n));
                    violations += r.stats.invariant_violations;
                    for (const auto& e : db.sorted_entries()) CHECK(e.value == testing::bouton(NimGame::heaps(e.key)));
                }
    CHECK(violations == 0);
}

TEST_CASE("dfpn on the small Sprouts starts with invariant checks") {
    sprouts::SproutsGame g;
    SearchConfig cfg;
    cfg.check_invariants = true;
    const Outcome expected[] = {Outcome::kLoss, Outcome::kLoss, Outcome::kWin, Outcome::kWin, Outcome::kWin};
    for (int n = 1; n <= 5; ++n) {
        GrundyDatabase db;
        TranspositionTable tt(1'000'000);
        const auto r = dfpn_solve(Couple{g.parse("0*" + std::to_string(n)), 0}, g, tt, db, cfg);
        CHECK(r.outcome == expected[n - 1]);
        CHECK(r.stats.invariant_violations == 0);
    }
}

TEST_CASE("small table: same answer, more work") {
    sprouts::SproutsGame g;
    const auto root = Couple{g.parse("0*4"), 0};
    GrundyDatabase db_small, db_big;
    TranspositionTable small(1000), big(1'000'000);
    const auto a = dfpn_solve(root, g, small, db_small);
    const auto b = dfpn_solve(root, g, big, db_big);
    CHECK(a.outcome == b.outcome);
    CHECK(a.stats.expansions >= b.stats.expansions);
    CHECK(a.stats.tt_entries_peak <= 1000);
}

TEST_CASE("budget and progress") {
    sprouts::SproutsGame g;
    GrundyDatabase db;
    TranspositionTable tt(100000);
    DfpnSearch search(g, tt, db);
    std::vector<std::uint64_t> reports;
    const auto numbers =
        search.run(Couple{g.parse("0*6"), 0}, 1, 100, [&](const DfpnProgress& p) { reports.push_back(p.expansions); }, 10);
    CHECK(!numbers.is_solved());
    CHECK(search.expansions() == 100);
    REQUIRE(reports.size() == 10);
    for (std::size_t i = 0; i < reports.size(); ++i) CHECK(reports[i] == 10 * (i + 1));

    SearchConfig cfg;
    cfg.budget = 50;
    GrundyDatabase db2;
    TranspositionTable tt2(1000);
    CHECK_THROWS_AS(dfpn_solve(Couple{g.parse("0*6"), 0}, g, tt2, db2, cfg), BudgetExceeded);
}

TEST_CASE("search resumes from the shared table") {
    sprouts::SproutsGame g;
    GrundyDatabase db;
    TranspositionTable tt(100000);
    DfpnSearch search(g, tt, db);
    const Couple root{g.parse("0*5"), 0};
    ProofNumbers numbers;
    int runs = 0;
    do {
        numbers = search.run(root, 1, 200);
        ++runs;
    } while (!numbers.is_solved() && runs < 1000);
    CHECK(numbers.is_proved());
    CHECK(runs > 1);
}

TEST_CASE("external stop flag") {
    sprouts::SproutsGame g;
    GrundyDatabase db;
    TranspositionTable tt(100000);
    std::atomic<bool> stop{true};
    SearchConfig cfg;
    cfg.stop = &stop;
    CHECK_THROWS_AS(dfpn_solve(Couple{g.parse("0*6"), 0}, g, tt, db, cfg), SearchStopped);
}

TEST_CASE("recorded Grundy numbers agree with the oracle") {
    sprouts::SproutsGame g;
    Oracle oracle(g);
    GrundyDatabase db;
    TranspositionTable tt(1'000'000);
    dfpn_solve(Couple{g.parse("0*5"), 0}, g, tt, db);
    CHECK(db.size() > 0);
    for (const auto& e : db.sorted_entries()) CHECK(oracle.grundy(e.key) == e.value);
}
