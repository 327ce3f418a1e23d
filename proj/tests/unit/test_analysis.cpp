#include <cmath>
#include <sstream>

#include "doctest.h"
#include "spots/analysis.hpp"
#include "spots/dfpn.hpp"
#include "spots/nim.hpp"
#include "spots/sprouts.hpp"

using namespace spots;

namespace {

// Complete tree of branching b and depth d. Keys "depth:index"; "S" is the
// sum of two such trees with different labels.
class RegularGame final : public Game {
public:
    RegularGame(unsigned b, unsigned d) : b_(b), d_(d) {}
    std::string_view name() const override { return "regular"; }
    PositionKey parse(std::string_view s) const override { return std::string(s); }
    std::vector<PositionKey> children(std::string_view p) const override {
        if (p.empty()) return {};
        if (p == "S") return {};  // sums are only walked through decompose
        const char tree = p[0];
        const unsigned depth = static_cast<unsigned>(std::stoul(std::string(p.substr(1, p.find(':') - 1))));
        if (depth == 0) return {};
        std::vector<PositionKey> out;
        for (unsigned i = 0; i < b_; ++i)
            out.push_back(std::string(1, tree) + std::to_string(depth - 1) + ":" + std::string(p.substr(p.find(':') + 1)) + "." +
                          std::to_string(i));
        return out;
    }
    std::vector<PositionKey> decompose(std::string_view p) const override {
        if (p.empty()) return {};
        if (p == "S") return {root('a'), root('b')};
        return {std::string(p)};
    }
    PositionKey root(char tree) const { return std::string(1, tree) + std::to_string(d_) + ":"; }

private:
    unsigned b_, d_;
};

double count_games(const Game& g, const PositionKey& p) {
    const auto kids = g.children(p);
    if (kids.empty()) return 1;
    double n = 0;
    for (const auto& k : kids) n += count_games(g, k);
    return n;
}

}  // namespace

TEST_CASE("plain estimate on a regular tree is exact") {
    for (unsigned b : {1u, 2u, 3u, 5u})
        for (unsigned d : {0u, 1u, 4u, 7u}) {
            RegularGame g(b, d);
            const auto e = estimate_plain(g, g.root('a'), 50, 1);
            CHECK(e.mean == doctest::Approx(std::pow(b, d)));
            CHECK(e.dispersion == 0);
            CHECK(e.samples == 50);
        }
}

TEST_CASE("Grundy-aware estimate adds the components") {
    RegularGame g(2, 6);
    const auto e = estimate_gn(g, "S", 30, 3, 0);
    CHECK(e.mean == doctest::Approx(2 * 64));
    CHECK(e.dispersion == 0);
    // each non-last component stands behind expected_gn + 1 probes
    CHECK(estimate_gn(g, "S", 30, 3, 2).mean == doctest::Approx(3 * 64 + 64));
}

TEST_CASE("plain estimate is unbiased on 0*2") {
    sprouts::SproutsGame g;
    const auto root = g.parse("0*2");
    const double exact = count_games(g, root);
    const auto e = estimate_plain(g, root, 20000, 8);
    const double se = e.dispersion / std::sqrt(static_cast<double>(e.samples));
    CHECK(std::abs(e.mean - exact) <= 3 * se + 1e-9);
}

TEST_CASE("estimates are deterministic for a seed") {
    sprouts::SproutsGame g;
    const auto root = g.parse("0*5");
    CHECK(estimate_plain(g, root, 200, 4).mean == estimate_plain(g, root, 200, 4).mean);
    CHECK(estimate_gn(g, root, 200, 4, 1).mean == estimate_gn(g, root, 200, 4, 1).mean);
    CHECK_THROWS_AS(estimate_plain(g, root, 0, 4), std::invalid_argument);
}

TEST_CASE("default expected Grundy value") {
    GrundyDatabase db;
    CHECK(default_expected_gn(db) == 1);
    db.insert("x", 0);
    db.insert("y", 3);
    CHECK(default_expected_gn(db) == doctest::Approx(1.5));
}

TEST_CASE("certificate of a solve verifies and catches every mutation") {
    sprouts::SproutsGame g;
    GrundyDatabase db;
    TranspositionTable tt(1'000'000);
    dfpn_solve(Couple{g.parse("0*5"), 0}, g, tt, db);
    const auto report = verify_certificate(db, g);
    CHECK(report.passed());
    CHECK(report.checked == db.size());

    const auto entries = db.sorted_entries();
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (NimValue delta : {1u, 2u}) {
            GrundyDatabase bad;
            for (std::size_t j = 0; j < entries.size(); ++j)
                bad.insert(entries[j].key, j == i ? entries[j].value + delta : entries[j].value);
            CHECK_MESSAGE(!verify_certificate(bad, g).passed(), entries[i].key);
            if (entries[i].value >= delta) {
                GrundyDatabase low;
                for (std::size_t j = 0; j < entries.size(); ++j)
                    low.insert(entries[j].key, j == i ? entries[j].value - delta : entries[j].value);
                CHECK(!verify_certificate(low, g).passed());
            }
        }
}

TEST_CASE("certificates reject sums and a bad empty entry") {
    NimGame nim;
    GrundyDatabase db;
    db.insert("1,2", 3);
    CHECK(!verify_certificate(db, nim).passed());
    GrundyDatabase empty;
    empty.insert("", 1);
    CHECK(!verify_certificate(empty, nim).passed());
    GrundyDatabase ok;
    ok.insert("", 0);
    ok.insert("1", 1);
    ok.insert("2", 2);
    CHECK(verify_certificate(ok, nim).passed());
    CHECK(verify_certificate(ok, nim).missing_dependencies.empty());
}
