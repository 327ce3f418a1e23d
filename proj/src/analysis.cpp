#include "spots/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace spots {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

double plain_sample(const Game& game, PositionKey p, std::mt19937_64& rng) {
    double value = 1;
    for (;;) {
        auto kids = game.children(p);
        if (kids.empty()) return value;
        value *= static_cast<double>(kids.size());
        p = std::move(kids[pick(rng, kids.size())]);
    }
}

double gn_sample(const Game& game, const PositionKey& p, std::mt19937_64& rng, double expected_gn) {
    if (p.empty()) return 1;
    auto parts = game.decompose(p);
    if (parts.size() > 1) {
        double total = 0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const double factor = i + 1 < parts.size() ? expected_gn + 1 : 1;
            total += factor * gn_sample(game, parts[i], rng, expected_gn);
        }
        return total;
    }
    auto kids = game.children(p);
    if (kids.empty()) return 1;
    const double b = static_cast<double>(kids.size());
    return b * gn_sample(game, kids[pick(rng, kids.size())], rng, expected_gn);
}

void check_samples(std::size_t samples) {
    if (samples < 1) throw std::invalid_argument("need at least one sample");
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

ComplexityEstimate estimate_plain(const Game& game, const PositionKey& root, std::size_t samples, std::uint64_t seed) {
    check_samples(samples);
    std::mt19937_64 rng(seed);
    std::vector<double> values;
    values.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) values.push_back(plain_sample(game, root, rng));
    double total = 0;
    for (double v : values) total += v;
    const double mean = total / static_cast<double>(samples);
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = samples > 1 ? std::sqrt(var / static_cast<double>(samples - 1)) : 0;
    return {mean, sd, samples};
}

ComplexityEstimate estimate_gn(const Game& game, const PositionKey& root, std::size_t samples, std::uint64_t seed,
                               double expected_gn) {
    check_samples(samples);
    std::mt19937_64 rng(seed);
    std::vector<double> values;
    values.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) values.push_back(gn_sample(game, root, rng, expected_gn));
    double total = 0;
    for (double v : values) total += v;
    const double mean = total / static_cast<double>(samples);
    return {mean, percentile(values, 0.99) - percentile(values, 0.01), samples};
}

double default_expected_gn(const GrundyDatabase& db) {
    const auto entries = db.sorted_entries();
    if (entries.empty()) return 1;
    double sum = 0;
    for (const auto& e : entries) sum += e.value;
    return sum / static_cast<double>(entries.size());
}

CertificateReport verify_certificate(const GrundyDatabase& db, const Game& game) {
    CertificateReport report;
    std::set<PositionKey> missing;
    for (const auto& [key, g] : db.sorted_entries()) {
        ++report.checked;
        auto fail = [&](std::string why) { report.failures.emplace_back(key, std::move(why)); };
        if (key.empty()) {
            if (g != 0) fail("the empty position has value 0");
            continue;
        }
        if (game.decompose(key).size() > 1) {
            fail("entry is not an atomic position");
            continue;
        }
        const auto kids = game.children(key);
        std::set<NimValue> seen;
        bool clash = false;
        for (const auto& child : kids) {
            NimValue v = 0;
            bool known = true;
            for (const auto& part : game.decompose(child)) {
                if (auto pv = db.find(part)) {
                    v ^= *pv;
                } else {
                    known = false;
                    missing.insert(part);
                }
            }
            if (!known) continue;
            seen.insert(v);
            if (v == g && !clash) {
                clash = true;
                fail("child '" + child + "' has value " + std::to_string(g));
            }
        }
        if (g > kids.size()) {
            fail("value " + std::to_string(g) + " exceeds the " + std::to_string(kids.size()) + " children");
            continue;
        }
        for (NimValue m = 0; m < g; ++m)
            if (!seen.count(m)) {
                fail("no child with value " + std::to_string(m));
                break;
            }
    }
    report.missing_dependencies.assign(missing.begin(), missing.end());
    return report;
}

}  // namespace spots
