#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"

namespace spots {

struct ComplexityEstimate {
    double mean = 0;
    /// Standard deviation (plain) or 1st to 99th percentile range (Grundy-aware).
    double dispersion = 0;
    std::size_t samples = 0;
};

/// Product of branching factors along uniformly random root-to-terminal
/// paths: an unbiased estimate of the number of distinct games.
ComplexityEstimate estimate_plain(const Game& game, const PositionKey& root, std::size_t samples, std::uint64_t seed);

/// Same walk, but a sum is estimated as the sum of its components, each
/// component except the last standing behind a Grundy node with
/// `expected_gn + 1` children.
ComplexityEstimate estimate_gn(const Game& game, const PositionKey& root, std::size_t samples, std::uint64_t seed,
                               double expected_gn);

/// Mean Grundy value stored in `db`, or 1 when it is empty.
double default_expected_gn(const GrundyDatabase& db);

struct CertificateReport {
    std::size_t checked = 0;
    std::vector<std::pair<PositionKey, std::string>> failures;
    std::vector<PositionKey> missing_dependencies;

    bool passed() const { return failures.empty(); }
};

/// Checks every entry against the mex rule: no child has the stored value,
/// and every smaller value is taken by some child whose value follows from
/// the database.
CertificateReport verify_certificate(const GrundyDatabase& db, const Game& game);

}  // namespace spots
