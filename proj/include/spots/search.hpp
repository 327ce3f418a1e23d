#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "spots/proof_number.hpp"

namespace spots {

class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(std::uint64_t nodes)
        : std::runtime_error("budget exceeded after " + std::to_string(nodes) + " nodes"), nodes_(nodes) {}
    std::uint64_t nodes() const { return nodes_; }

private:
    std::uint64_t nodes_;
};

/// How equal candidates are ordered when selecting a child.
enum class TieBreak {
    kKeyOrder,   // ascending canonical key
    kRandom,     // seeded random
    kHeuristic,  // game heuristic_rank, then key
};

/// Which unsolved component a sum without residual descends into.
enum class ComponentPolicy {
    kMinProofNumber,  // component whose current child has the least min(pn, dn)
    kFirstUnsolved,
};

struct SearchConfig {
    std::uint64_t budget = 0;  // max expansions, 0 = unlimited
    TieBreak tie_break = TieBreak::kKeyOrder;
    ComponentPolicy component_policy = ComponentPolicy::kMinProofNumber;
    std::uint64_t seed = 0;
    std::size_t tt_capacity = 1'000'000;
    unsigned threads = 1;
    bool check_invariants = false;  // node-local equations and threshold assertions
    std::size_t children_cache = 1 << 16;
    const std::atomic<bool>* stop = nullptr;  // external stop request, polled between expansions
};

struct SearchStats {
    Outcome outcome = Outcome::kLoss;
    double wall_time_seconds = 0;
    std::uint64_t expansions = 0;
    std::uint64_t peak_nodes = 0;
    std::uint64_t tt_entries_peak = 0;
    std::uint64_t gn_count = 0;
    std::uint64_t invariant_violations = 0;
    std::optional<double> search_overhead;
    std::optional<double> worker_utilization;
};

struct SolveResult {
    Outcome outcome = Outcome::kLoss;
    SearchStats stats;
};

/// Thrown when a search is interrupted through SearchConfig::stop.
class SearchStopped : public std::runtime_error {
public:
    SearchStopped() : std::runtime_error("search stopped") {}
};

}  // namespace spots
