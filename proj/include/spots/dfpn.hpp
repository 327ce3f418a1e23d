#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/position_cache.hpp"
#include "spots/proof_number.hpp"
#include "spots/search.hpp"
#include "spots/transposition_table.hpp"

namespace spots {

class ThreadRegistry;

/// Thresholds of a node on the explored path. The search stays below a node
/// while descend_condition holds.
struct ThresholdSet {
    PnValue pt = kInf;
    PnValue dt = kInf;
    PnValue mt = kInf;
    PnValue ps = 0;
    PnValue ds = 0;

    static constexpr ThresholdSet root() { return {}; }
    friend constexpr bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

/// pn < pt and dn < dt and min{pn + ps, dn + ds} < mt.
bool descend_condition(ProofNumbers numbers, const ThresholdSet& t);

/// min{pt, dt, mt - min{ps, ds}}: what a sum without residual may spend.
PnValue sum_budget(const ThresholdSet& t);

/// Thresholds of child w of an atomic node v. `second_dn` is the smallest dn
/// among the other children (infinite if there is none); `w_threads` is the
/// number of other threads working below w.
ThresholdSet child_thresholds_atomic(const ThresholdSet& v, ProofNumbers v_numbers, ProofNumbers w,
                                     PnValue second_dn, unsigned w_threads = 0);

/// Thresholds of the child of a sum: copied once the residual exists,
/// otherwise only mt constrains the component being worked on.
ThresholdSet child_thresholds_decomposable(const ThresholdSet& v, ProofNumbers v_numbers, ProofNumbers w,
                                           bool residual);

struct DfpnProgress {
    ProofNumbers root;
    std::uint64_t expansions = 0;
};

/// Depth-first proof-number search with Grundy numbers. Keeps its children
/// cache between runs; the table and database belong to the caller and may
/// be shared with other searches.
class DfpnSearch {
public:
    using ProgressFn = std::function<void(const DfpnProgress&)>;

    DfpnSearch(const Game& game, TranspositionTable& tt, GrundyDatabase& db, SearchConfig config = {});
    ~DfpnSearch();
    DfpnSearch(const DfpnSearch&) = delete;
    DfpnSearch& operator=(const DfpnSearch&) = delete;

    /// Searches until the root is solved, `budget` expansions were spent in
    /// this run (0 = unlimited) or the stop flag is raised. `progress` runs
    /// every `period` expansions, on whichever search thread made them.
    ProofNumbers run(const Couple& root, unsigned threads, std::uint64_t budget, ProgressFn progress = {},
                     std::uint64_t period = 0);

    /// Table entry, or what the search would start from for this couple.
    ProofNumbers numbers_of(const Couple& c) const;
    /// Children of an atomic couple with their current numbers.
    std::vector<std::pair<Couple, ProofNumbers>> child_numbers(const Couple& c) const;

    std::uint64_t expansions() const { return expansions_.load(); }
    std::uint64_t invariant_violations() const { return violations_.load(); }
    /// Expansions made below a frame whose key another thread had solved.
    std::uint64_t late_expansions() const { return late_.load(); }
    std::size_t max_depth() const { return max_depth_.load(); }
    bool stopped() const { return stopped_; }
    const ThreadRegistry* registry() const { return registry_.get(); }
    const SearchConfig& config() const { return config_; }

private:
    friend class DfpnWorker;
    struct Slot;

    Slot make_slot(Couple c) const;
    bool halted() const { return halt_.load(std::memory_order_relaxed); }

    const Game& game_;
    TranspositionTable& tt_;
    GrundyDatabase& db_;
    SearchConfig config_;
    mutable ChildrenCache cache_;
    std::unique_ptr<ThreadRegistry> registry_;

    std::atomic<std::uint64_t> expansions_{0};
    std::atomic<std::uint64_t> violations_{0};
    std::atomic<std::uint64_t> late_{0};
    std::atomic<std::size_t> max_depth_{0};
    std::atomic<bool> halt_{false};
    bool stopped_ = false;

    std::uint64_t run_start_ = 0;
    std::uint64_t budget_ = 0;
    ProgressFn progress_;
    std::uint64_t period_ = 0;
    std::mutex root_mutex_;
    ProofNumbers root_numbers_;
};

SolveResult dfpn_solve(const Couple& root, const Game& game, TranspositionTable& tt, GrundyDatabase& db,
                       const SearchConfig& config = {});

}  // namespace spots
