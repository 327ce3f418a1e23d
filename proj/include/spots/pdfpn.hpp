#pragma once

#include <array>
#include <atomic>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "spots/dfpn.hpp"

namespace spots {

/// Which keys each search thread currently has on its path, plus the
/// per-thread backtrack requests raised when one of those keys gets solved.
class ThreadRegistry {
public:
    static constexpr std::size_t kNoAbort = std::numeric_limits<std::size_t>::max();

    explicit ThreadRegistry(unsigned threads);

    void push(unsigned thread, const std::string& key);
    void pop(unsigned thread);

    /// Number of threads whose path contains `key`.
    unsigned count(const std::string& key) const;

    /// Asks every other thread with `key` on its path to unwind to the frame
    /// holding it. Returns how many threads were signalled.
    std::size_t notify_solved(const std::string& key, unsigned from = std::numeric_limits<unsigned>::max());

    /// Shallowest path depth the thread was asked to unwind to.
    std::size_t abort_depth(unsigned thread) const { return threads_[thread].abort.load(std::memory_order_acquire); }
    void clear_abort(unsigned thread) { threads_[thread].abort.store(kNoAbort, std::memory_order_release); }

    std::size_t path_length(unsigned thread) const;
    unsigned threads() const { return static_cast<unsigned>(threads_.size()); }
    /// True when no counter is left over.
    bool balanced() const;

private:
    struct PerThread {
        mutable std::mutex mutex;
        std::vector<std::string> path;
        std::atomic<std::size_t> abort{kNoAbort};
    };
    static constexpr std::size_t kShards = 16;
    struct Shard {
        mutable std::mutex mutex;
        std::unordered_map<std::string, unsigned> counts;
    };
    Shard& shard_of(const std::string& key) const;

    std::vector<PerThread> threads_;
    mutable std::array<Shard, kShards> shards_;
};

/// dn + th(key): disproof numbers look larger while other threads work there.
PnValue effective_dn(const std::string& key, PnValue dn, const ThreadRegistry& registry);

/// min{pt(v), dn(w2) + 1 - th(w)}, floored at 0.
PnValue adjusted_dt(PnValue pt_v, PnValue dn_w2, unsigned th_w);

/// `threads` depth-first searchers sharing `tt`, `db` and a registry.
SolveResult pdfpn_solve(const Couple& root, const Game& game, TranspositionTable& tt, GrundyDatabase& db,
                        unsigned threads, const SearchConfig& config = {});

}  // namespace spots
