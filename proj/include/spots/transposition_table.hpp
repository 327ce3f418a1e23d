#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spots/proof_number.hpp"

namespace spots {

struct TTEntry {
    ProofNumbers numbers;
    std::uint64_t effort = 0;  // expansions spent below the node
};

/// Bounded map from couple key to proof numbers. When full, the unsolved
/// entries with the least effort go first, down to 80% of the capacity;
/// solved entries are only dropped when nothing else is left.
///
/// The table is split into independently locked shards; each holds at most
/// its share of the capacity, so the total never exceeds it.
class TranspositionTable {
public:
    explicit TranspositionTable(std::size_t capacity, std::size_t shards = 0);

    std::optional<TTEntry> lookup(const std::string& key) const;
    /// Adds `effort` to the entry's effort. A solved entry is never replaced
    /// by unsolved numbers. Returns true if the key became solved.
    bool store(const std::string& key, ProofNumbers numbers, std::uint64_t effort);

    std::size_t size() const { return size_.load(std::memory_order_relaxed); }
    std::size_t peak() const { return peak_.load(std::memory_order_relaxed); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t evictions() const { return evictions_.load(std::memory_order_relaxed); }

private:
    struct Shard {
        mutable std::mutex mutex;
        std::unordered_map<std::string, TTEntry> map;
        std::size_t capacity = 0;
    };
    Shard& shard_of(const std::string& key) const;
    void collect(Shard& shard);

    std::size_t capacity_;
    std::unique_ptr<Shard[]> shards_;
    std::size_t shard_count_;
    std::atomic<std::size_t> size_{0};
    std::atomic<std::size_t> peak_{0};
    std::atomic<std::uint64_t> evictions_{0};
};

}  // namespace spots
