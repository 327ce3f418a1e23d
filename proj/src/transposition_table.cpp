#include "spots/transposition_table.hpp"

#include <algorithm>
#include <functional>

namespace spots {

TranspositionTable::TranspositionTable(std::size_t capacity, std::size_t shards) : capacity_(std::max<std::size_t>(capacity, 1)) {
    if (shards == 0) shards = capacity_ >= (std::size_t{1} << 16) ? 64 : 1;
    shard_count_ = shards;
    shards_ = std::make_unique<Shard[]>(shard_count_);
    for (std::size_t i = 0; i < shard_count_; ++i)
        shards_[i].capacity = std::max<std::size_t>(1, capacity_ / shard_count_ + (i < capacity_ % shard_count_ ? 1 : 0));
}

TranspositionTable::Shard& TranspositionTable::shard_of(const std::string& key) const {
    return shards_[std::hash<std::string>{}(key) % shard_count_];
}

std::optional<TTEntry> TranspositionTable::lookup(const std::string& key) const {
    Shard& shard = shard_of(key);
    std::lock_guard lock(shard.mutex);
    if (auto it = shard.map.find(key); it != shard.map.end()) return it->second;
    return std::nullopt;
}

void TranspositionTable::collect(Shard& shard) {
    const std::size_t target = shard.capacity * 4 / 5;
    const std::size_t remove = shard.map.size() - std::min(shard.map.size(), target);
    if (remove == 0) return;
    using Item = std::pair<std::pair<bool, std::uint64_t>, std::unordered_map<std::string, TTEntry>::iterator>;
    std::vector<Item> items;
    items.reserve(shard.map.size());
    for (auto it = shard.map.begin(); it != shard.map.end(); ++it)
        items.push_back({{it->second.numbers.is_solved(), it->second.effort}, it});
    std::nth_element(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(remove) - 1, items.end(),
                     [](const Item& a, const Item& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < remove; ++i) shard.map.erase(items[i].second);
    size_.fetch_sub(remove, std::memory_order_relaxed);
    evictions_.fetch_add(remove, std::memory_order_relaxed);
}

bool TranspositionTable::store(const std::string& key, ProofNumbers numbers, std::uint64_t effort) {
    Shard& shard = shard_of(key);
    std::lock_guard lock(shard.mutex);
    auto it = shard.map.find(key);
    if (it != shard.map.end()) {
        TTEntry& e = it->second;
        e.effort += effort;
        if (e.numbers.is_solved()) return false;
        e.numbers = numbers;
        return numbers.is_solved();
    }
    if (shard.map.size() >= shard.capacity) collect(shard);
    shard.map.emplace(key, TTEntry{numbers, effort});
    const std::size_t now = size_.fetch_add(1, std::memory_order_relaxed) + 1;
    std::size_t prev = peak_.load(std::memory_order_relaxed);
    while (now > prev && !peak_.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
    }
    return numbers.is_solved();
}

}  // namespace spots
