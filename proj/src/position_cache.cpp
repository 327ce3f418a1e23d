#include "spots/position_cache.hpp"

#include <algorithm>
#include <functional>

namespace spots {

ChildrenCache::Children ChildrenCache::children(const PositionKey& position) {
    Shard& shard = shards_[std::hash<PositionKey>{}(position) % kShards];
    {
        std::lock_guard lock(shard.mutex);
        if (auto it = shard.map.find(position); it != shard.map.end()) return it->second;
    }
    auto computed = std::make_shared<const std::vector<PositionKey>>(game_.children(position));
    std::lock_guard lock(shard.mutex);
    if (shard.map.size() >= per_shard_) shard.map.erase(shard.map.begin());
    shard.map.emplace(position, computed);
    return computed;
}

NodeKind couple_kind(const Game& game, const Couple& c, std::vector<PositionKey>* components) {
    if (c.position.empty()) return NodeKind::kAtomic;
    auto parts = game.decompose(c.position);
    if (parts.size() < 2) return NodeKind::kAtomic;
    if (components) *components = std::move(parts);
    return NodeKind::kSum;
}

SumPlan plan_sum(std::vector<PositionKey> components) {
    // Equal components cancel: gn(Q) ^ gn(Q) = 0.
    std::sort(components.begin(), components.end());
    SumPlan plan;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i + 1 < components.size() && components[i] == components[i + 1]) {
            ++i;
            continue;
        }
        plan.components.push_back(std::move(components[i]));
    }
    for (std::size_t i = 1; i < plan.components.size(); ++i)
        if (plan.components[i].size() >= plan.components[plan.residual].size()) plan.residual = i;
    return plan;
}

std::optional<Outcome> known_outcome(const GrundyDatabase& db, const Couple& c) {
    if (c.position.empty()) return c.nim == 0 ? Outcome::kLoss : Outcome::kWin;
    auto g = db.find(c.position);
    if (!g) return std::nullopt;
    return *g == c.nim ? Outcome::kLoss : Outcome::kWin;
}

}  // namespace spots
