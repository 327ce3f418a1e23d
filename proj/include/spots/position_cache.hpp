#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/proof_number.hpp"

namespace spots {

/// Bounded, thread-safe memo of Game::children, since depth-first searches
/// revisit the same positions many times.
class ChildrenCache {
public:
    using Children = std::shared_ptr<const std::vector<PositionKey>>;

    ChildrenCache(const Game& game, std::size_t capacity) : game_(game), per_shard_(capacity / kShards + 1) {}

    const Game& game() const { return game_; }
    Children children(const PositionKey& position);

private:
    static constexpr std::size_t kShards = 16;
    struct Shard {
        std::mutex mutex;
        std::unordered_map<PositionKey, Children> map;
    };

    const Game& game_;
    std::size_t per_shard_;
    std::array<Shard, kShards> shards_;
};

/// How a couple P + *n is searched.
enum class NodeKind : std::uint8_t { kAtomic, kSum, kGrundy };

/// Decomposition of a sum couple, with pairs of equal components cancelled.
/// The residual is the component with the longest key (the last one on ties)
/// so it stays the same for a given position no matter what the Grundy
/// database knows. No components left means the sum has value 0.
struct SumPlan {
    std::vector<PositionKey> components;
    std::size_t residual = 0;
};

NodeKind couple_kind(const Game& game, const Couple& c, std::vector<PositionKey>* components = nullptr);
SumPlan plan_sum(std::vector<PositionKey> components);

/// Value of P + *n if gn(P) is known: win iff gn(P) != n.
std::optional<Outcome> known_outcome(const GrundyDatabase& db, const Couple& c);

}  // namespace spots
