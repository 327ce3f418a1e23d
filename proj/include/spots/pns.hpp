#pragma once

#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/position_cache.hpp"
#include "spots/proof_number.hpp"
#include "spots/search.hpp"

namespace spots {

/// Every reachable leaf is locked by a running job.
class NoUnsolvedLeaf : public std::runtime_error {
public:
    NoUnsolvedLeaf() : std::runtime_error("no unlocked unsolved leaf") {}
};

struct PnsNode {
    NodeKind kind = NodeKind::kAtomic;
    Couple couple;  // Grundy nodes: couple.position is the component, nim unused
    std::string key;  // couple key, or the component for Grundy nodes
    ProofNumbers numbers;
    bool expanded = false;
    std::vector<PnsNode*> children;
    std::vector<PnsNode*> parents;
    std::uint32_t lock_count = 0;

    // Grundy nodes: children are couple.position + *0, *1, ... in order.
    std::optional<NimValue> grundy;

    // Sum nodes: children are the Grundy nodes of the non-residual
    // components with unknown value, then the residual couple once created.
    SumPlan plan;
    NimValue known_xor = 0;
    PnsNode* residual = nullptr;

    bool solved() const { return kind == NodeKind::kGrundy ? grundy.has_value() : numbers.is_solved(); }
};

/// Numbers a worker reports for one child of a finished job.
struct ChildReport {
    std::string key;  // couple key
    ProofNumbers numbers;
};

/// Best-first proof-number search over a DAG of couples, with Grundy nodes
/// for the components of sums.
class PnsTree {
public:
    PnsTree(const Game& game, GrundyDatabase& db, SearchConfig config = {});

    PnsNode* set_root(const Couple& root);
    PnsNode* root() const { return root_; }
    PnsNode* find(const Couple& c) const;

    /// Path from the root to the most-proving leaf, skipping locked nodes.
    /// Throws NoUnsolvedLeaf when every candidate is locked.
    std::vector<PnsNode*> select_mpn();
    std::optional<std::vector<PnsNode*>> try_select_mpn();

    void expand(PnsNode* leaf);
    /// Expands `leaf` and seeds fresh children with externally computed numbers.
    void expand_with(PnsNode* leaf, const std::vector<ChildReport>& children);
    /// Recomputes the path's leaf and every ancestor whose numbers change.
    void backpropagate(const std::vector<PnsNode*>& path);
    void update_from(PnsNode* node);

    /// Overwrites the numbers of an unexpanded leaf (job progress).
    void set_leaf_numbers(PnsNode* leaf, ProofNumbers numbers);
    /// Marks an atomic node solved from outside evidence and propagates.
    void resolve(PnsNode* node, ProofNumbers solved);
    void lock(PnsNode* node) { ++node->lock_count; }
    void unlock(PnsNode* node) {
        if (node->lock_count) --node->lock_count;
    }

    /// True if `node` satisfies the equation of its kind.
    bool consistent(const PnsNode* node) const;

    std::size_t node_count() const { return couples_.size() + grundy_.size(); }
    std::uint64_t expansions() const { return expansions_; }
    const GrundyDatabase& database() const { return db_; }

private:
    PnsNode* couple_node(const Couple& c, PnsNode* parent);
    PnsNode* grundy_node(const PositionKey& position, PnsNode* parent);
    void link(PnsNode* parent, PnsNode* child);
    bool recompute(PnsNode* node);
    bool select_into(PnsNode* node, std::vector<PnsNode*>& path);
    ProofNumbers masked(const PnsNode* node) const;
    std::vector<PnsNode*> ordered_atomic_candidates(const PnsNode* node);
    void record_loss(const PnsNode* node);

    const Game& game_;
    GrundyDatabase& db_;
    SearchConfig config_;
    std::mt19937_64 rng_;
    std::unordered_map<std::string, std::unique_ptr<PnsNode>> couples_;
    std::unordered_map<PositionKey, std::unique_ptr<PnsNode>> grundy_;
    PnsNode* root_ = nullptr;
    std::uint64_t expansions_ = 0;
};

SolveResult pns_solve(const Couple& root, const Game& game, GrundyDatabase& db, const SearchConfig& config = {});

}  // namespace spots
