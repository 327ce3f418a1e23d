#include "spots/pns.hpp"

#include <algorithm>
#include <tuple>
#include <chrono>
#include <deque>

namespace spots {

PnsTree::PnsTree(const Game& game, GrundyDatabase& db, SearchConfig config)
    : game_(game), db_(db), config_(config), rng_(config.seed) {}

PnsNode* PnsTree::set_root(const Couple& root) {
    root_ = couple_node(root, nullptr);
    return root_;
}

PnsNode* PnsTree::find(const Couple& c) const {
    auto it = couples_.find(couple_key(c));
    return it == couples_.end() ? nullptr : it->second.get();
}

void PnsTree::link(PnsNode* parent, PnsNode* child) {
    if (!parent) return;
    parent->children.push_back(child);
    if (std::find(child->parents.begin(), child->parents.end(), parent) == child->parents.end())
        child->parents.push_back(parent);
}

PnsNode* PnsTree::couple_node(const Couple& c, PnsNode* parent) {
    auto key = couple_key(c);
    auto it = couples_.find(key);
    if (it == couples_.end()) {
        auto node = std::make_unique<PnsNode>();
        node->couple = c;
        node->key = key;
        std::vector<PositionKey> parts;
        node->kind = couple_kind(game_, c, &parts);
        if (node->kind == NodeKind::kSum) {
            node->plan = plan_sum(std::move(parts));
            if (node->plan.components.empty()) {
                node->numbers = c.nim == 0 ? ProofNumbers::disproved() : ProofNumbers::proved();
                node->expanded = true;
            }
        } else if (c.nim == 0 && game_.is_terminal(c.position)) {
            node->numbers = ProofNumbers::disproved();
            node->expanded = true;
        } else if (auto known = known_outcome(db_, c)) {
            node->numbers = *known == Outcome::kWin ? ProofNumbers::proved() : ProofNumbers::disproved();
        }
        it = couples_.emplace(std::move(key), std::move(node)).first;
    }
    link(parent, it->second.get());
    return it->second.get();
}

PnsNode* PnsTree::grundy_node(const PositionKey& position, PnsNode* parent) {
    auto it = grundy_.find(position);
    if (it == grundy_.end()) {
        auto node = std::make_unique<PnsNode>();
        node->kind = NodeKind::kGrundy;
        node->couple = Couple{position, 0};
        node->key = position;
        if (auto g = db_.find(position)) {
            node->grundy = *g;
            node->numbers = {0, 0};
        }
        it = grundy_.emplace(position, std::move(node)).first;
    }
    link(parent, it->second.get());
    return it->second.get();
}

void PnsTree::expand(PnsNode* leaf) {
    if (leaf->expanded || leaf->solved()) return;
    ++expansions_;
    switch (leaf->kind) {
        case NodeKind::kAtomic: {
            const Couple& c = leaf->couple;
            if (!c.position.empty())
                for (auto& child : game_.children(c.position)) couple_node(Couple{std::move(child), c.nim}, leaf);
            for (NimValue n = 0; n < c.nim; ++n) couple_node(Couple{c.position, n}, leaf);
            break;
        }
        case NodeKind::kSum: {
            leaf->known_xor = leaf->couple.nim;
            for (std::size_t i = 0; i < leaf->plan.components.size(); ++i) {
                if (i == leaf->plan.residual) continue;
                const auto& part = leaf->plan.components[i];
                if (auto g = db_.find(part))
                    leaf->known_xor ^= *g;
                else
                    grundy_node(part, leaf);
            }
            break;
        }
        case NodeKind::kGrundy:
            couple_node(Couple{leaf->couple.position, 0}, leaf);
            break;
    }
    leaf->expanded = true;
    recompute(leaf);
}

void PnsTree::expand_with(PnsNode* leaf, const std::vector<ChildReport>& children) {
    if (leaf->solved()) return;
    expand(leaf);
    std::vector<PnsNode*> seeded;
    for (const auto& report : children) {
        auto it = couples_.find(report.key);
        if (it == couples_.end()) continue;
        PnsNode* child = it->second.get();
        if (!child->expanded && !child->solved() && child->numbers != report.numbers) {
            child->numbers = report.numbers;
            if (report.numbers.is_disproved()) record_loss(child);
            seeded.push_back(child);
        }
    }
    recompute(leaf);
    // children may be shared with other parents elsewhere in the DAG
    for (PnsNode* child : seeded)
        for (PnsNode* p : child->parents)
            if (p != leaf) update_from(p);
}

void PnsTree::record_loss(const PnsNode* node) {
    if (node->kind == NodeKind::kAtomic && !node->couple.position.empty())
        db_.insert(node->couple.position, node->couple.nim);
}

void PnsTree::set_leaf_numbers(PnsNode* leaf, ProofNumbers numbers) {
    if (leaf->expanded || leaf->solved()) return;
    leaf->numbers = numbers;
    if (numbers.is_disproved()) record_loss(leaf);
}

void PnsTree::resolve(PnsNode* node, ProofNumbers solved) {
    if (node->solved() || !solved.is_solved() || node->kind != NodeKind::kAtomic) return;
    node->numbers = solved;
    if (solved.is_disproved()) record_loss(node);
    for (PnsNode* p : node->parents) update_from(p);
}

bool PnsTree::recompute(PnsNode* node) {
    if (!node->expanded || node->solved()) return false;
    const ProofNumbers before = node->numbers;
    switch (node->kind) {
        case NodeKind::kAtomic: {
            PnValue pn = kInf;
            PnValue dn = 0;
            for (const PnsNode* c : node->children) {
                pn = std::min(pn, c->numbers.dn);
                dn += c->numbers.pn;
            }
            node->numbers = {pn, dn};
            if (node->numbers.is_disproved()) record_loss(node);
            break;
        }
        case NodeKind::kGrundy: {
            while (true) {
                PnsNode* last = node->children.back();
                if (last->numbers.is_proved()) {
                    couple_node(Couple{node->couple.position, last->couple.nim + 1}, node);
                    continue;
                }
                if (last->numbers.is_disproved()) {
                    node->grundy = last->couple.nim;
                    node->numbers = {0, 0};
                    db_.insert(node->couple.position, last->couple.nim);
                } else {
                    const PnValue m = std::min(last->numbers.pn, last->numbers.dn);
                    node->numbers = {m, m};
                }
                break;
            }
            return node->numbers != before || node->grundy.has_value();
        }
        case NodeKind::kSum: {
            if (!node->residual) {
                PnValue sum = 0;
                NimValue x = node->known_xor;
                bool all_known = true;
                for (const PnsNode* u : node->children) {
                    if (u->grundy)
                        x ^= *u->grundy;
                    else
                        all_known = false;
                    sum += u->numbers.pn;
                }
                if (!all_known) {
                    node->numbers = {sum, sum};
                    break;
                }
                node->residual = couple_node(Couple{node->plan.components[node->plan.residual], x}, node);
            }
            node->numbers = node->residual->numbers;
            break;
        }
    }
    return node->numbers != before;
}

void PnsTree::update_from(PnsNode* start) {
    std::deque<PnsNode*> work;
    recompute(start);
    for (PnsNode* p : start->parents) work.push_back(p);
    while (!work.empty()) {
        PnsNode* node = work.front();
        work.pop_front();
        if (recompute(node))
            for (PnsNode* p : node->parents) work.push_back(p);
    }
}

void PnsTree::backpropagate(const std::vector<PnsNode*>& path) {
    if (!path.empty()) update_from(path.back());
}

ProofNumbers PnsTree::masked(const PnsNode* node) const {
    return node->lock_count ? ProofNumbers{kInf, kInf} : node->numbers;
}

std::vector<PnsNode*> PnsTree::ordered_atomic_candidates(const PnsNode* node) {
    std::vector<PnsNode*> out;
    for (PnsNode* c : node->children)
        if (!c->solved() && !c->lock_count) out.push_back(c);
    switch (config_.tie_break) {
        case TieBreak::kKeyOrder:
            std::sort(out.begin(), out.end(), [](const PnsNode* a, const PnsNode* b) {
                return std::tie(a->numbers.dn, a->key) < std::tie(b->numbers.dn, b->key);
            });
            break;
        case TieBreak::kRandom:
            std::shuffle(out.begin(), out.end(), rng_);
            std::stable_sort(out.begin(), out.end(),
                             [](const PnsNode* a, const PnsNode* b) { return a->numbers.dn < b->numbers.dn; });
            break;
        case TieBreak::kHeuristic: {
            std::vector<std::pair<std::uint64_t, PnsNode*>> ranked;
            for (PnsNode* c : out) ranked.emplace_back(game_.heuristic_rank(c->couple.position), c);
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                return std::tie(a.second->numbers.dn, a.first, a.second->key) <
                       std::tie(b.second->numbers.dn, b.first, b.second->key);
            });
            for (std::size_t i = 0; i < ranked.size(); ++i) out[i] = ranked[i].second;
            break;
        }
    }
    return out;
}

bool PnsTree::select_into(PnsNode* node, std::vector<PnsNode*>& path) {
    if (node->lock_count || node->solved()) return false;
    path.push_back(node);
    if (!node->expanded) return true;
    switch (node->kind) {
        case NodeKind::kAtomic:
            for (PnsNode* c : ordered_atomic_candidates(node))
                if (select_into(c, path)) return true;
            break;
        case NodeKind::kGrundy:
            if (select_into(node->children.back(), path)) return true;
            break;
        case NodeKind::kSum:
            if (node->residual) {
                if (select_into(node->residual, path)) return true;
                break;
            }
            {
                std::vector<PnsNode*> candidates;
                for (PnsNode* u : node->children)
                    if (!u->solved()) candidates.push_back(u);
                if (config_.component_policy == ComponentPolicy::kMinProofNumber)
                    std::stable_sort(candidates.begin(), candidates.end(), [this](const PnsNode* a, const PnsNode* b) {
                        return masked(a).pn < masked(b).pn;
                    });
                for (PnsNode* u : candidates)
                    if (select_into(u, path)) return true;
            }
            break;
    }
    path.pop_back();
    return false;
}

std::optional<std::vector<PnsNode*>> PnsTree::try_select_mpn() {
    std::vector<PnsNode*> path;
    if (!root_ || !select_into(root_, path)) return std::nullopt;
    return path;
}

std::vector<PnsNode*> PnsTree::select_mpn() {
    auto path = try_select_mpn();
    if (!path) throw NoUnsolvedLeaf();
    return std::move(*path);
}

bool PnsTree::consistent(const PnsNode* node) const {
    if (!node->expanded || node->solved()) return true;
    switch (node->kind) {
        case NodeKind::kAtomic: {
            PnValue pn = kInf;
            PnValue dn = 0;
            for (const PnsNode* c : node->children) {
                pn = std::min(pn, c->numbers.dn);
                dn += c->numbers.pn;
            }
            return node->numbers == ProofNumbers{pn, dn};
        }
        case NodeKind::kGrundy: {
            const PnsNode* last = node->children.back();
            const PnValue m = std::min(last->numbers.pn, last->numbers.dn);
            return node->numbers == ProofNumbers{m, m};
        }
        case NodeKind::kSum: {
            if (node->residual) return node->numbers == node->residual->numbers;
            PnValue sum = 0;
            for (const PnsNode* u : node->children) sum += u->numbers.pn;
            return node->numbers == ProofNumbers{sum, sum};
        }
    }
    return true;
}

SolveResult pns_solve(const Couple& root, const Game& game, GrundyDatabase& db, const SearchConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    PnsTree tree(game, db, config);
    PnsNode* r = tree.set_root(root);
    SearchStats stats;
    while (!r->solved()) {
        if (config.stop && config.stop->load()) throw SearchStopped();
        if (config.budget && tree.expansions() >= config.budget) throw BudgetExceeded(tree.expansions());
        auto path = tree.select_mpn();
        tree.expand(path.back());
        tree.backpropagate(path);
        if (config.check_invariants)
            for (const PnsNode* n : path)
                if (!tree.consistent(n)) ++stats.invariant_violations;
    }
    stats.outcome = r->numbers.is_proved() ? Outcome::kWin : Outcome::kLoss;
    stats.expansions = tree.expansions();
    stats.peak_nodes = tree.node_count();
    stats.gn_count = db.size();
    stats.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {stats.outcome, stats};
}

}  // namespace spots
