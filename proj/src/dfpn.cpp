#include "spots/dfpn.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

#include "spots/pdfpn.hpp"

namespace spots {

bool descend_condition(ProofNumbers n, const ThresholdSet& t) {
    return n.pn < t.pt && n.dn < t.dt && std::min(n.pn + t.ps, n.dn + t.ds) < t.mt;
}

PnValue sum_budget(const ThresholdSet& t) { return std::min({t.pt, t.dt, t.mt - std::min(t.ps, t.ds)}); }

ThresholdSet child_thresholds_atomic(const ThresholdSet& v, ProofNumbers v_numbers, ProofNumbers w,
                                     PnValue second_dn, unsigned w_threads) {
    ThresholdSet out;
    out.pt = v.dt - v_numbers.dn + w.pn;
    out.dt = adjusted_dt(v.pt, second_dn, w_threads);
    out.mt = v.mt;
    out.ps = v.ds + v_numbers.dn - w.pn;
    out.ds = v.ps;
    return out;
}

ThresholdSet child_thresholds_decomposable(const ThresholdSet& v, ProofNumbers v_numbers, ProofNumbers w,
                                           bool residual) {
    if (residual) return v;
    ThresholdSet out;
    out.pt = kInf;
    out.dt = kInf;
    out.mt = sum_budget(v) - v_numbers.pn + std::min(w.pn, w.dn);
    out.ps = 0;
    out.ds = 0;
    return out;
}

struct DfpnSearch::Slot {
    Couple couple;
    std::string key;
    ProofNumbers numbers;
};

DfpnSearch::Slot DfpnSearch::make_slot(Couple c) const {
    Slot s;
    s.key = couple_key(c);
    s.couple = std::move(c);
    s.numbers = numbers_of(s.couple);
    return s;
}

ProofNumbers DfpnSearch::numbers_of(const Couple& c) const {
    if (auto e = tt_.lookup(couple_key(c))) return e->numbers;
    auto solved = [](bool win) { return win ? ProofNumbers::proved() : ProofNumbers::disproved(); };
    if (c.position.empty()) return solved(c.nim != 0);
    std::vector<PositionKey> parts;
    if (couple_kind(game_, c, &parts) == NodeKind::kAtomic) {
        if (c.nim == 0 && game_.is_terminal(c.position)) return ProofNumbers::disproved();
        if (auto known = known_outcome(db_, c)) return solved(*known == Outcome::kWin);
        return ProofNumbers::leaf();
    }
    NimValue x = c.nim;
    for (const auto& part : plan_sum(std::move(parts)).components) {
        auto g = db_.find(part);
        if (!g) return ProofNumbers::leaf();
        x ^= *g;
    }
    return solved(x != 0);
}

std::vector<std::pair<Couple, ProofNumbers>> DfpnSearch::child_numbers(const Couple& c) const {
    std::vector<std::pair<Couple, ProofNumbers>> out;
    if (!c.position.empty())
        for (const auto& child : *cache_.children(c.position)) {
            Couple cc{child, c.nim};
            auto n = numbers_of(cc);
            out.emplace_back(std::move(cc), n);
        }
    for (NimValue n = 0; n < c.nim; ++n) {
        Couple cc{c.position, n};
        auto nn = numbers_of(cc);
        out.emplace_back(std::move(cc), nn);
    }
    return out;
}

/// One search thread.
class DfpnWorker {
public:
    DfpnWorker(DfpnSearch& s, unsigned ordinal, unsigned threads)
        : s_(s), ordinal_(ordinal), shared_(threads > 1), rng_(s.config_.seed + ordinal) {}

    void drive(const DfpnSearch::Slot& root);

private:
    using Slot = DfpnSearch::Slot;
    struct Part {
        NimValue cursor = 0;
        std::optional<NimValue> gn;
        Slot current;
    };
    struct Frame {
        NodeKind kind = NodeKind::kAtomic;
        std::size_t depth = 0;
        ThresholdSet th;
        ProofNumbers numbers;
        std::vector<Slot> children;      // atomic
        std::vector<std::size_t> order;  // tie-break order of children
        SumPlan plan;                    // sum
        NimValue known_xor = 0;
        std::vector<std::pair<PositionKey, Part>> parts;
        std::optional<Slot> residual;
    };

    ProofNumbers mid(const Slot& node, const ThresholdSet& th, std::size_t depth);
    void setup(Frame& f, const Slot& node);
    void refresh(Frame& f);
    void refresh_slot(Slot& slot) const;
    void refresh_parts(Frame& f);
    std::size_t select_atomic(const Frame& f, PnValue& second, unsigned& w_threads, bool& fallback);
    std::size_t select_part(const Frame& f) const;
    bool aborted_at(std::size_t depth) const;
    void violation() {
        if (!shared_) s_.violations_.fetch_add(1, std::memory_order_relaxed);
    }

    DfpnSearch& s_;
    unsigned ordinal_;
    bool shared_;
    std::mt19937_64 rng_;
    std::uint64_t local_expansions_ = 0;
};

bool DfpnWorker::aborted_at(std::size_t depth) const {
    return s_.registry_ && s_.registry_->abort_depth(ordinal_) <= depth;
}

void DfpnWorker::refresh_slot(Slot& slot) const {
    if (slot.numbers.is_solved()) return;
    if (auto e = s_.tt_.lookup(slot.key)) slot.numbers = e->numbers;
}

void DfpnWorker::setup(Frame& f, const Slot& node) {
    const Couple& c = node.couple;
    std::vector<PositionKey> parts;
    f.kind = couple_kind(s_.game_, c, &parts);
    if (f.kind == NodeKind::kAtomic) {
        if (!c.position.empty()) {
            auto kids = s_.cache_.children(c.position);
            f.children.reserve(kids->size() + c.nim);
            for (const auto& k : *kids) f.children.push_back(s_.make_slot(Couple{k, c.nim}));
        }
        for (NimValue n = 0; n < c.nim; ++n) f.children.push_back(s_.make_slot(Couple{c.position, n}));
        f.order.resize(f.children.size());
        std::iota(f.order.begin(), f.order.end(), 0);
        auto by_key = [&](std::size_t a, std::size_t b) { return f.children[a].key < f.children[b].key; };
        switch (s_.config_.tie_break) {
            case TieBreak::kKeyOrder:
                std::sort(f.order.begin(), f.order.end(), by_key);
                break;
            case TieBreak::kRandom:
                std::shuffle(f.order.begin(), f.order.end(), rng_);
                break;
            case TieBreak::kHeuristic: {
                std::vector<std::uint64_t> rank(f.children.size());
                for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = s_.game_.heuristic_rank(f.children[i].couple.position);
                std::sort(f.order.begin(), f.order.end(), [&](std::size_t a, std::size_t b) {
                    return rank[a] != rank[b] ? rank[a] < rank[b] : by_key(a, b);
                });
                break;
            }
        }
        return;
    }
    f.plan = plan_sum(std::move(parts));
    f.known_xor = c.nim;
    for (std::size_t i = 0; i < f.plan.components.size(); ++i) {
        if (i == f.plan.residual) continue;
        const auto& q = f.plan.components[i];
        if (auto g = s_.db_.find(q)) {
            f.known_xor ^= *g;
            continue;
        }
        Part p;
        p.current = s_.make_slot(Couple{q, 0});
        f.parts.emplace_back(q, std::move(p));
    }
}

void DfpnWorker::refresh_parts(Frame& f) {
    bool all_known = true;
    for (auto& [q, part] : f.parts) {
        while (!part.gn) {
            if (auto g = s_.db_.find(q)) {
                part.gn = *g;
                break;
            }
            if (shared_) refresh_slot(part.current);
            if (part.current.numbers.is_proved()) {
                ++part.cursor;
                part.current = s_.make_slot(Couple{q, part.cursor});
            } else if (part.current.numbers.is_disproved()) {
                part.gn = part.cursor;
                s_.db_.insert(q, part.cursor);
            } else {
                break;
            }
        }
        all_known = all_known && part.gn.has_value();
    }
    if (all_known && !f.residual) {
        NimValue x = f.known_xor;
        for (const auto& entry : f.parts) x ^= *entry.second.gn;
        f.residual = s_.make_slot(Couple{f.plan.components[f.plan.residual], x});
    }
}

void DfpnWorker::refresh(Frame& f) {
    if (f.kind == NodeKind::kAtomic) {
        PnValue pn = kInf;
        PnValue dn = 0;
        for (auto& c : f.children) {
            if (shared_) refresh_slot(c);
            pn = std::min(pn, c.numbers.dn);
            dn += c.numbers.pn;
        }
        f.numbers = {pn, dn};
        return;
    }
    refresh_parts(f);
    if (f.residual) {
        if (shared_) refresh_slot(*f.residual);
        f.numbers = f.residual->numbers;
        return;
    }
    PnValue s = 0;
    for (const auto& entry : f.parts) {
        const auto& n = entry.second.current.numbers;
        if (!entry.second.gn) s += std::min(n.pn, n.dn);
    }
    f.numbers = {s, s};
}

std::size_t DfpnWorker::select_atomic(const Frame& f, PnValue& second, unsigned& w_threads, bool& fallback) {
    const ThreadRegistry* reg = s_.registry_.get();
    auto edn = [&](const Slot& c) { return reg ? effective_dn(c.key, c.numbers.dn, *reg) : c.numbers.dn; };
    std::vector<PnValue> values(f.children.size());
    for (std::size_t i : f.order) values[i] = edn(f.children[i]);
    PnValue best = kInf;
    for (std::size_t i : f.order) best = std::min(best, values[i]);
    std::vector<std::size_t> ties;
    for (std::size_t i : f.order)
        if (values[i] == best && !f.children[i].numbers.is_solved()) ties.push_back(i);
    if (ties.empty())
        for (std::size_t i : f.order)
            if (!f.children[i].numbers.is_solved()) ties.push_back(i);
    std::size_t w = ties.empty() ? f.order.front() : ties[f.depth == 0 ? ordinal_ % ties.size() : 0];
    second = kInf;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (i != w) second = std::min(second, values[i]);
    w_threads = reg ? reg->count(f.children[w].key) : 0;
    fallback = false;
    if (reg) {
        auto th = child_thresholds_atomic(f.th, f.numbers, f.children[w].numbers, second, w_threads);
        if (!descend_condition(f.children[w].numbers, th)) {
            // The virtual numbers steered away from a child the real ones
            // allow; fall back to the plain rule so the thread keeps moving.
            fallback = true;
            for (std::size_t i : f.order)
                if (f.children[i].numbers.dn == f.numbers.pn) {
                    w = i;
                    break;
                }
            second = kInf;
            for (std::size_t i = 0; i < f.children.size(); ++i)
                if (i != w) second = std::min(second, f.children[i].numbers.dn);
            w_threads = 0;
        }
    }
    return w;
}

std::size_t DfpnWorker::select_part(const Frame& f) const {
    std::size_t best = f.parts.size();
    PnValue best_value = kInf;
    for (std::size_t i = 0; i < f.parts.size(); ++i) {
        const auto& part = f.parts[i].second;
        if (part.gn) continue;
        if (s_.config_.component_policy == ComponentPolicy::kFirstUnsolved) return i;
        const PnValue v = std::min(part.current.numbers.pn, part.current.numbers.dn);
        if (best == f.parts.size() || v < best_value) {
            best = i;
            best_value = v;
        }
    }
    return best;
}

ProofNumbers DfpnWorker::mid(const Slot& node, const ThresholdSet& th, std::size_t depth) {
    if (s_.halted() || aborted_at(depth)) return node.numbers;
    if (s_.config_.stop && s_.config_.stop->load(std::memory_order_relaxed)) {
        s_.stopped_ = true;
        s_.halt_.store(true);
        return node.numbers;
    }
    const std::uint64_t count = s_.expansions_.fetch_add(1, std::memory_order_relaxed) + 1 - s_.run_start_;
    if (s_.budget_ && count > s_.budget_) {
        s_.expansions_.fetch_sub(1, std::memory_order_relaxed);  // not made
        s_.halt_.store(true);
        return node.numbers;
    }
    if (depth > 100000) throw std::logic_error("search path too deep: cycle in game graph?");
    std::size_t md = s_.max_depth_.load(std::memory_order_relaxed);
    while (depth > md && !s_.max_depth_.compare_exchange_weak(md, depth)) {
    }
    ++local_expansions_;
    const std::uint64_t effort_start = local_expansions_;

    Frame f;
    f.depth = depth;
    f.th = th;
    setup(f, node);
    if (s_.registry_) s_.registry_->push(ordinal_, node.key);

    if (s_.progress_ && s_.period_ && count % s_.period_ == 0) {
        refresh(f);
        if (depth == 0) {
            std::lock_guard lock(s_.root_mutex_);
            s_.root_numbers_ = f.numbers;
        }
        DfpnProgress p;
        {
            std::lock_guard lock(s_.root_mutex_);
            p.root = s_.root_numbers_;
        }
        p.expansions = count;
        s_.progress_(p);
    }

    bool settled = false;  // left the loop because the thresholds were exceeded
    for (;;) {
        if (s_.registry_) {
            const std::size_t abort = s_.registry_->abort_depth(ordinal_);
            if (abort < depth) break;
            if (abort == depth) {
                s_.registry_->clear_abort(ordinal_);
                if (auto e = s_.tt_.lookup(node.key); e && e->numbers.is_solved()) {
                    f.numbers = e->numbers;
                    break;
                }
            }
        }
        refresh(f);
        if (depth == 0) {
            std::lock_guard lock(s_.root_mutex_);
            s_.root_numbers_ = f.numbers;
        }
        if (f.kind == NodeKind::kAtomic && f.numbers.is_disproved() && !node.couple.position.empty())
            s_.db_.insert(node.couple.position, node.couple.nim);
        if (!descend_condition(f.numbers, f.th)) {
            settled = true;
            break;
        }
        if (s_.halted()) break;

        Slot* child = nullptr;
        ThresholdSet child_th;
        bool fallback = false;
        PnValue pn_before = 0;
        if (f.kind == NodeKind::kAtomic) {
            PnValue second;
            unsigned w_threads;
            const std::size_t w = select_atomic(f, second, w_threads, fallback);
            child = &f.children[w];
            if (s_.config_.check_invariants && f.th.ds + f.numbers.dn < child->numbers.pn) violation();
            child_th = child_thresholds_atomic(f.th, f.numbers, child->numbers, second, w_threads);
            pn_before = child->numbers.pn;
        } else if (f.residual) {
            child = &*f.residual;
            child_th = child_thresholds_decomposable(f.th, f.numbers, child->numbers, true);
        } else {
            const std::size_t i = select_part(f);
            child = &f.parts[i].second.current;
            child_th = child_thresholds_decomposable(f.th, f.numbers, child->numbers, false);
        }
        if (s_.config_.check_invariants && !descend_condition(child->numbers, child_th)) violation();
        const ProofNumbers v_before = f.numbers;
        child->numbers = mid(*child, child_th, depth + 1);

        if (s_.config_.check_invariants && !shared_ && f.kind == NodeKind::kAtomic) {
            // dn(v) before = dn(v) after + pn(w) before - pn(w) after
            PnValue dn_after = 0;
            for (const auto& c : f.children) dn_after += c.numbers.pn;
            if (!dn_after.is_inf() && !v_before.dn.is_inf() &&
                v_before.dn.value() + child->numbers.pn.value() != dn_after.value() + pn_before.value())
                violation();
        }
    }

    if (s_.config_.check_invariants && settled && descend_condition(f.numbers, f.th)) violation();
    const std::uint64_t effort = local_expansions_ - effort_start + 1;
    const bool now_solved = s_.tt_.store(node.key, f.numbers, effort);
    if (s_.registry_) {
        s_.registry_->pop(ordinal_);
        if (now_solved) s_.registry_->notify_solved(node.key, ordinal_);
    }
    return f.numbers;
}

void DfpnWorker::drive(const DfpnSearch::Slot& root) {
    Slot slot = root;
    while (!s_.halted() && !slot.numbers.is_solved()) {
        slot.numbers = mid(slot, ThresholdSet::root(), 0);
        if (s_.registry_ && s_.registry_->abort_depth(ordinal_) == 0) s_.registry_->clear_abort(ordinal_);
        if (slot.numbers.is_solved()) {
            s_.halt_.store(true);
            break;
        }
        if (auto e = s_.tt_.lookup(slot.key); e && e->numbers.is_solved()) {
            slot.numbers = e->numbers;
            s_.halt_.store(true);
        }
    }
}

DfpnSearch::DfpnSearch(const Game& game, TranspositionTable& tt, GrundyDatabase& db, SearchConfig config)
    : game_(game), tt_(tt), db_(db), config_(config), cache_(game, config.children_cache) {}

DfpnSearch::~DfpnSearch() = default;

ProofNumbers DfpnSearch::run(const Couple& root, unsigned threads, std::uint64_t budget, ProgressFn progress,
                             std::uint64_t period) {
    threads = std::max(threads, 1u);
    halt_.store(false);
    stopped_ = false;
    run_start_ = expansions_.load();
    budget_ = budget;
    progress_ = std::move(progress);
    period_ = period;
    registry_ = threads > 1 ? std::make_unique<ThreadRegistry>(threads) : nullptr;

    Slot slot = make_slot(root);
    root_numbers_ = slot.numbers;
    if (threads == 1) {
        DfpnWorker(*this, 0, 1).drive(slot);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    DfpnWorker(*this, t, threads).drive(slot);
                } catch (...) {
                    errors[t] = std::current_exception();
                    halt_.store(true);
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    progress_ = nullptr;
    return numbers_of(root);
}

namespace {

SolveResult finish(const DfpnSearch& search, ProofNumbers root, const TranspositionTable& tt,
                   const GrundyDatabase& db, std::chrono::steady_clock::time_point start) {
    if (!root.is_solved()) {
        if (search.stopped()) throw SearchStopped();
        throw BudgetExceeded(search.expansions());
    }
    SolveResult r;
    r.outcome = root.is_proved() ? Outcome::kWin : Outcome::kLoss;
    r.stats.outcome = r.outcome;
    r.stats.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.stats.expansions = search.expansions();
    r.stats.peak_nodes = tt.peak() + search.max_depth();
    r.stats.tt_entries_peak = tt.peak();
    r.stats.gn_count = db.size();
    r.stats.invariant_violations = search.invariant_violations();
    return r;
}

}  // namespace

SolveResult dfpn_solve(const Couple& root, const Game& game, TranspositionTable& tt, GrundyDatabase& db,
                       const SearchConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    DfpnSearch search(game, tt, db, config);
    const auto numbers = search.run(root, 1, config.budget);
    return finish(search, numbers, tt, db, start);
}

SolveResult pdfpn_solve(const Couple& root, const Game& game, TranspositionTable& tt, GrundyDatabase& db,
                        unsigned threads, const SearchConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    DfpnSearch search(game, tt, db, config);
    const auto numbers = search.run(root, threads, config.budget);
    if (threads > 1 && search.registry() && !search.registry()->balanced())
        throw std::logic_error("thread registry left unbalanced");
    auto r = finish(search, numbers, tt, db, start);
    return r;
}

}  // namespace spots
