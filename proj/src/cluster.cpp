#include "spots/cluster.hpp"

#include <chrono>
#include <exception>
#include <thread>
#include <unordered_map>

#include "spots/dfpn.hpp"
#include "spots/pns.hpp"

namespace spots {

using Clock = std::chrono::steady_clock;

void ClusterConfig::validate() const {
    if (workers < 1) throw std::invalid_argument("need at least one worker");
    if (grouping < 1) throw std::invalid_argument("grouping must be at least 1");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    if (updates < 1 || iterations < updates) throw std::invalid_argument("need iterations >= updates >= 1");
}

proto::GnDelta WorkerGroup::take_unreported() {
    std::lock_guard lock(mutex_);
    return gn_sync_delta(db_, reported_);
}

proto::GnDelta gn_sync_delta(const GrundyDatabase& master, std::size_t& cursor) {
    auto delta = master.entries_since(cursor);
    cursor += delta.size();
    return delta;
}

namespace {

struct Event {
    std::size_t worker = 0;
    std::optional<proto::Message> message;  // empty: connection gone
    std::exception_ptr error;
};

struct WorkerState {
    bool hello = false;
    bool alive = true;
    std::uint32_t group = 0;
    std::optional<std::uint64_t> job;
    PnsNode* leaf = nullptr;
    Clock::time_point assigned_at;
};

void absorb(GrundyDatabase& db, const proto::GnDelta& delta) {
    for (const auto& e : delta) db.insert(e.key, e.value);
}

}  // namespace

ClusterReport master_run(const Couple& root, const Game& game, const ClusterConfig& cfg,
                         std::vector<std::unique_ptr<proto::Endpoint>> endpoints, GrundyDatabase& db) {
    cfg.validate();
    const auto start = Clock::now();
    SearchConfig tree_cfg;
    tree_cfg.tie_break = cfg.heuristic ? TieBreak::kHeuristic : TieBreak::kKeyOrder;
    tree_cfg.seed = cfg.seed;
    PnsTree tree(game, db, tree_cfg);
    PnsNode* top = tree.set_root(root);

    proto::Mailbox<Event> inbox;
    std::vector<std::thread> readers;
    struct Cleanup {
        std::vector<std::unique_ptr<proto::Endpoint>>& eps;
        std::vector<std::thread>& threads;
        ~Cleanup() {
            for (auto& e : eps) e->close();
            for (auto& t : threads) t.join();
        }
    } cleanup{endpoints, readers};
    for (std::size_t i = 0; i < endpoints.size(); ++i)
        readers.emplace_back([&inbox, ep = endpoints[i].get(), i] {
            for (;;) {
                Event ev{i, std::nullopt, nullptr};
                try {
                    ev.message = ep->receive();
                } catch (...) {
                    ev.error = std::current_exception();
                }
                const bool last = !ev.message;
                inbox.push(std::move(ev));
                if (last) return;
            }
        });

    ClusterReport report;
    std::vector<WorkerState> workers(endpoints.size());
    std::unordered_map<std::uint32_t, std::size_t> cursors;
    std::unordered_map<const PnsNode*, int> losses;
    std::uint64_t next_job = 1;
    double busy = 0;

    auto finish_job = [&](WorkerState& w) {
        tree.unlock(w.leaf);
        busy += std::chrono::duration<double>(Clock::now() - w.assigned_at).count();
        w.job.reset();
        w.leaf = nullptr;
    };

    auto assign_idle = [&] {
        for (std::size_t i = 0; i < workers.size(); ++i) {
            WorkerState& w = workers[i];
            if (!w.hello || !w.alive || w.job) continue;
            PnsNode* leaf = nullptr;
            while (!top->solved()) {
                auto path = tree.try_select_mpn();
                if (!path) return;
                if (path->back()->kind == NodeKind::kAtomic) {
                    leaf = path->back();
                    break;
                }
                // Sums and Grundy nodes only need bookkeeping; keep them here.
                tree.expand(path->back());
                tree.backpropagate(*path);
            }
            if (!leaf) return;
            if (leaf->lock_count) ++report.double_assignments;
            tree.lock(leaf);
            proto::Job job;
            job.job_id = next_job++;
            job.couple = leaf->couple;
            job.iterations = cfg.iterations;
            job.updates = cfg.updates;
            job.gn_delta = gn_sync_delta(db, cursors[w.group]);
            w.job = job.job_id;
            w.leaf = leaf;
            w.assigned_at = Clock::now();
            ++report.jobs;
            try {
                endpoints[i]->send(proto::Assign{std::move(job)});
            } catch (const proto::TransportClosed&) {
                // the reader reports the loss
            }
        }
    };

    auto handle = [&](Event& ev, bool running) {
        if (ev.error) std::rethrow_exception(ev.error);
        WorkerState& w = workers[ev.worker];
        if (!ev.message) {
            w.alive = false;
            if (w.job) {
                PnsNode* leaf = w.leaf;
                finish_job(w);
                if (running) {
                    ++report.lost_jobs;
                    if (++losses[leaf] > 1) throw WorkerLost(ev.worker);
                }
            }
            return;
        }
        std::visit(
            [&](auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, proto::Hello>) {
                    w.hello = true;
                    w.group = m.group_id;
                } else if constexpr (std::is_same_v<T, proto::Progress>) {
                    absorb(db, m.gn_delta);
                    if (!running || w.job != m.job_id) return;
                    tree.set_leaf_numbers(w.leaf, m.numbers);
                    tree.update_from(w.leaf);
                } else if constexpr (std::is_same_v<T, proto::Done>) {
                    absorb(db, m.gn_delta);
                    if (w.job != m.job_id) return;
                    report.worker_expansions += m.iterations_done;
                    PnsNode* leaf = w.leaf;
                    finish_job(w);
                    if (!running || leaf->solved()) return;
                    std::vector<ChildReport> kids;
                    kids.reserve(m.children.size());
                    for (auto& c : m.children) kids.push_back({c.key, c.numbers});
                    tree.expand_with(leaf, kids);
                    if (m.numbers.is_solved() && !leaf->solved()) tree.resolve(leaf, m.numbers);
                    tree.update_from(leaf);
                } else {
                    throw proto::ProtocolError(0, "unexpected message from worker");
                }
            },
            *ev.message);
    };

    auto alive = [&] {
        std::size_t n = 0;
        for (const auto& w : workers) n += w.alive;
        return n;
    };

    while (!top->solved()) {
        assign_idle();
        if (top->solved()) break;
        if (alive() == 0) throw WorkerLost(0);
        bool waiting_for_hello = false, busy_any = false;
        for (const auto& w : workers) {
            waiting_for_hello |= w.alive && !w.hello;
            busy_any |= w.job.has_value();
        }
        if (!waiting_for_hello && !busy_any) throw std::logic_error("master has nothing to assign and nothing pending");
        Event ev = inbox.pop();
        handle(ev, true);
    }

    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        if (!workers[i].alive) continue;
        try {
            endpoints[i]->send(proto::Shutdown{});
        } catch (const proto::TransportClosed&) {
        }
    }
    while (alive() > 0) {
        Event ev = inbox.pop();
        if (ev.error) {
            workers[ev.worker].alive = false;
            continue;
        }
        handle(ev, false);
    }

    for (const auto& w : workers)
        if (w.leaf) ++report.locked_at_end;

    SearchStats& s = report.result.stats;
    report.result.outcome = top->numbers.is_proved() ? Outcome::kWin : Outcome::kLoss;
    s.outcome = report.result.outcome;
    s.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    s.expansions = report.worker_expansions;
    s.peak_nodes = tree.node_count();
    s.gn_count = db.size();
    if (cfg.baseline_expansions)
        s.search_overhead = static_cast<double>(report.worker_expansions) / static_cast<double>(cfg.baseline_expansions);
    if (s.wall_time_seconds > 0) s.worker_utilization = busy / (s.wall_time_seconds * static_cast<double>(workers.size()));
    return report;
}

void worker_run(proto::Endpoint& endpoint, const Game& game, const ClusterConfig& cfg, std::uint32_t worker_id,
                WorkerGroup& group) {
    endpoint.send(proto::Hello{worker_id, group.id(), cfg.threads});
    TranspositionTable tt(cfg.tt_capacity);
    std::atomic<bool> stop{false};
    SearchConfig sc;
    sc.stop = &stop;
    sc.tie_break = cfg.heuristic ? TieBreak::kHeuristic : TieBreak::kKeyOrder;
    sc.seed = cfg.seed + worker_id;
    sc.tt_capacity = cfg.tt_capacity;
    sc.threads = cfg.threads;
    DfpnSearch search(game, tt, group.db(), sc);

    std::thread job_thread;
    std::exception_ptr job_error;
    auto join = [&] {
        if (job_thread.joinable()) job_thread.join();
    };

    for (;;) {
        std::optional<proto::Message> msg;
        try {
            msg = endpoint.receive();
        } catch (...) {
            stop = true;
            join();
            endpoint.close();
            throw;
        }
        if (!msg || std::holds_alternative<proto::Shutdown>(*msg)) break;
        if (auto* a = std::get_if<proto::Assign>(&*msg)) {
            join();
            if (job_error) break;
            absorb(group.db(), a->job.gn_delta);
            job_thread = std::thread([&, job = std::move(a->job)] {
                try {
                    const std::uint64_t before = search.expansions();
                    auto progress = [&](const DfpnProgress& p) {
                        endpoint.send(proto::Progress{job.job_id, p.root, p.expansions, group.take_unreported()});
                    };
                    const ProofNumbers numbers = search.run(job.couple, cfg.threads, job.iterations, progress, job.updates);
                    if (stop) return;
                    proto::Done done;
                    done.job_id = job.job_id;
                    done.status = numbers.is_solved() ? proto::JobStatus::kSolved : proto::JobStatus::kBudgetExhausted;
                    done.numbers = numbers;
                    done.iterations_done = search.expansions() - before;
                    if (couple_kind(game, job.couple) == NodeKind::kAtomic)
                        for (auto& [c, n] : search.child_numbers(job.couple)) done.children.push_back({couple_key(c), n});
                    done.gn_delta = group.take_unreported();
                    endpoint.send(done);
                } catch (const proto::TransportClosed&) {
                } catch (...) {
                    job_error = std::current_exception();
                    endpoint.close();
                }
            });
        }
    }
    stop = true;
    join();
    endpoint.close();
    if (job_error) std::rethrow_exception(job_error);
}

ClusterReport run_local_cluster(const Couple& root, const Game& game, const ClusterConfig& cfg, GrundyDatabase& db) {
    cfg.validate();
    const unsigned group_count = (cfg.workers + cfg.grouping - 1) / cfg.grouping;
    std::vector<std::unique_ptr<WorkerGroup>> groups;
    for (unsigned g = 0; g < group_count; ++g) groups.push_back(std::make_unique<WorkerGroup>(g));

    std::vector<std::unique_ptr<proto::Endpoint>> master_side;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(cfg.workers);
    for (unsigned i = 0; i < cfg.workers; ++i) {
        auto [m, w] = proto::make_channel_pair();
        master_side.push_back(std::move(m));
        threads.emplace_back([&, i, ep = std::shared_ptr<proto::Endpoint>(std::move(w))] {
            try {
                worker_run(*ep, game, cfg, i, *groups[i / cfg.grouping]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    ClusterReport report;
    try {
        report = master_run(root, game, cfg, std::move(master_side), db);
    } catch (...) {
        for (auto& t : threads) t.join();
        throw;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& g : groups)
        for (const auto& e : g->db().sorted_entries())
            if (auto v = db.find(e.key); v && *v != e.value) throw GrundyConflict(e.key, *v, e.value);
    return report;
}

}  // namespace spots
