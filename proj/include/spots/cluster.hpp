#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/search.hpp"
#include "spots/transport.hpp"

namespace spots {

struct ClusterConfig {
    unsigned workers = 1;
    std::uint64_t iterations = 10'000;  // expansions per job
    std::uint64_t updates = 1'000;      // expansions between progress reports
    unsigned grouping = 1;              // workers sharing one Grundy database
    unsigned threads = 1;               // search threads per worker
    std::size_t tt_capacity = 1'000'000;
    std::uint64_t seed = 0;
    bool heuristic = false;
    /// Expansions of a sequential dfpn run on the same root; enables the
    /// search-overhead ratio in the stats.
    std::uint64_t baseline_expansions = 0;

    /// Throws std::invalid_argument.
    void validate() const;
};

class WorkerLost : public std::runtime_error {
public:
    explicit WorkerLost(std::size_t worker)
        : std::runtime_error("worker " + std::to_string(worker) + " lost"), worker_(worker) {}
    std::size_t worker() const { return worker_; }

private:
    std::size_t worker_;
};

/// Database shared by the workers of one group, and what of it has already
/// been reported to the master.
class WorkerGroup {
public:
    explicit WorkerGroup(std::uint32_t id) : id_(id) {}

    std::uint32_t id() const { return id_; }
    GrundyDatabase& db() { return db_; }
    proto::GnDelta take_unreported();

private:
    std::uint32_t id_;
    GrundyDatabase db_;
    std::mutex mutex_;
    std::size_t reported_ = 0;
};

struct ClusterReport {
    SolveResult result;
    std::uint64_t jobs = 0;
    std::uint64_t lost_jobs = 0;
    std::uint64_t worker_expansions = 0;
    std::uint64_t double_assignments = 0;  // leaf handed out while locked; must stay 0
    std::size_t locked_at_end = 0;         // must be 0
};

/// Entries of `master` appended since `cursor`; moves the cursor past them.
proto::GnDelta gn_sync_delta(const GrundyDatabase& master, std::size_t& cursor);

/// Runs the master over connected workers until the root is solved, then
/// shuts them down. Throws WorkerLost, ProtocolError, GrundyConflict.
ClusterReport master_run(const Couple& root, const Game& game, const ClusterConfig& cfg,
                         std::vector<std::unique_ptr<proto::Endpoint>> workers, GrundyDatabase& db);

/// Serves jobs until Shutdown or the connection drops. Keeps its
/// transposition table across jobs.
void worker_run(proto::Endpoint& endpoint, const Game& game, const ClusterConfig& cfg, std::uint32_t worker_id,
                WorkerGroup& group);

/// Master and cfg.workers workers as threads of this process, connected by
/// in-process channels. Also checks that every group database agrees with
/// the master's.
ClusterReport run_local_cluster(const Couple& root, const Game& game, const ClusterConfig& cfg, GrundyDatabase& db);

}  // namespace spots
