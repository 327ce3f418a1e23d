#include "spots/engines.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

#include "spots/dfpn.hpp"
#include "spots/nim.hpp"
#include "spots/oracle.hpp"
#include "spots/pdfpn.hpp"
#include "spots/pns.hpp"
#include "spots/sprouts.hpp"

namespace spots {

Engine parse_engine(std::string_view name) {
    if (name == "oracle") return Engine::kOracle;
    if (name == "pns") return Engine::kPns;
    if (name == "dfpn") return Engine::kDfpn;
    if (name == "pdfpn") return Engine::kPdfpn;
    if (name == "cluster") return Engine::kCluster;
    throw std::invalid_argument("unknown engine '" + std::string(name) + "'");
}

std::string_view engine_name(Engine e) {
    switch (e) {
        case Engine::kOracle: return "oracle";
        case Engine::kPns: return "pns";
        case Engine::kDfpn: return "dfpn";
        case Engine::kPdfpn: return "pdfpn";
        case Engine::kCluster: return "cluster";
    }
    return "?";
}

std::unique_ptr<Game> make_game(std::string_view name) {
    if (name == "sprouts") return std::make_unique<sprouts::SproutsGame>();
    if (name == "nim") return std::make_unique<NimGame>();
    throw std::invalid_argument("unknown game '" + std::string(name) + "'");
}

namespace {

SolveResult oracle_solve(const Couple& root, const Game& game, GrundyDatabase& db, const SearchConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    Oracle::Options opts;
    if (config.budget) opts.budget = config.budget;
    opts.check_sums = false;
    opts.stop = config.stop;
    Oracle oracle(game, opts);
    const NimValue g = oracle.grundy(root.position);
    for (const auto& [key, value] : oracle.cache())
        if (!key.empty() && game.decompose(key).size() == 1) db.insert(key, value);
    SolveResult r;
    r.outcome = g != root.nim ? Outcome::kWin : Outcome::kLoss;
    r.stats.outcome = r.outcome;
    r.stats.expansions = oracle.cache_size();
    r.stats.peak_nodes = oracle.cache_size();
    r.stats.gn_count = db.size();
    r.stats.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

SolveResult solve_couple(Engine engine, const Couple& root, const Game& game, GrundyDatabase& db,
                         const EngineOptions& options) {
    const SearchConfig& sc = options.search;
    switch (engine) {
        case Engine::kOracle:
            return oracle_solve(root, game, db, sc);
        case Engine::kPns:
            return pns_solve(root, game, db, sc);
        case Engine::kDfpn: {
            TranspositionTable tt(sc.tt_capacity);
            return dfpn_solve(root, game, tt, db, sc);
        }
        case Engine::kPdfpn: {
            TranspositionTable tt(sc.tt_capacity);
            return pdfpn_solve(root, game, tt, db, sc.threads, sc);
        }
        case Engine::kCluster:
            return run_local_cluster(root, game, options.cluster, db).result;
    }
    throw std::invalid_argument("unknown engine");
}

NimValue grundy_by_couples(const PositionKey& position, const std::function<bool(const Couple&)>& is_loss) {
    for (NimValue n = 0;; ++n)
        if (is_loss(Couple{position, n})) return n;
}

NimValue solve_grundy(Engine engine, const PositionKey& position, const Game& game, GrundyDatabase& db,
                      const EngineOptions& options) {
    const NimValue g = grundy_by_couples(position, [&](const Couple& c) {
        return solve_couple(engine, c, game, db, options).outcome == Outcome::kLoss;
    });
    if (!position.empty() && game.decompose(position).size() == 1) db.insert(position, g);
    return g;
}

}  // namespace spots
