#pragma once

#include <functional>
#include <memory>
#include <string_view>

#include "spots/cluster.hpp"
#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/search.hpp"

namespace spots {

enum class Engine { kOracle, kPns, kDfpn, kPdfpn, kCluster };

/// Throws std::invalid_argument on an unknown name.
Engine parse_engine(std::string_view name);
std::string_view engine_name(Engine e);

/// "sprouts" or "nim". Throws std::invalid_argument.
std::unique_ptr<Game> make_game(std::string_view name);

struct EngineOptions {
    SearchConfig search;
    ClusterConfig cluster;  // kCluster only; runs in-process
};

/// Solves one couple with the chosen engine, recording Grundy numbers in
/// `db`. Throws BudgetExceeded.
SolveResult solve_couple(Engine engine, const Couple& root, const Game& game, GrundyDatabase& db,
                         const EngineOptions& options = {});

/// Smallest n such that P + *n is a loss, asking `is_loss` for n = 0, 1, ...
NimValue grundy_by_couples(const PositionKey& position, const std::function<bool(const Couple&)>& is_loss);

/// grundy_by_couples on top of solve_couple; the answer also lands in `db`.
NimValue solve_grundy(Engine engine, const PositionKey& position, const Game& game, GrundyDatabase& db,
                      const EngineOptions& options = {});

}  // namespace spots
