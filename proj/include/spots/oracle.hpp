#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "spots/game.hpp"
#include "spots/proof_number.hpp"
#include "spots/search.hpp"

namespace spots {

/// Memoized exhaustive search. Slow on purpose: every position value comes
/// straight from the mex definition, with sums cross-checked against the xor
/// of their components when `check_sums` is set.
class Oracle {
public:
    struct Options {
        std::uint64_t budget = 10'000'000;
        bool check_sums = true;
        const std::atomic<bool>* stop = nullptr;  // polled once per new state
    };

    explicit Oracle(const Game& game) : Oracle(game, Options{}) {}
    Oracle(const Game& game, Options opts) : game_(game), opts_(opts) {}

    NimValue grundy(const PositionKey& position);
    Outcome outcome(const PositionKey& position) { return grundy(position) == 0 ? Outcome::kLoss : Outcome::kWin; }

    std::size_t cache_size() const { return cache_.size(); }
    const std::unordered_map<PositionKey, NimValue>& cache() const { return cache_; }

private:
    NimValue by_definition(const PositionKey& position);

    const Game& game_;
    Options opts_;
    std::unordered_map<PositionKey, NimValue> cache_;
};

/// Thrown when the mex over the children of a sum disagrees with the xor of
/// the component values; indicates a broken game implementation.
class OracleInconsistency : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

Outcome brute_outcome(const Game& game, const PositionKey& position, std::uint64_t budget = 10'000'000);
NimValue brute_grundy(const Game& game, const PositionKey& position, std::uint64_t budget = 10'000'000);

}  // namespace spots
