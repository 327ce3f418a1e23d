#include "spots/oracle.hpp"

#include <vector>

namespace spots {

NimValue Oracle::by_definition(const PositionKey& position) {
    std::vector<NimValue> values;
    for (const auto& child : game_.children(position)) values.push_back(grundy(child));
    return mex(values);
}

NimValue Oracle::grundy(const PositionKey& position) {
    if (auto it = cache_.find(position); it != cache_.end()) return it->second;
    if (cache_.size() >= opts_.budget) throw BudgetExceeded(cache_.size());
    if (opts_.stop && opts_.stop->load(std::memory_order_relaxed)) throw SearchStopped();

    NimValue value = 0;
    const auto parts = game_.decompose(position);
    if (parts.size() >= 2) {
        for (const auto& part : parts) value ^= grundy(part);
        if (opts_.check_sums) {
            const NimValue direct = by_definition(position);
            if (direct != value)
                throw OracleInconsistency("position '" + position + "': mex gives " + std::to_string(direct) +
                                          ", component xor gives " + std::to_string(value));
        }
    } else {
        value = by_definition(position);
    }
    cache_.emplace(position, value);
    return value;
}

Outcome brute_outcome(const Game& game, const PositionKey& position, std::uint64_t budget) {
    Oracle oracle(game, {budget, false, nullptr});
    return oracle.outcome(position);
}

NimValue brute_grundy(const Game& game, const PositionKey& position, std::uint64_t budget) {
    Oracle oracle(game, {budget, true, nullptr});
    return oracle.grundy(position);
}

}  // namespace spots
