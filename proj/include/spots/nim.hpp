#pragma once

#include <vector>

#include "spots/game.hpp"

namespace spots {

/// Multi-heap Nim. Keys are the nonzero heap sizes in ascending order,
/// comma separated ("1,2,3"); the empty position is "".
class NimGame final : public Game {
public:
    std::string_view name() const override { return "nim"; }
    PositionKey parse(std::string_view notation) const override;
    std::vector<PositionKey> children(std::string_view position) const override;
    std::vector<PositionKey> decompose(std::string_view position) const override;
    std::uint64_t heuristic_rank(std::string_view position) const override;

    static std::vector<unsigned> heaps(std::string_view key);
    static PositionKey key_of(std::vector<unsigned> heaps);
};

}  // namespace spots
