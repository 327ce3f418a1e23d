#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spots/game.hpp"

namespace spots::sprouts {

/// Cyclic sequence of vertex occurrences met when walking around one
/// connected component of the drawing, with the region on the same side.
using Boundary = std::vector<int>;

/// A face of the drawing: one boundary per component that touches it.
using Region = std::vector<Boundary>;

/// Purely combinatorial Sprouts position.
///
/// `lives[v]` is 3 minus the degree of vertex v (a loop counts twice). A
/// vertex of degree d >= 1 occurs d times over all boundaries; an isolated
/// vertex (3 lives) is a boundary on its own. Simplified positions may have
/// dropped dead vertices, dead boundaries and regions without moves, so
/// occurrence counts can be lower than degrees there.
struct Position {
    std::vector<int> lives;
    std::vector<Region> regions;

    int total_lives() const;
    bool empty() const { return regions.empty(); }
};

/// Text form of a position.
///
///   position  := "" | component ( "+" component )*
///   component := region ( "}" region )*
///   region    := boundary ( "." boundary )*
///   boundary  := vertex+
///   vertex    := "0" | "1" | "2" | "3"         vertex occurring once, with 3, 2, 1, 0 lives
///              | [A-Z] "'"*                    vertex with 1 life occurring twice
///              | [a-z] "'"*                    vertex with 0 lives occurring two or three times
///
/// Labels are scoped to their component; label index i is letter i % 26
/// followed by i / 26 apostrophes. "0*n" is accepted as the n-spot start.
Position parse(std::string_view notation);

/// Canonical text of `p` as given (no simplification). Two positions get the
/// same key iff they are equal up to vertex renaming, rotation of
/// boundaries, reflection of a whole region, order of boundaries inside a
/// region, and order of regions.
std::string canonical_key(const Position& p);

inline std::string render(const Position& p) { return canonical_key(p); }

/// Throws std::invalid_argument if degrees or occurrences are inconsistent.
void validate(const Position& p);

/// Drops dead vertices, empty boundaries and regions without a legal move.
/// The result has the same game value.
Position simplify(const Position& p);

/// Simplified atomic components: regions are connected when they share a
/// vertex with lives left. Empty for a position without moves.
std::vector<Position> decompose(const Position& p);

/// All successor positions, one per canonical key, unsimplified.
std::vector<Position> moves(const Position& p);

/// n isolated spots in one region.
Position n_spot(int n);

/// Sprouts behind the generic game interface. Keys are canonical keys of
/// simplified positions.
class SproutsGame final : public Game {
public:
    std::string_view name() const override { return "sprouts"; }
    PositionKey parse(std::string_view notation) const override;
    std::vector<PositionKey> children(std::string_view position) const override;
    std::vector<PositionKey> decompose(std::string_view position) const override;
    bool is_terminal(std::string_view position) const override { return position.empty(); }
    /// Ascending total lives: children closer to the end of the game first.
    std::uint64_t heuristic_rank(std::string_view position) const override;
};

}  // namespace spots::sprouts
