#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spots {

/// Canonical text key of a game position. Equal keys mean equal positions.
/// The empty position of every game has the empty key.
using PositionKey = std::string;

/// A Grundy number (nimber).
using NimValue = std::uint32_t;

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class DecomposablePosition : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ArityMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An impartial game under normal play, seen through canonical position keys.
///
/// Implementations are stateless and safe for concurrent use.
///   - children(p) is empty iff p is terminal;
///   - decompose(p) returns no component for the empty position, [p] for an
///     atomic position, and k >= 2 non-empty atomic components otherwise;
///   - children() returns canonical keys, deduplicated, in a fixed order.
class Game {
public:
    virtual ~Game() = default;

    virtual std::string_view name() const = 0;

    /// Parses user notation into the canonical key. Throws SyntaxError.
    virtual PositionKey parse(std::string_view notation) const = 0;

    virtual std::vector<PositionKey> children(std::string_view position) const = 0;

    virtual std::vector<PositionKey> decompose(std::string_view position) const = 0;

    virtual bool is_terminal(std::string_view position) const { return children(position).empty(); }

    /// Optional child-ordering hint; lower ranks are tried first on ties.
    virtual std::uint64_t heuristic_rank(std::string_view /*position*/) const { return 0; }
};

/// A position combined with a single Nim heap, `P + *nim`.
struct Couple {
    PositionKey position;
    NimValue nim = 0;

    bool is_terminal() const { return position.empty() && nim == 0; }

    friend bool operator==(const Couple&, const Couple&) = default;
    friend auto operator<=>(const Couple&, const Couple&) = default;
};

/// "P|n", the key a couple is stored under in search tables.
std::string couple_key(const Couple& c);
Couple parse_couple_key(std::string_view key);

/// Smallest natural not contained in `values` (any order, duplicates allowed).
NimValue mex(std::span<const NimValue> values);

/// Bitwise xor fold; 0 for the empty list.
NimValue nim_sum(std::span<const NimValue> values);

/// Children of an atomic couple: [P' + *n for each child P'] then
/// [P + *n' for n' = 0 .. n-1]. Throws DecomposablePosition.
std::vector<Couple> couple_children(const Couple& c, const Game& game);

/// For P = P1 + ... + Pk, returns Pk + *(n ^ gn(P1) ^ ... ^ gn(Pk-1)).
/// `components` is the full decomposition, the last entry is the residual.
Couple residual_couple(const Couple& c, std::span<const PositionKey> components,
                       std::span<const NimValue> grundy_values);

}  // namespace spots
