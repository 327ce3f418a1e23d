#include "spots/game.hpp"

#include <algorithm>
#include <charconv>

namespace spots {

std::string couple_key(const Couple& c) {
    std::string key;
    key.reserve(c.position.size() + 4);
    key += c.position;
    key += '|';
    key += std::to_string(c.nim);
    return key;
}

Couple parse_couple_key(std::string_view key) {
    const auto bar = key.rfind('|');
    if (bar == std::string_view::npos) throw SyntaxError("couple key without '|'", 0);
    Couple c;
    c.position = std::string(key.substr(0, bar));
    const char* first = key.data() + bar + 1;
    const char* last = key.data() + key.size();
    auto [ptr, ec] = std::from_chars(first, last, c.nim);
    if (ec != std::errc() || ptr != last || first == last) throw SyntaxError("bad nim value in couple key", bar + 1);
    return c;
}

NimValue mex(std::span<const NimValue> values) {
    std::vector<bool> seen(values.size() + 1, false);
    for (NimValue v : values)
        if (v < seen.size()) seen[v] = true;
    NimValue m = 0;
    while (seen[m]) ++m;
    return m;
}

NimValue nim_sum(std::span<const NimValue> values) {
    NimValue x = 0;
    for (NimValue v : values) x ^= v;
    return x;
}

std::vector<Couple> couple_children(const Couple& c, const Game& game) {
    if (!c.position.empty() && game.decompose(c.position).size() > 1)
        throw DecomposablePosition("couple_children on decomposable position '" + c.position + "'");
    std::vector<Couple> out;
    if (!c.position.empty()) {
        for (auto& child : game.children(c.position)) out.push_back(Couple{std::move(child), c.nim});
    }
    for (NimValue n = 0; n < c.nim; ++n) out.push_back(Couple{c.position, n});
    return out;
}

Couple residual_couple(const Couple& c, std::span<const PositionKey> components,
                       std::span<const NimValue> grundy_values) {
    if (components.size() < 2) throw ArityMismatch("residual_couple needs a decomposable position");
    if (grundy_values.size() + 1 != components.size())
        throw ArityMismatch("expected " + std::to_string(components.size() - 1) + " Grundy values, got " +
                            std::to_string(grundy_values.size()));
    return Couple{components.back(), c.nim ^ nim_sum(grundy_values)};
}

}  // namespace spots
