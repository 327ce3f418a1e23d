#include "spots/nim.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

namespace spots {

std::vector<unsigned> NimGame::heaps(std::string_view key) {
    std::vector<unsigned> out;
    std::size_t pos = 0;
    while (pos < key.size()) {
        std::size_t end = key.find(',', pos);
        if (end == std::string_view::npos) end = key.size();
        unsigned h = 0;
        auto [ptr, ec] = std::from_chars(key.data() + pos, key.data() + end, h);
        if (ec != std::errc() || ptr != key.data() + end || end == pos)
            throw SyntaxError("expected heap size", pos);
        out.push_back(h);
        pos = end + 1;
        if (end + 1 == key.size() && end < key.size()) throw SyntaxError("trailing comma", end);
    }
    return out;
}

PositionKey NimGame::key_of(std::vector<unsigned> hs) {
    std::erase(hs, 0u);
    std::sort(hs.begin(), hs.end());
    std::string key;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (i) key += ',';
        key += std::to_string(hs[i]);
    }
    return key;
}

PositionKey NimGame::parse(std::string_view notation) const {
    std::string s;
    for (char ch : notation)
        if (ch != ' ') s += ch;
    return key_of(heaps(s));
}

std::vector<PositionKey> NimGame::children(std::string_view position) const {
    const auto hs = heaps(position);
    std::set<PositionKey> seen;
    std::vector<PositionKey> out;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (i > 0 && hs[i] == hs[i - 1]) continue;
        for (unsigned smaller = 0; smaller < hs[i]; ++smaller) {
            auto next = hs;
            next[i] = smaller;
            auto key = key_of(std::move(next));
            if (seen.insert(key).second) out.push_back(std::move(key));
        }
    }
    return out;
}

std::vector<PositionKey> NimGame::decompose(std::string_view position) const {
    std::vector<PositionKey> out;
    for (unsigned h : heaps(position)) out.push_back(std::to_string(h));
    return out;
}

std::uint64_t NimGame::heuristic_rank(std::string_view position) const {
    const auto hs = heaps(position);
    return std::accumulate(hs.begin(), hs.end(), std::uint64_t{0});
}

}  // namespace spots
