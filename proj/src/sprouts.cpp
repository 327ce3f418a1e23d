#include "spots/sprouts.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace spots::sprouts {
namespace {

// Encodings are byte strings compared lexicographically. Single-occurrence
// vertices sort first, then vertices shared with another region, then
// vertices repeated inside one boundary (numbered by first appearance).
constexpr char kSeparator = 0;
constexpr int kSingleToken = 1;
constexpr int kLinkToken = 5;
constexpr int kInternalToken = 7;

enum class Kind : std::uint8_t { kSingle, kInternal, kLink };

struct VertexInfo {
    Kind kind = Kind::kSingle;
    int lives = 0;
    char token = 0;  // fixed token of single and link vertices
};

int single_digit(int lives) { return 3 - lives; }

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

// Groups region indices into components connected through shared vertices.
std::vector<std::vector<int>> region_components(const Position& p) {
    DisjointSets sets(p.regions.size());
    std::vector<int> first_region(p.lives.size(), -1);
    for (std::size_t r = 0; r < p.regions.size(); ++r)
        for (const auto& b : p.regions[r])
            for (int v : b) {
                if (first_region[v] < 0)
                    first_region[v] = static_cast<int>(r);
                else
                    sets.unite(r, static_cast<std::size_t>(first_region[v]));
            }
    std::vector<std::vector<int>> out;
    std::vector<int> slot(p.regions.size(), -1);
    for (std::size_t r = 0; r < p.regions.size(); ++r) {
        int& s = slot[sets.find(r)];
        if (s < 0) {
            s = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(s)].push_back(static_cast<int>(r));
    }
    return out;
}

struct Scratch {
    std::vector<int> local;  // per-vertex label inside the boundary being read, -1 if none
    std::string cur;

    void fit(std::size_t vertices) {
        if (local.size() < vertices) local.resize(vertices, -1);
    }
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

std::size_t walk(std::size_t start, std::size_t k, std::size_t n, bool reversed) {
    return reversed ? (start + n - k) % n : (start + k) % n;
}

// Encodes boundary `b` read from `start`. When `bound` is given, stops as
// soon as the encoding is known to be larger; returns the comparison with
// `bound` (-1 if there is none).
int read_boundary(const Boundary& b, bool reversed, std::size_t start, const std::vector<VertexInfo>& info,
                  const std::string* bound, Scratch& s, std::string& out) {
    const std::size_t n = b.size();
    out.clear();
    int next = 0;
    int cmp = bound ? 0 : -1;
    for (std::size_t k = 0; k < n; ++k) {
        const auto v = static_cast<std::size_t>(b[walk(start, k, n, reversed)]);
        const VertexInfo& vi = info[v];
        char t = vi.token;
        if (vi.kind == Kind::kInternal) {
            int& id = s.local[v];
            if (id < 0) id = next++;
            t = static_cast<char>(kInternalToken + 2 * id + (vi.lives == 0 ? 1 : 0));
        }
        out.push_back(t);
        if (cmp == 0) {
            const auto bt = static_cast<unsigned char>((*bound)[k]);
            const auto ct = static_cast<unsigned char>(t);
            if (ct < bt) {
                cmp = -1;
            } else if (ct > bt) {
                cmp = 1;
                break;
            }
        }
    }
    for (int v : b) s.local[static_cast<std::size_t>(v)] = -1;
    return cmp;
}

struct BoundaryCanon {
    std::string tokens;
    std::vector<std::size_t> starts;  // every start reaching `tokens`
    bool has_link = false;
};

BoundaryCanon canonical_boundary(const Boundary& b, bool reversed, const std::vector<VertexInfo>& info, Scratch& s) {
    BoundaryCanon best;
    for (std::size_t st = 0; st < b.size(); ++st) {
        const int cmp = read_boundary(b, reversed, st, info, best.starts.empty() ? nullptr : &best.tokens, s, s.cur);
        if (cmp < 0) {
            best.tokens.swap(s.cur);
            best.starts.assign(1, st);
        } else if (cmp == 0) {
            best.starts.push_back(st);
        }
    }
    for (int v : b)
        if (info[static_cast<std::size_t>(v)].kind == Kind::kLink) best.has_link = true;
    return best;
}

struct Orientation {
    bool reversed = false;
    std::vector<int> order;              // boundary indices in output order
    std::vector<BoundaryCanon> canons;   // parallel to `order`
};

struct RegionCanon {
    std::string shape;
    std::vector<Orientation> orientations;  // all orientations reaching `shape`
};

RegionCanon canonical_region(const Region& region, const std::vector<VertexInfo>& info, Scratch& s) {
    RegionCanon best;
    for (bool reversed : {false, true}) {
        Orientation o;
        o.reversed = reversed;
        std::vector<BoundaryCanon> canons;
        canons.reserve(region.size());
        for (const auto& b : region) canons.push_back(canonical_boundary(b, reversed, info, s));
        std::vector<int> idx(region.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return canons[static_cast<std::size_t>(a)].tokens < canons[static_cast<std::size_t>(b)].tokens;
        });
        std::string shape;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i) shape.push_back(kSeparator);
            shape += canons[static_cast<std::size_t>(idx[i])].tokens;
        }
        o.order = idx;
        o.canons.reserve(idx.size());
        for (int i : idx) o.canons.push_back(std::move(canons[static_cast<std::size_t>(i)]));
        if (best.orientations.empty() || shape < best.shape) {
            best.shape = std::move(shape);
            best.orientations.clear();
            best.orientations.push_back(std::move(o));
        } else if (shape == best.shape) {
            best.orientations.push_back(std::move(o));
        }
    }
    return best;
}

// All concrete ways of writing one region that reach its canonical shape:
// orientation, boundary order and boundary starts, stored flat with a fixed
// stride, together with the sequence of shared vertices each one produces.
struct Embeddings {
    std::size_t link_stride = 0;
    std::size_t layout_stride = 0;
    std::vector<char> reversed;
    std::vector<std::pair<int, std::size_t>> layout;
    std::vector<int> links;

    std::size_t size() const { return reversed.size(); }
    const int* links_of(std::size_t e) const { return links.data() + e * link_stride; }
    const std::pair<int, std::size_t>* layout_of(std::size_t e) const { return layout.data() + e * layout_stride; }
};

void collect_links(const Boundary& b, bool reversed, std::size_t start, const std::vector<VertexInfo>& info,
                   std::vector<int>& out) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        const int v = b[walk(start, k, n, reversed)];
        if (info[static_cast<std::size_t>(v)].kind == Kind::kLink) out.push_back(v);
    }
}

struct EmbeddingWalk {
    const Region& region;
    const Orientation& o;
    const std::vector<VertexInfo>& info;
    std::vector<bool> used;
    std::vector<std::pair<int, std::size_t>> layout;
    std::vector<int> links;
    Embeddings& out;

    void run(std::size_t pos) {
        if (pos == o.order.size()) {
            out.reversed.push_back(o.reversed ? 1 : 0);
            out.layout.insert(out.layout.end(), layout.begin(), layout.end());
            out.links.insert(out.links.end(), links.begin(), links.end());
            out.link_stride = links.size();
            out.layout_stride = layout.size();
            return;
        }
        const BoundaryCanon& slot = o.canons[pos];
        if (!slot.has_link) {
            // Interchangeable boundaries without shared vertices render identically.
            layout.emplace_back(o.order[pos], slot.starts.front());
            run(pos + 1);
            layout.pop_back();
            return;
        }
        for (std::size_t j = 0; j < o.order.size(); ++j) {
            if (used[j] || o.canons[j].tokens != slot.tokens) continue;
            used[j] = true;
            const int bidx = o.order[j];
            for (std::size_t start : o.canons[j].starts) {
                const std::size_t mark = links.size();
                collect_links(region[static_cast<std::size_t>(bidx)], o.reversed, start, info, links);
                layout.emplace_back(bidx, start);
                run(pos + 1);
                layout.pop_back();
                links.resize(mark);
            }
            used[j] = false;
        }
    }
};

Embeddings region_embeddings(const Region& region, const RegionCanon& rc, const std::vector<VertexInfo>& info) {
    Embeddings all;
    for (const auto& o : rc.orientations) {
        EmbeddingWalk w{region, o, info, std::vector<bool>(o.order.size(), false), {}, {}, all};
        w.run(0);
    }
    if (all.size() <= 1) return all;

    // Embeddings with the same shared-vertex sequence render identically.
    std::vector<std::size_t> idx(all.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t ls = all.link_stride;
    auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(all.links_of(a), all.links_of(a) + ls, all.links_of(b),
                                            all.links_of(b) + ls);
    };
    std::stable_sort(idx.begin(), idx.end(), less);
    Embeddings unique;
    unique.link_stride = all.link_stride;
    unique.layout_stride = all.layout_stride;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i && !less(idx[i - 1], idx[i])) continue;
        const std::size_t e = idx[i];
        unique.reversed.push_back(all.reversed[e]);
        unique.layout.insert(unique.layout.end(), all.layout_of(e), all.layout_of(e) + all.layout_stride);
        unique.links.insert(unique.links.end(), all.links_of(e), all.links_of(e) + ls);
    }
    return unique;
}

void append_label(std::string& out, int index, bool dead) {
    out.push_back(static_cast<char>((dead ? 'a' : 'A') + index % 26));
    out.append(static_cast<std::size_t>(index / 26), '\'');
}

// Searches region order and embeddings for the lexicographically smallest
// sequence of shared-vertex labels.
class LinkSearch {
public:
    LinkSearch(const std::vector<std::vector<int>>& slot_groups, const std::vector<Embeddings>& embeddings,
               std::size_t vertex_count)
        : groups_(slot_groups), embeddings_(embeddings), labels_(vertex_count, -1) {}

    std::vector<std::pair<int, std::size_t>> run() {
        used_.assign(embeddings_.size(), false);
        for (std::size_t g = 0; g < groups_.size(); ++g)
            for (std::size_t k = 0; k < groups_[g].size(); ++k) slot_group_.push_back(g);
        dfs(0, false);
        return best_choice_;
    }

private:
    void dfs(std::size_t slot, bool strictly_less) {
        if (slot == slot_group_.size()) {
            if (!have_best_ || strictly_less) {
                have_best_ = true;
                best_ = signature_;
                best_choice_ = choice_;
            }
            return;
        }
        for (int r : groups_[slot_group_[slot]]) {
            if (used_[static_cast<std::size_t>(r)]) continue;
            used_[static_cast<std::size_t>(r)] = true;
            const Embeddings& embs = embeddings_[static_cast<std::size_t>(r)];
            for (std::size_t e = 0; e < embs.size(); ++e) {
                const std::size_t mark = signature_.size();
                const int label_mark = next_label_;
                bool less = strictly_less;
                bool prune = false;
                const int* links = embs.links_of(e);
                for (std::size_t k = 0; k < embs.link_stride; ++k) {
                    const int v = links[k];
                    int& lab = labels_[static_cast<std::size_t>(v)];
                    if (lab < 0) {
                        lab = next_label_++;
                        assigned_.push_back(v);
                    }
                    signature_.push_back(lab);
                    if (have_best_ && !less) {
                        const int b = best_[signature_.size() - 1];
                        if (lab > b) {
                            prune = true;
                            break;
                        }
                        if (lab < b) less = true;
                    }
                }
                if (!prune) {
                    choice_.emplace_back(r, e);
                    dfs(slot + 1, less);
                    choice_.pop_back();
                }
                while (next_label_ > label_mark) {
                    labels_[static_cast<std::size_t>(assigned_.back())] = -1;
                    assigned_.pop_back();
                    --next_label_;
                }
                signature_.resize(mark);
            }
            used_[static_cast<std::size_t>(r)] = false;
        }
    }

    const std::vector<std::vector<int>>& groups_;
    const std::vector<Embeddings>& embeddings_;
    std::vector<int> labels_;
    std::vector<int> assigned_;
    std::vector<bool> used_;
    std::vector<std::size_t> slot_group_;
    int next_label_ = 0;
    std::vector<int> signature_;
    std::vector<std::pair<int, std::size_t>> choice_;
    bool have_best_ = false;
    std::vector<int> best_;
    std::vector<std::pair<int, std::size_t>> best_choice_;
};

std::vector<VertexInfo> classify(const Position& p, const std::vector<int>& region_ids) {
    std::vector<VertexInfo> info(p.lives.size());
    std::vector<int> count(p.lives.size(), 0);
    std::vector<std::pair<int, int>> home(p.lives.size(), {-1, -1});
    for (int r : region_ids) {
        const auto& region = p.regions[static_cast<std::size_t>(r)];
        for (std::size_t b = 0; b < region.size(); ++b)
            for (int v : region[b]) {
                const auto vi = static_cast<std::size_t>(v);
                ++count[vi];
                const std::pair<int, int> where{r, static_cast<int>(b)};
                if (home[vi].first < 0)
                    home[vi] = where;
                else if (home[vi] != where)
                    info[vi].kind = Kind::kLink;
            }
    }
    for (std::size_t v = 0; v < info.size(); ++v) {
        VertexInfo& vi = info[v];
        vi.lives = p.lives[v];
        if (count[v] >= 2 && vi.kind != Kind::kLink) vi.kind = Kind::kInternal;
        if (vi.kind == Kind::kSingle) vi.token = static_cast<char>(kSingleToken + single_digit(vi.lives));
        if (vi.kind == Kind::kLink) vi.token = static_cast<char>(kLinkToken + (vi.lives == 0 ? 1 : 0));
    }
    return info;
}

struct Placement {
    int region;  // index into the component's region list
    bool reversed;
    const std::pair<int, std::size_t>* layout;
};

std::string component_key(const Position& p, const std::vector<int>& region_ids) {
    Scratch& s = scratch();
    s.fit(p.lives.size());
    const auto info = classify(p, region_ids);
    std::vector<RegionCanon> canons;
    canons.reserve(region_ids.size());
    for (int r : region_ids) canons.push_back(canonical_region(p.regions[static_cast<std::size_t>(r)], info, s));

    std::vector<Placement> plan;
    std::vector<std::pair<int, std::size_t>> single_layout;
    std::vector<Embeddings> embeddings;
    if (region_ids.size() == 1) {
        const auto& o = canons[0].orientations.front();
        for (std::size_t i = 0; i < o.order.size(); ++i) single_layout.emplace_back(o.order[i], o.canons[i].starts.front());
        plan.push_back({0, o.reversed, single_layout.data()});
    } else {
        std::vector<int> order(region_ids.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return canons[static_cast<std::size_t>(a)].shape < canons[static_cast<std::size_t>(b)].shape;
        });
        embeddings.reserve(region_ids.size());
        for (std::size_t i = 0; i < region_ids.size(); ++i)
            embeddings.push_back(region_embeddings(p.regions[static_cast<std::size_t>(region_ids[i])], canons[i], info));
        std::vector<std::vector<int>> groups;
        for (int i : order) {
            const auto& shape = canons[static_cast<std::size_t>(i)].shape;
            if (groups.empty() || canons[static_cast<std::size_t>(groups.back().front())].shape != shape)
                groups.emplace_back();
            groups.back().push_back(i);
        }
        LinkSearch search(groups, embeddings, p.lives.size());
        for (auto [r, e] : search.run()) {
            const Embeddings& em = embeddings[static_cast<std::size_t>(r)];
            plan.push_back({r, em.reversed[e] != 0, em.layout_of(e)});
        }
    }

    std::string out;
    std::vector<int> names(p.lives.size(), -1);
    int next_live = 0;
    int next_dead = 0;
    for (std::size_t slot = 0; slot < plan.size(); ++slot) {
        if (slot) out += '}';
        const auto& region = p.regions[static_cast<std::size_t>(region_ids[static_cast<std::size_t>(plan[slot].region)])];
        for (std::size_t bi = 0; bi < region.size(); ++bi) {
            if (bi) out += '.';
            const auto [bidx, start] = plan[slot].layout[bi];
            const auto& b = region[static_cast<std::size_t>(bidx)];
            const std::size_t n = b.size();
            for (std::size_t k = 0; k < n; ++k) {
                const auto v = static_cast<std::size_t>(b[walk(start, k, n, plan[slot].reversed)]);
                if (info[v].kind == Kind::kSingle) {
                    out += static_cast<char>('0' + single_digit(info[v].lives));
                    continue;
                }
                const bool dead = info[v].lives == 0;
                if (names[v] < 0) names[v] = dead ? next_dead++ : next_live++;
                append_label(out, names[v], dead);
            }
        }
    }
    return out;
}

bool region_has_move(const Region& region, const std::vector<int>& lives) {
    int first_live = -1;
    for (const auto& b : region)
        for (int v : b) {
            const int l = lives[static_cast<std::size_t>(v)];
            if (l >= 2) return true;
            if (l >= 1) {
                if (first_live >= 0 && first_live != v) return true;
                first_live = v;
            }
        }
    return false;
}

Boundary rotated(const Boundary& b, std::size_t start) {
    Boundary out;
    out.reserve(b.size() + 2);
    for (std::size_t k = 0; k < b.size(); ++k) out.push_back(b[(start + k) % b.size()]);
    return out;
}

// Boundaries whose vertices occur nowhere else are interchangeable with any
// other such boundary of the same shape; everything else is its own class.
std::vector<std::vector<int>> boundary_classes(const Region& region, const std::vector<int>& occurrences,
                                               const std::vector<int>& lives) {
    std::vector<VertexInfo> info(lives.size());
    std::vector<std::vector<int>> classes;
    std::map<std::string, std::size_t> by_shape;
    Scratch& s = scratch();
    s.fit(lives.size());
    for (std::size_t b = 0; b < region.size(); ++b) {
        bool free = true;
        std::map<int, int> local;
        for (int v : region[b]) ++local[v];
        for (auto [v, c] : local)
            if (occurrences[static_cast<std::size_t>(v)] != c) free = false;
        if (!free) {
            classes.push_back({static_cast<int>(b)});
            continue;
        }
        for (auto [v, c] : local) {
            VertexInfo& vi = info[static_cast<std::size_t>(v)];
            vi.kind = c >= 2 ? Kind::kInternal : Kind::kSingle;
            vi.lives = lives[static_cast<std::size_t>(v)];
            vi.token = static_cast<char>(kSingleToken + single_digit(vi.lives));
        }
        const BoundaryCanon bc = canonical_boundary(region[b], false, info, s);
        auto it = by_shape.find(bc.tokens);
        if (it == by_shape.end()) {
            by_shape.emplace(bc.tokens, classes.size());
            classes.push_back({static_cast<int>(b)});
        } else {
            classes[it->second].push_back(static_cast<int>(b));
        }
    }
    return classes;
}

}  // namespace

int Position::total_lives() const {
    std::vector<bool> seen(lives.size(), false);
    int total = 0;
    for (const auto& r : regions)
        for (const auto& b : r)
            for (int v : b)
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = true;
                    total += lives[static_cast<std::size_t>(v)];
                }
    return total;
}

Position n_spot(int n) {
    Position p;
    if (n <= 0) return p;
    Region r;
    for (int i = 0; i < n; ++i) {
        p.lives.push_back(3);
        r.push_back({i});
    }
    p.regions.push_back(std::move(r));
    return p;
}

Position parse(std::string_view s) {
    if (s.size() > 2 && s[0] == '0' && s[1] == '*') {
        int n = 0;
        for (std::size_t i = 2; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw SyntaxError("expected spot count after '0*'", i);
            n = n * 10 + (s[i] - '0');
            if (n > 1000) throw SyntaxError("spot count too large", i);
        }
        return n_spot(n);
    }
    Position p;
    if (s.empty()) return p;

    std::map<std::pair<int, bool>, int> labels;  // (index, dead) -> vertex, per component
    std::map<int, int> label_uses;
    Region region;
    Boundary boundary;
    std::size_t boundary_start = 0;

    auto end_boundary = [&](std::size_t at) {
        if (boundary.empty()) throw SyntaxError("empty boundary", at);
        region.push_back(std::move(boundary));
        boundary.clear();
        boundary_start = at + 1;
    };
    auto end_region = [&](std::size_t at) {
        end_boundary(at);
        p.regions.push_back(std::move(region));
        region.clear();
    };
    auto end_component = [&](std::size_t at) {
        end_region(at);
        for (auto [v, uses] : label_uses) {
            const int l = p.lives[static_cast<std::size_t>(v)];
            if ((l == 1 && uses != 2) || (l == 0 && (uses < 2 || uses > 3)))
                throw SyntaxError("label used " + std::to_string(uses) + " times", at);
        }
        labels.clear();
        label_uses.clear();
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const char ch = s[i];
        if (ch >= '0' && ch <= '3') {
            if (ch == '0' && (i != boundary_start || (i + 1 < s.size() && s[i + 1] != '.' && s[i + 1] != '}' && s[i + 1] != '+')))
                throw SyntaxError("'0' must form a boundary on its own", i);
            p.lives.push_back(3 - (ch - '0'));
            boundary.push_back(static_cast<int>(p.lives.size()) - 1);
        } else if ((ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z')) {
            const bool dead = ch >= 'a';
            int index = dead ? ch - 'a' : ch - 'A';
            while (i + 1 < s.size() && s[i + 1] == '\'') {
                index += 26;
                ++i;
            }
            auto [it, inserted] = labels.try_emplace({index, dead}, static_cast<int>(p.lives.size()));
            if (inserted) p.lives.push_back(dead ? 0 : 1);
            ++label_uses[it->second];
            boundary.push_back(it->second);
        } else if (ch == '.') {
            end_boundary(i);
        } else if (ch == '}') {
            end_region(i);
        } else if (ch == '+') {
            end_component(i);
        } else {
            throw SyntaxError(std::string("unexpected character '") + ch + "'", i);
        }
    }
    end_component(s.size());
    try {
        validate(p);
    } catch (const std::invalid_argument& e) {
        throw SyntaxError(e.what(), s.size());
    }
    return p;
}

void validate(const Position& p) {
    const std::size_t nv = p.lives.size();
    std::vector<int> count(nv, 0);
    for (std::size_t r = 0; r < p.regions.size(); ++r) {
        if (p.regions[r].empty()) throw std::invalid_argument("region without boundary");
        std::map<int, std::size_t> boundary_of;
        for (std::size_t b = 0; b < p.regions[r].size(); ++b) {
            const auto& bd = p.regions[r][b];
            if (bd.empty()) throw std::invalid_argument("empty boundary");
            for (int v : bd) {
                if (v < 0 || static_cast<std::size_t>(v) >= nv) throw std::invalid_argument("vertex out of range");
                ++count[static_cast<std::size_t>(v)];
                auto [it, inserted] = boundary_of.emplace(v, b);
                if (!inserted && it->second != b)
                    throw std::invalid_argument("vertex on two boundaries of one region");
                if (p.lives[static_cast<std::size_t>(v)] == 3 && bd.size() != 1)
                    throw std::invalid_argument("isolated spot inside a longer boundary");
            }
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        const int l = p.lives[v];
        if (l < 0 || l > 3) throw std::invalid_argument("lives out of range");
        const int degree = 3 - l;
        if (l == 3 && count[v] > 1) throw std::invalid_argument("isolated spot occurs twice");
        if (l < 3 && count[v] > degree) throw std::invalid_argument("vertex occurs more often than its degree");
    }
}

std::string canonical_key(const Position& p) {
    std::vector<std::string> parts;
    for (const auto& comp : region_components(p)) parts.push_back(component_key(p, comp));
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '+';
        out += parts[i];
    }
    return out;
}

Position simplify(const Position& p) {
    Position out;
    std::vector<int> rename(p.lives.size(), -1);
    for (const auto& region : p.regions) {
        if (!region_has_move(region, p.lives)) continue;
        Region kept;
        for (const auto& b : region) {
            Boundary nb;
            for (int v : b) {
                if (p.lives[static_cast<std::size_t>(v)] == 0) continue;
                int& id = rename[static_cast<std::size_t>(v)];
                if (id < 0) {
                    id = static_cast<int>(out.lives.size());
                    out.lives.push_back(p.lives[static_cast<std::size_t>(v)]);
                }
                nb.push_back(id);
            }
            if (!nb.empty()) kept.push_back(std::move(nb));
        }
        out.regions.push_back(std::move(kept));
    }
    return out;
}

std::vector<Position> decompose(const Position& p) {
    const Position s = simplify(p);
    std::vector<Position> out;
    for (const auto& comp : region_components(s)) {
        Position part;
        std::vector<int> rename(s.lives.size(), -1);
        for (int r : comp) {
            Region region;
            for (const auto& b : s.regions[static_cast<std::size_t>(r)]) {
                Boundary nb;
                for (int v : b) {
                    int& id = rename[static_cast<std::size_t>(v)];
                    if (id < 0) {
                        id = static_cast<int>(part.lives.size());
                        part.lives.push_back(s.lives[static_cast<std::size_t>(v)]);
                    }
                    nb.push_back(id);
                }
                region.push_back(std::move(nb));
            }
            part.regions.push_back(std::move(region));
        }
        out.push_back(std::move(part));
    }
    std::sort(out.begin(), out.end(),
              [](const Position& a, const Position& b) { return canonical_key(a) < canonical_key(b); });
    return out;
}

namespace {

// Calls `emit` with every successor of `p` (unsimplified, possibly repeated
// up to isomorphism).
template <typename Emit>
void for_each_successor(const Position& p, Emit&& emit) {
    std::vector<int> occurrences(p.lives.size(), 0);
    for (const auto& r : p.regions)
        for (const auto& b : r)
            for (int v : b) ++occurrences[static_cast<std::size_t>(v)];
    const int fresh = static_cast<int>(p.lives.size());

    auto successor = [&](std::size_t ri, std::vector<Region> replacement, int a, int b, int cost_a, int cost_b) {
        Position next;
        next.lives = p.lives;
        next.lives.push_back(1);
        next.lives[static_cast<std::size_t>(a)] -= cost_a;
        if (b >= 0) next.lives[static_cast<std::size_t>(b)] -= cost_b;
        next.regions.reserve(p.regions.size() + 1);
        for (std::size_t r = 0; r < p.regions.size(); ++r) {
            if (r == ri)
                next.regions.push_back(std::move(replacement[0]));
            else
                next.regions.push_back(p.regions[r]);
        }
        for (std::size_t k = 1; k < replacement.size(); ++k) next.regions.push_back(std::move(replacement[k]));
        emit(std::move(next));
    };

    for (std::size_t ri = 0; ri < p.regions.size(); ++ri) {
        const Region& region = p.regions[ri];
        if (!region_has_move(region, p.lives)) continue;
        const auto classes = boundary_classes(region, occurrences, p.lives);

        // Two-boundary moves: joining two components merges their boundaries.
        for (std::size_t ca = 0; ca < classes.size(); ++ca) {
            for (std::size_t cb = ca; cb < classes.size(); ++cb) {
                if (ca == cb && classes[ca].size() < 2) continue;
                const auto bi = static_cast<std::size_t>(classes[ca][0]);
                const auto bj = static_cast<std::size_t>(ca == cb ? classes[ca][1] : classes[cb][0]);
                const Boundary& b1 = region[bi];
                const Boundary& b2 = region[bj];
                for (std::size_t x = 0; x < b1.size(); ++x) {
                    const int u = b1[x];
                    if (p.lives[static_cast<std::size_t>(u)] < 1) continue;
                    for (std::size_t y = 0; y < b2.size(); ++y) {
                        const int w = b2[y];
                        if (p.lives[static_cast<std::size_t>(w)] < 1) continue;
                        Boundary merged = rotated(b1, x);
                        if (p.lives[static_cast<std::size_t>(u)] != 3) merged.push_back(u);
                        merged.push_back(fresh);
                        Boundary second = rotated(b2, y);
                        merged.insert(merged.end(), second.begin(), second.end());
                        if (p.lives[static_cast<std::size_t>(w)] != 3) merged.push_back(w);
                        merged.push_back(fresh);
                        Region nr;
                        for (std::size_t k = 0; k < region.size(); ++k)
                            if (k != bi && k != bj) nr.push_back(region[k]);
                        nr.push_back(std::move(merged));
                        std::vector<Region> rep;
                        rep.push_back(std::move(nr));
                        successor(ri, std::move(rep), u, w, 1, 1);
                    }
                }
            }
        }

        // One-boundary moves: a curve between two points of one boundary (or
        // a loop) splits the region; the other boundaries go to either side.
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto bi = static_cast<std::size_t>(classes[c][0]);
            const Boundary& b = region[bi];
            const std::size_t n = b.size();

            // Remaining boundaries grouped by interchangeability.
            std::vector<std::vector<int>> others;
            for (std::size_t k = 0; k < classes.size(); ++k) {
                std::vector<int> members;
                for (int m : classes[k])
                    if (static_cast<std::size_t>(m) != bi) members.push_back(m);
                if (!members.empty()) others.push_back(std::move(members));
            }

            for (std::size_t x = 0; x < n; ++x) {
                const int u = b[x];
                const int lu = p.lives[static_cast<std::size_t>(u)];
                if (lu < 1) continue;
                for (std::size_t y = x; y < n; ++y) {
                    const int w = b[y];
                    const int lw = p.lives[static_cast<std::size_t>(w)];
                    Boundary side1;
                    Boundary side2;
                    if (x == y) {
                        if (lu < 2) continue;
                        side1 = {u, fresh};
                        side2 = rotated(b, x);
                        if (lu != 3) side2.push_back(u);
                        side2.push_back(fresh);
                    } else {
                        if (u == w || lw < 1) continue;
                        for (std::size_t k = x; k <= y; ++k) side1.push_back(b[k]);
                        side1.push_back(fresh);
                        for (std::size_t k = y; k < n; ++k) side2.push_back(b[k]);
                        for (std::size_t k = 0; k <= x; ++k) side2.push_back(b[k]);
                        side2.push_back(fresh);
                    }
                    // Odometer over how many members of each class go to side 1.
                    std::vector<std::size_t> take(others.size(), 0);
                    while (true) {
                        Region r1{side1};
                        Region r2{side2};
                        for (std::size_t k = 0; k < others.size(); ++k)
                            for (std::size_t m = 0; m < others[k].size(); ++m)
                                (m < take[k] ? r1 : r2).push_back(region[static_cast<std::size_t>(others[k][m])]);
                        std::vector<Region> rep;
                        rep.push_back(std::move(r1));
                        rep.push_back(std::move(r2));
                        if (x == y)
                            successor(ri, std::move(rep), u, -1, 2, 0);
                        else
                            successor(ri, std::move(rep), u, w, 1, 1);
                        std::size_t k = 0;
                        while (k < others.size() && take[k] == others[k].size()) take[k++] = 0;
                        if (k == others.size()) break;
                        ++take[k];
                    }
                }
            }
        }
    }
}

}  // namespace

std::vector<Position> moves(const Position& p) {
    std::vector<Position> out;
    std::set<std::string> seen;
    for_each_successor(p, [&](Position next) {
        if (seen.insert(canonical_key(next)).second) out.push_back(std::move(next));
    });
    return out;
}

PositionKey SproutsGame::parse(std::string_view notation) const {
    return canonical_key(simplify(sprouts::parse(notation)));
}

std::vector<PositionKey> SproutsGame::children(std::string_view position) const {
    std::vector<PositionKey> out;
    if (position.empty()) return out;
    const Position p = sprouts::parse(position);
    std::set<std::string> seen;
    for_each_successor(p, [&](Position next) {
        auto key = canonical_key(simplify(next));
        if (seen.insert(key).second) out.push_back(std::move(key));
    });
    return out;
}

std::vector<PositionKey> SproutsGame::decompose(std::string_view position) const {
    std::vector<PositionKey> out;
    std::size_t pos = 0;
    while (pos < position.size()) {
        std::size_t end = position.find('+', pos);
        if (end == std::string_view::npos) end = position.size();
        out.emplace_back(position.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

std::uint64_t SproutsGame::heuristic_rank(std::string_view position) const {
    if (position.empty()) return 0;
    return static_cast<std::uint64_t>(sprouts::parse(position).total_lives());
}

}  // namespace spots::sprouts
