#include "clfree/paths.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace clfree {

std::vector<std::uint8_t> make_mask(Vtx n, const std::vector<Vtx>& verts) {
    std::vector<std::uint8_t> mask(n + 1, 0);
    for (const Vtx v : verts) mask.at(v) = 1;
    return mask;
}

namespace {

void collect_paths_rec(const PairStateGraph& g, Vtx at, std::uint32_t rem,
                       PathScratch& s, PathRec& cur, std::vector<PathRec>& out) {
    if (rem == 0) {
        out.push_back(cur);
        return;
    }
    for (const Vtx w : g.neighbors(at)) {
        if (s.on_path[w]) continue;
        s.on_path[w] = 1;
        cur.v[cur.len + 1] = w;
        ++cur.len;
        collect_paths_rec(g, w, rem - 1, s, cur, out);
        --cur.len;
        s.on_path[w] = 0;
    }
}

} // namespace

void collect_paths(const PairStateGraph& g, Vtx src, std::uint32_t len,
                   PathScratch& s, std::vector<PathRec>& out) {
    if (len > kMaxPathLen) throw std::domain_error("collect_paths: len too large");
    PathRec cur;
    cur.v[0] = src;
    cur.len = 0;
    s.on_path[src] = 1;
    collect_paths_rec(g, src, len, s, cur, out);
    s.on_path[src] = 0;
}

namespace {

std::uint64_t count_paths_rec(const PairStateGraph& g, Vtx at, Vtx y,
                              std::uint32_t rem, bool used_required,
                              const std::optional<VertexPair>& req,
                              std::vector<std::uint8_t>& on_path) {
    if (rem == 0) return 0; // callers guarantee rem >= 1 on entry
    std::uint64_t total = 0;
    for (const Vtx w : g.neighbors(at)) {
        const bool traverses_req = req && VertexPair(at, w) == *req;
        if (w == y) {
            if (rem == 1 && (!req || used_required || traverses_req)) ++total;
            continue;
        }
        if (rem == 1 || on_path[w]) continue;
        on_path[w] = 1;
        total += count_paths_rec(g, w, y, rem - 1, used_required || traverses_req,
                                 req, on_path);
        on_path[w] = 0;
    }
    return total;
}

} // namespace

std::uint64_t count_paths_exact_len(const PairStateGraph& g, Vtx x, Vtx y,
                                    std::uint32_t len,
                                    const std::vector<Vtx>& forbidden,
                                    std::optional<VertexPair> required_edge) {
    if (x == y) throw std::invalid_argument("count_paths_exact_len: x != y");
    if (len < 1 || len > kMaxPathLen)
        throw std::domain_error("count_paths_exact_len: len out of range");
    std::vector<std::uint8_t> on_path(g.n() + 1, 0);
    for (const Vtx v : forbidden) {
        if (v == x || v == y)
            throw std::invalid_argument(
                "count_paths_exact_len: forbidden set must exclude x and y");
        on_path.at(v) = 1;
    }
    on_path[x] = 1;
    return count_paths_rec(g, x, y, len, false, required_edge, on_path);
}

namespace {

bool exists_path_rec(const PairStateGraph& g, Vtx at, Vtx y, std::uint32_t rem,
                     PathScratch& s) {
    for (const Vtx w : g.neighbors(at)) {
        if (w == y) {
            if (rem == 1) return true;
            continue;
        }
        if (rem == 1 || s.on_path[w]) continue;
        if (s.dist[w] > rem - 1) continue; // can't reach y in the budget
        s.on_path[w] = 1;
        const bool found = exists_path_rec(g, w, y, rem - 1, s);
        s.on_path[w] = 0;
        if (found) return true;
    }
    return false;
}

void bfs_dist(const PairStateGraph& g, Vtx src, std::uint32_t cap, PathScratch& s) {
    std::fill(s.dist.begin(), s.dist.end(), cap + 1);
    s.queue.clear();
    s.dist[src] = 0;
    s.queue.push_back(src);
    for (std::size_t head = 0; head < s.queue.size(); ++head) {
        const Vtx v = s.queue[head];
        if (s.dist[v] == cap) continue;
        for (const Vtx w : g.neighbors(v)) {
            if (s.dist[w] > s.dist[v] + 1) {
                s.dist[w] = s.dist[v] + 1;
                s.queue.push_back(w);
            }
        }
    }
}

} // namespace

bool is_open_bruteforce(const PairStateGraph& g, Vtx x, Vtx y, std::uint32_t ell) {
    if (g.state(x, y) == PairState::Edge)
        throw std::logic_error("is_open_bruteforce: pair is already an edge");
    const std::uint32_t len = ell - 1;
    PathScratch s(g.n());
    bfs_dist(g, y, len, s);
    if (s.dist[x] > len) return true;
    s.on_path[x] = 1;
    return !exists_path_rec(g, x, y, len, s);
}

namespace {

bool paths_disjoint(const PathRec& p, const PathRec& q) {
    for (std::uint8_t i = 0; i <= p.len; ++i)
        for (std::uint8_t j = 0; j <= q.len; ++j)
            if (p.v[i] == q.v[j]) return false;
    return true;
}

} // namespace

void closing_pairs_into(const PairStateGraph& g, Vtx u, Vtx v, std::uint32_t ell,
                        PathScratch& s, std::vector<VertexPair>& out) {
    if (g.state(u, v) == PairState::Edge)
        throw std::logic_error("closing_pairs: pair is already an edge");
    out.clear();
    const std::uint32_t total = ell - 2;
    // One DFS per side collects paths of every length 0..ell-2; the split
    // loop below pairs them up.
    std::vector<std::vector<PathRec>> from_u(total + 1), from_v(total + 1);
    for (std::uint32_t a = 0; a <= total; ++a) {
        collect_paths(g, u, a, s, from_u[a]);
        collect_paths(g, v, total - a, s, from_v[total - a]);
    }
    for (std::uint32_t a = 0; a <= total; ++a) {
        const std::uint32_t b = total - a;
        for (const PathRec& pu : from_u[a]) {
            for (const PathRec& pv : from_v[b]) {
                if (!paths_disjoint(pu, pv)) continue;
                const Vtx x = pu.end(), y = pv.end();
                if (g.state(x, y) != PairState::Open) continue;
                out.push_back(VertexPair(x, y));
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<VertexPair> closing_pairs(const PairStateGraph& g, Vtx u, Vtx v,
                                      std::uint32_t ell) {
    PathScratch s(g.n());
    std::vector<VertexPair> out;
    closing_pairs_into(g, u, v, ell, s, out);
    return out;
}

bool pairs_co_cycle(const PairStateGraph& g, VertexPair e, VertexPair f,
                    std::uint32_t ell) {
    if (e == f) return false;
    const std::uint32_t total = ell - 2;
    PathScratch s(g.n());
    std::vector<PathRec> pa, pb;
    for (std::uint32_t a = 0; a <= total; ++a) {
        pa.clear();
        pb.clear();
        collect_paths(g, e.a, a, s, pa);
        collect_paths(g, e.b, total - a, s, pb);
        for (const PathRec& p : pa) {
            const Vtx ta = p.end();
            if (ta != f.a && ta != f.b) continue;
            for (const PathRec& q : pb) {
                const Vtx tb = q.end();
                if (!((ta == f.a && tb == f.b) || (ta == f.b && tb == f.a))) continue;
                if (paths_disjoint(p, q)) return true;
            }
        }
    }
    return false;
}

PairStateGraph recompute_pair_states(const PairStateGraph& g, std::uint32_t ell) {
    PairStateGraph out(g.n(), /*with_open_index=*/true);
    for (const VertexPair& e : g.edge_list()) out.add_edge(e.a, e.b);
    for (Vtx x = 1; x <= g.n(); ++x) {
        for (Vtx y = x + 1; y <= g.n(); ++y) {
            if (out.state(x, y) == PairState::Edge) continue;
            if (!is_open_bruteforce(out, x, y, ell)) out.close_pair(x, y);
        }
    }
    return out;
}

bool in_label_class(Vtx v, std::uint32_t j, std::int64_t r,
                    const std::vector<std::uint8_t>& x_mask) {
    if (x_mask[v]) return false;
    const std::int64_t lo = static_cast<std::int64_t>(j - 1) * r;
    const std::int64_t hi = static_cast<std::int64_t>(j) * r;
    return lo < static_cast<std::int64_t>(v) && static_cast<std::int64_t>(v) <= hi;
}

std::vector<Vtx> LayeredNeighborhood::up_to(std::size_t j) const {
    std::vector<Vtx> out;
    for (std::size_t i = 0; i <= j && i < layers.size(); ++i)
        out.insert(out.end(), layers[i].begin(), layers[i].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LayeredNeighborhood layered_neighborhood(const PairStateGraph& g,
                                         const std::vector<Vtx>& S,
                                         const std::vector<Vtx>& X,
                                         std::uint32_t depth, std::int64_t r) {
    LayeredNeighborhood out;
    out.base = S;
    out.exclusion = X;
    std::sort(out.base.begin(), out.base.end());
    out.base.erase(std::unique(out.base.begin(), out.base.end()), out.base.end());
    std::sort(out.exclusion.begin(), out.exclusion.end());

    const std::vector<std::uint8_t> x_mask = make_mask(g.n(), X);
    out.layers.push_back(out.base);
    std::vector<std::uint8_t> seen(g.n() + 1, 0);
    for (std::uint32_t j = 1; j <= depth; ++j) {
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<Vtx> layer;
        for (const Vtx v : out.layers[j - 1]) {
            for (const Vtx w : g.neighbors(v)) {
                if (seen[w] || !in_label_class(w, j, r, x_mask)) continue;
                seen[w] = 1;
                layer.push_back(w);
            }
        }
        std::sort(layer.begin(), layer.end());
        out.layers.push_back(std::move(layer));
    }
    return out;
}

namespace {

struct JdEnum {
    const PairStateGraph& g;
    std::uint32_t j, d;
    std::int64_t r;
    const std::vector<std::uint8_t>& a_mask;
    const std::vector<std::uint8_t>& x_mask;
    const std::vector<std::uint8_t>& excluded; // by pair rank, may be empty
    std::vector<std::uint8_t> on_path;
    std::array<Vtx, 2 * kMaxPathLen + 2> seq{};
    std::function<void(const Vtx*, std::uint32_t)> sink;

    // position p in [0, j+d]; p = 0 is w_0 in B, p = j is w_j = v_d,
    // p = j + i is v_{d-i}; the last position j+d is v_0 in A.
    bool pos_ok(Vtx w, std::uint32_t p) const {
        if (p < j) return true; // w_1..w_{j-1} unrestricted
        const std::uint32_t dp = d - (p - j); // class index of v_{dp}
        if (dp == 0) return a_mask[w] != 0;
        return in_label_class(w, dp, r, x_mask);
    }

    void rec(Vtx at, std::uint32_t p) {
        if (p == j + d) {
            sink(seq.data(), p + 1);
            return;
        }
        for (const Vtx w : g.neighbors(at)) {
            if (on_path[w] || !pos_ok(w, p + 1)) continue;
            if (!excluded.empty() && excluded[g.rank(at, w)]) continue;
            on_path[w] = 1;
            seq[p + 1] = w;
            rec(w, p + 1);
            on_path[w] = 0;
        }
    }
};

} // namespace

std::uint64_t count_jd_paths(const PairStateGraph& g, const std::vector<Vtx>& A,
                             const std::vector<Vtx>& B, const std::vector<Vtx>& X,
                             std::uint32_t j, std::uint32_t d, std::int64_t r,
                             const std::vector<VertexPair>& excluded_edges) {
    if (j < 1 || j + d > 2 * kMaxPathLen)
        throw std::domain_error("count_jd_paths: j, d out of range");
    const std::vector<std::uint8_t> a_mask = make_mask(g.n(), A);
    const std::vector<std::uint8_t> x_mask = make_mask(g.n(), X);
    std::vector<std::uint8_t> excl;
    if (!excluded_edges.empty()) {
        excl.assign(g.pair_count(), 0);
        for (const VertexPair& e : excluded_edges) excl[g.rank(e.a, e.b)] = 1;
    }
    std::uint64_t count = 0;
    JdEnum en{g, j, d, r, a_mask, x_mask, excl,
              std::vector<std::uint8_t>(g.n() + 1, 0), {},
              [&count](const Vtx*, std::uint32_t) { ++count; }};
    for (const Vtx b : B) {
        en.seq[0] = b;
        en.on_path[b] = 1;
        en.rec(b, 0);
        en.on_path[b] = 0;
    }
    return count;
}

std::vector<std::vector<VertexPair>> jd_path_edge_sets(
    const PairStateGraph& g, const std::vector<Vtx>& A, const std::vector<Vtx>& B,
    const std::vector<Vtx>& X, std::uint32_t j, std::uint32_t d, std::int64_t r) {
    if (j < 1 || j + d > 2 * kMaxPathLen)
        throw std::domain_error("jd_path_edge_sets: j, d out of range");
    const std::vector<std::uint8_t> a_mask = make_mask(g.n(), A);
    const std::vector<std::uint8_t> x_mask = make_mask(g.n(), X);
    const std::vector<std::uint8_t> no_excl;
    std::vector<std::vector<VertexPair>> family;
    JdEnum en{g, j, d, r, a_mask, x_mask, no_excl,
              std::vector<std::uint8_t>(g.n() + 1, 0), {},
              [&family](const Vtx* seq, std::uint32_t count) {
                  std::vector<VertexPair> es;
                  es.reserve(count - 1);
                  for (std::uint32_t i = 0; i + 1 < count; ++i)
                      es.push_back(VertexPair(seq[i], seq[i + 1]));
                  std::sort(es.begin(), es.end());
                  family.push_back(std::move(es));
              }};
    for (const Vtx b : B) {
        en.seq[0] = b;
        en.on_path[b] = 1;
        en.rec(b, 0);
        en.on_path[b] = 0;
    }
    std::sort(family.begin(), family.end());
    family.erase(std::unique(family.begin(), family.end()), family.end());
    return family;
}

PairStatistics pair_statistics(const PairStateGraph& g, const std::vector<Vtx>& A,
                               const std::vector<Vtx>& B, std::uint32_t d) {
    if (d < 1) throw std::domain_error("pair_statistics: d >= 1 required");
    PairStatistics st;
    const std::vector<std::uint8_t> a_mask = make_mask(g.n(), A);
    const std::vector<std::uint8_t> b_mask = make_mask(g.n(), B);
    for (const VertexPair& e : g.edge_list()) {
        if ((a_mask[e.a] && b_mask[e.b]) || (b_mask[e.a] && a_mask[e.b]))
            ++st.e_AB;
    }
    // codegrees via wedge counting
    std::unordered_map<std::uint64_t, std::uint32_t> codeg;
    for (Vtx v = 1; v <= g.n(); ++v) {
        const auto& nb = g.neighbors(v);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t jj = i + 1; jj < nb.size(); ++jj) {
                const std::uint64_t key = g.rank(nb[i], nb[jj]);
                st.codegree_max = std::max<std::uint64_t>(st.codegree_max, ++codeg[key]);
            }
    }
    for (Vtx v = 1; v <= g.n(); ++v) {
        std::uint32_t hits = 0;
        for (const Vtx w : g.neighbors(v))
            if (a_mask[w]) ++hits;
        if (hits >= d) st.D_Ad.push_back(v);
    }
    return st;
}

namespace {

bool exact_len_to_set_rec(const PairStateGraph& g, Vtx at, std::uint32_t rem,
                          const std::vector<std::uint8_t>& target_mask,
                          std::vector<std::uint8_t>& on_path) {
    for (const Vtx w : g.neighbors(at)) {
        if (on_path[w]) continue;
        if (rem == 1) {
            if (target_mask[w]) return true;
            continue;
        }
        on_path[w] = 1;
        const bool found = exact_len_to_set_rec(g, w, rem - 1, target_mask, on_path);
        on_path[w] = 0;
        if (found) return true;
    }
    return false;
}

} // namespace

bool has_exact_len_path_to_set(const PairStateGraph& g, Vtx src, std::uint32_t len,
                               const std::vector<std::uint8_t>& target_mask) {
    if (len == 0) return target_mask[src] != 0;
    std::vector<std::uint8_t> on_path(g.n() + 1, 0);
    on_path[src] = 1;
    return exact_len_to_set_rec(g, src, len, target_mask, on_path);
}

} // namespace clfree
