#include "clfree/gnp_props.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <json.hpp>

namespace clfree {

CodegreeReport check_codegree(const PairStateGraph& g) {
    CodegreeReport rep;
    std::unordered_map<std::uint64_t, std::uint32_t> codeg;
    for (Vtx v = 1; v <= g.n(); ++v) {
        const auto& nb = g.neighbors(v);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const std::uint64_t key = g.rank(nb[i], nb[j]);
                rep.max_codegree =
                    std::max<std::uint64_t>(rep.max_codegree, ++codeg[key]);
            }
    }
    rep.holds = rep.max_codegree <= 9;
    return rep;
}

IndependentSubset greedy_independent_subset(const PairStateGraph& g,
                                            const std::vector<Vtx>& U) {
    if (U.empty())
        throw std::invalid_argument("greedy_independent_subset: U nonempty required");
    IndependentSubset out;
    std::vector<Vtx> W = U;
    std::sort(W.begin(), W.end());
    W.erase(std::unique(W.begin(), W.end()), W.end());
    std::vector<std::uint8_t> in_W = make_mask(g.n(), W);
    while (!W.empty()) {
        // min induced degree, ties by smallest label (W is sorted)
        Vtx best = 0;
        std::size_t best_deg = ~std::size_t{0};
        for (const Vtx v : W) {
            std::size_t d = 0;
            for (const Vtx w : g.neighbors(v))
                if (in_W[w]) ++d;
            if (d < best_deg) {
                best_deg = d;
                best = v;
            }
        }
        if (best_deg > 5) out.premise_failed = true;
        out.S.push_back(best);
        in_W[best] = 0;
        for (const Vtx w : g.neighbors(best)) in_W[w] = 0;
        std::vector<Vtx> next;
        next.reserve(W.size());
        for (const Vtx v : W)
            if (in_W[v]) next.push_back(v);
        W.swap(next);
    }
    std::sort(out.S.begin(), out.S.end());
    return out;
}

DegreeReport check_degree_D(const PairStateGraph& g, const ProcessParams& params) {
    DegreeReport rep;
    rep.max_degree = g.max_degree();
    rep.bound = static_cast<double>(params.n) * params.p *
                std::pow(static_cast<double>(params.n), 2.0 * params.eps);
    rep.holds = static_cast<double>(rep.max_degree) <= rep.bound;
    return rep;
}

namespace {

void require_disjoint(const std::vector<Vtx>& A, const std::vector<Vtx>& S,
                      const char* who) {
    std::vector<Vtx> a = A, s = S;
    std::sort(a.begin(), a.end());
    std::sort(s.begin(), s.end());
    std::vector<Vtx> inter;
    std::set_intersection(a.begin(), a.end(), s.begin(), s.end(),
                          std::back_inserter(inter));
    if (!inter.empty())
        throw std::invalid_argument(std::string(who) + ": sets must be disjoint");
}

double pown(const ProcessParams& params, double expo) {
    return std::pow(static_cast<double>(params.n), expo);
}

std::vector<Vtx> set_union_sorted(std::vector<Vtx> a, const std::vector<Vtx>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

// edges with one endpoint in S, the other in T; a pair inside both counted once
std::uint64_t edges_between(const PairStateGraph& g, const std::vector<Vtx>& S,
                            const std::vector<Vtx>& T) {
    const std::vector<std::uint8_t> s_mask = make_mask(g.n(), S);
    const std::vector<std::uint8_t> t_mask = make_mask(g.n(), T);
    std::uint64_t c = 0;
    for (const VertexPair& e : g.edge_list())
        if ((s_mask[e.a] && t_mask[e.b]) || (t_mask[e.a] && s_mask[e.b])) ++c;
    return c;
}

} // namespace

EdgesBoundedReport check_edges_bounded_M(const PairStateGraph& g,
                                         const std::vector<Vtx>& A,
                                         const std::vector<Vtx>& S,
                                         const ProcessParams& params) {
    require_disjoint(A, S, "check_edges_bounded_M");
    const double cap = static_cast<double>(params.k) * pown(params, 5.0 * params.eps);
    if (static_cast<double>(A.size()) > cap || static_cast<double>(S.size()) > cap)
        throw std::invalid_argument(
            "check_edges_bounded_M: |A|,|S| <= k n^{5 eps} required");
    const LayeredNeighborhood ln = layered_neighborhood(
        g, A, set_union_sorted(A, S), params.ell - 3, params.r);
    EdgesBoundedReport rep;
    rep.edge_count = edges_between(g, S, ln.up_to(params.ell - 3));
    rep.bound = static_cast<double>(params.k) *
                pown(params, 4.0 * params.ell * params.eps);
    rep.holds = static_cast<double>(rep.edge_count) <= rep.bound;
    return rep;
}

Q1Report check_Q1(const PairStateGraph& g, Vtx v, const std::vector<Vtx>& A,
                  const std::vector<Vtx>& X, std::uint32_t j, std::uint32_t d,
                  const ProcessParams& params) {
    if (j < 2 || j > params.ell - 1)
        throw std::domain_error("check_Q1: 2 <= j <= ell-1 required");
    if (d > params.ell - 3) throw std::domain_error("check_Q1: d <= ell-3 required");
    {
        const std::vector<std::uint8_t> xm = make_mask(g.n(), X);
        for (const Vtx a : A)
            if (!xm[a]) throw std::invalid_argument("check_Q1: A subseteq X required");
    }
    const LayeredNeighborhood ln = layered_neighborhood(g, A, X, d, params.r);
    const std::vector<std::uint8_t> n_mask = make_mask(g.n(), ln.up_to(d));

    // DFS from v; prefix vertices stay outside N^{(<=d)}(A,X), endpoint inside.
    std::vector<std::uint8_t> hit(g.n() + 1, 0);
    std::vector<std::uint8_t> on_path(g.n() + 1, 0);
    std::uint64_t count = 0;
    auto rec = [&](auto&& self, Vtx at, std::uint32_t rem) -> void {
        for (const Vtx w : g.neighbors(at)) {
            if (on_path[w]) continue;
            if (rem == 1) {
                if (n_mask[w] && !hit[w]) {
                    hit[w] = 1;
                    ++count;
                }
                continue;
            }
            if (n_mask[w]) continue;
            on_path[w] = 1;
            self(self, w, rem - 1);
            on_path[w] = 0;
        }
    };
    if (!n_mask[v]) { // w_0 = v must avoid the set as well
        on_path[v] = 1;
        rec(rec, v, j);
    }
    Q1Report rep;
    rep.witness_count = count;
    rep.bound = std::pow(static_cast<double>(params.n) * params.p,
                         static_cast<double>(j) - 1.0) *
                pown(params, 9.0 * params.ell * params.eps);
    rep.holds = static_cast<double>(count) <= rep.bound;
    return rep;
}

DeletionResult deletion_greedy(const std::vector<std::vector<VertexPair>>& copies,
                               double mu_target, double k_slack,
                               std::int64_t b_budget) {
    if (b_budget < 0) throw std::domain_error("deletion_greedy: b_budget >= 0");
    DeletionResult out;
    const double target = mu_target + k_slack;
    std::vector<std::uint8_t> alive(copies.size(), 1);
    std::set<VertexPair> deleted;
    std::uint64_t survivors = copies.size();

    auto survives = [&](std::size_t idx) {
        for (const VertexPair& e : copies[idx])
            if (deleted.count(e)) return false;
        return true;
    };

    while (static_cast<double>(survivors) > target &&
           static_cast<std::int64_t>(out.I0.size()) < b_budget) {
        // member whose edges meet the most survivors (itself included)
        std::size_t best = copies.size();
        std::uint64_t best_meet = 0;
        for (std::size_t c = 0; c < copies.size(); ++c) {
            if (!alive[c]) continue;
            std::uint64_t meet = 0;
            for (std::size_t o = 0; o < copies.size(); ++o) {
                if (!alive[o]) continue;
                bool inter = false;
                for (const VertexPair& e : copies[c]) {
                    if (std::find(copies[o].begin(), copies[o].end(), e) !=
                        copies[o].end()) {
                        inter = true;
                        break;
                    }
                }
                if (inter) ++meet;
            }
            if (meet > best_meet) {
                best_meet = meet;
                best = c;
            }
        }
        if (best == copies.size()) break; // nothing intersects anything
        out.I0.push_back(best);
        for (const VertexPair& e : copies[best]) deleted.insert(e);
        survivors = 0;
        for (std::size_t c = 0; c < copies.size(); ++c) {
            alive[c] = survives(c) ? 1 : 0;
            if (alive[c]) ++survivors;
        }
    }
    out.E0.assign(deleted.begin(), deleted.end());
    out.remaining_count = survivors;
    out.success = static_cast<double>(survivors) <= target;
    return out;
}

FQ2Report build_F_Q2(const PairStateGraph& g, const std::vector<Vtx>& A,
                     const std::vector<Vtx>& B, const ProcessParams& params) {
    if (static_cast<std::int64_t>(A.size()) > params.k ||
        static_cast<std::int64_t>(B.size()) > params.k)
        throw std::invalid_argument("build_F_Q2: |A|,|B| <= k required");
    const std::uint32_t ell = params.ell;
    const double np = static_cast<double>(params.n) * params.p;
    const std::int64_t b_budget = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(params.k) * pown(params, params.eps)));
    const std::vector<Vtx> AB = set_union_sorted(A, B);

    FQ2Report rep;
    std::set<VertexPair> F_acc;
    rep.per_jd_counts.assign(ell, {});
    for (std::uint32_t j = 1; j <= ell - 1; ++j) {
        for (std::uint32_t d = 0; d + 4 <= ell; ++d) {
            const auto family = jd_path_edge_sets(g, A, B, AB, j, d, params.r);
            const double mu_bar = static_cast<double>(params.k) * params.k *
                                  std::pow(np, static_cast<double>(j) - 3.0) *
                                  pown(params, 2.0 * ell * params.eps);
            const double kappa_j = static_cast<double>(params.k) * params.k *
                                   std::pow(np, static_cast<double>(j) - 3.0) *
                                   pown(params, 3.0 * ell * params.eps);
            const DeletionResult del =
                deletion_greedy(family, mu_bar, kappa_j, b_budget);
            for (const VertexPair& e : del.E0) F_acc.insert(e);
        }
    }
    rep.F.assign(F_acc.begin(), F_acc.end());
    // recount against the unioned F
    bool all_hold = true;
    for (std::uint32_t j = 1; j <= ell - 1; ++j) {
        rep.per_jd_counts[j].assign(ell - 3, 0);
        for (std::uint32_t d = 0; d + 4 <= ell; ++d) {
            const std::uint64_t cnt =
                count_jd_paths(g, A, B, AB, j, d, params.r, rep.F);
            rep.per_jd_counts[j][d] = cnt;
            const double bound = static_cast<double>(params.k) * params.k *
                                 std::pow(np, static_cast<double>(j) - 3.0) *
                                 pown(params, 4.0 * ell * params.eps);
            if (static_cast<double>(cnt) > bound) all_hold = false;
        }
    }
    rep.holds = all_hold;
    rep.f_budget_ok = static_cast<double>(rep.F.size()) <=
                      static_cast<double>(params.k) * pown(params, 2.0 * params.eps);
    return rep;
}

namespace {

// endpoints of edges between S and N^{(<= ell-3)}(A, S u A)
std::vector<Vtx> crossing_endpoints(const PairStateGraph& g,
                                    const std::vector<Vtx>& A,
                                    const std::vector<Vtx>& S,
                                    const ProcessParams& params) {
    const LayeredNeighborhood ln = layered_neighborhood(
        g, A, set_union_sorted(A, S), params.ell - 3, params.r);
    const std::vector<std::uint8_t> n_mask =
        make_mask(g.n(), ln.up_to(params.ell - 3));
    std::set<Vtx> ends;
    for (const Vtx v : S)
        for (const Vtx w : g.neighbors(v))
            if (n_mask[w]) {
                ends.insert(v);
                ends.insert(w);
            }
    return {ends.begin(), ends.end()};
}

} // namespace

P1Report build_X_P1(const PairStateGraph& g, const std::vector<Vtx>& A,
                    const std::vector<Vtx>& S, const ProcessParams& params) {
    require_disjoint(A, S, "build_X_P1");
    const double cap = static_cast<double>(params.k) *
                       pown(params, 5.0 * params.ell * params.eps);
    if (static_cast<double>(A.size()) > cap || static_cast<double>(S.size()) > cap)
        throw std::invalid_argument("build_X_P1: set size over the X budget");

    P1Report rep;
    rep.X = set_union_sorted(set_union_sorted(A, S),
                             crossing_endpoints(g, A, S, params));
    const std::uint32_t ell = params.ell;
    const LayeredNeighborhood ln =
        layered_neighborhood(g, A, rep.X, ell - 3, params.r);
    const std::vector<std::uint8_t> target = make_mask(g.n(), ln.layers[ell - 3]);
    const std::vector<std::uint8_t> a_mask = make_mask(g.n(), A);

    rep.bound = std::pow(static_cast<double>(params.n) * params.p,
                         static_cast<double>(ell) - 3.0) *
                pown(params, 15.0 * ell * params.eps);
    rep.holds = true;
    std::vector<std::uint8_t> hit(g.n() + 1, 0), on_path(g.n() + 1, 0);
    for (const Vtx v : S) {
        std::fill(hit.begin(), hit.end(), 0);
        std::uint64_t count = 0;
        auto rec = [&](auto&& self, Vtx at, std::uint32_t rem, bool first) -> void {
            for (const Vtx w : g.neighbors(at)) {
                if (on_path[w]) continue;
                if (first && a_mask[w]) continue; // w_1 not in A
                if (rem == 1) {
                    if (target[w] && !hit[w]) {
                        hit[w] = 1;
                        ++count;
                    }
                    continue;
                }
                on_path[w] = 1;
                self(self, w, rem - 1, false);
                on_path[w] = 0;
            }
        };
        on_path[v] = 1;
        rec(rec, v, ell - 2, true);
        on_path[v] = 0;
        rep.per_v_counts.push_back(count);
        if (static_cast<double>(count) > rep.bound) rep.holds = false;
    }
    return rep;
}

P2Report build_XF_P2(const PairStateGraph& g, const std::vector<Vtx>& A,
                     const std::vector<Vtx>& B, const ProcessParams& params) {
    require_disjoint(A, B, "build_XF_P2");
    const FQ2Report fq = build_F_Q2(g, A, B, params);
    const std::uint32_t ell = params.ell;

    P2Report rep;
    rep.F = fq.F;
    const std::vector<std::uint8_t> a_mask = make_mask(g.n(), A);
    std::set<Vtx> vf;
    for (const VertexPair& e : rep.F) {
        if (!a_mask[e.a]) vf.insert(e.a);
        if (!a_mask[e.b]) vf.insert(e.b);
    }
    const std::vector<Vtx> V_F(vf.begin(), vf.end());
    const std::vector<Vtx> BVF = set_union_sorted(B, V_F);
    const std::vector<Vtx> V_BF = crossing_endpoints(g, A, BVF, params);
    rep.X = set_union_sorted(set_union_sorted(A, BVF), V_BF);

    const LayeredNeighborhood ln =
        layered_neighborhood(g, A, rep.X, ell - 4, params.r);
    const std::vector<std::uint8_t> target = make_mask(g.n(), ln.layers[ell - 4]);
    std::vector<std::uint8_t> f_mask(g.pair_count(), 0);
    for (const VertexPair& e : rep.F) f_mask[g.rank(e.a, e.b)] = 1;

    // paths b = w_0 .. w_{ell-2} = w with w_1 not in A and
    // (w_2 not in A or {w_0 w_1, w_1 w_2} disjoint from F)
    std::uint64_t pairs = 0;
    std::vector<std::uint8_t> hit(g.n() + 1, 0), on_path(g.n() + 1, 0);
    for (const Vtx b : B) {
        std::fill(hit.begin(), hit.end(), 0);
        auto rec = [&](auto&& self, Vtx at, std::uint32_t depth,
                       bool first_two_clear) -> void {
            for (const Vtx w : g.neighbors(at)) {
                if (on_path[w]) continue;
                if (depth == 1 && a_mask[w]) continue; // w_1 not in A
                bool clear = first_two_clear;
                if (depth <= 2) clear = clear && !f_mask[g.rank(at, w)];
                if (depth == 2 && a_mask[w] && !clear) continue;
                if (depth == ell - 2) {
                    if (target[w] && !hit[w]) {
                        hit[w] = 1;
                        ++pairs;
                    }
                    continue;
                }
                on_path[w] = 1;
                self(self, w, depth + 1, clear);
                on_path[w] = 0;
            }
        };
        on_path[b] = 1;
        rec(rec, b, 1, true);
        on_path[b] = 0;
    }
    rep.pair_count = pairs;
    rep.bound = static_cast<double>(params.k) * params.k *
                std::pow(static_cast<double>(params.n) * params.p,
                         static_cast<double>(ell) - 5.0) *
                pown(params, 15.0 * ell * params.eps);
    rep.holds = static_cast<double>(pairs) <= rep.bound;
    return rep;
}

KLReport check_KL(const PairStateGraph& g, const ProcessParams& params,
                  const std::vector<Vtx>& A, const std::vector<Vtx>& B,
                  std::uint32_t d) {
    const double a = static_cast<double>(A.size());
    const double b = static_cast<double>(B.size());
    const double d_min = std::max(
        16.0 / params.eps, 2.0 * a * params.p * pown(params, 2.0 * params.eps));
    if (static_cast<double>(d) < d_min)
        throw std::invalid_argument("check_KL: d below the L-event threshold");

    KLReport rep;
    const PairStatistics st = pair_statistics(g, A, B, d);
    rep.e_AB = st.e_AB;
    rep.K_bound = std::max(4.0 / params.eps * (a + b),
                           params.p * a * b * pown(params, 2.0 * params.eps));
    rep.K_holds = static_cast<double>(st.e_AB) < rep.K_bound;
    rep.D_Ad_size = st.D_Ad.size();
    rep.L_bound = 16.0 / params.eps / static_cast<double>(d) * a;
    rep.L_holds = static_cast<double>(rep.D_Ad_size) < rep.L_bound;
    if (!rep.K_holds) rep.witness = "e(A,B) >= bound";
    if (!rep.L_holds)
        rep.witness += rep.witness.empty() ? "|D_{A,d}| >= bound"
                                           : "; |D_{A,d}| >= bound";
    return rep;
}

std::string verdict_json(const std::string& name, bool holds, double value,
                         double bound, const std::string& witness) {
    nlohmann::json j;
    j["name"] = name;
    j["holds"] = holds;
    j["value"] = value;
    j["bound"] = bound;
    if (!witness.empty()) j["witnesses"] = witness;
    return j.dump();
}

} // namespace clfree
