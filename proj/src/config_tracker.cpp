#include "clfree/config_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <json.hpp>

#include "clfree/gnp_props.hpp"
#include "clfree/rng.hpp"

namespace clfree {

namespace {

std::vector<Vtx> sorted_unique(std::vector<Vtx> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool is_subset(const std::vector<Vtx>& a, const std::vector<Vtx>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

double powd(double b, double e) { return std::pow(b, e); }

} // namespace

std::uint64_t Configuration::full_tuple_count() const {
    std::uint64_t c = static_cast<std::uint64_t>(A.size()) * B.size();
    for (std::uint32_t j = 1; j + 3 <= ell; ++j) {
        c *= V[j].size();
        if (c > (1ull << 62)) return ~0ull;
    }
    return c;
}

Configuration build_configuration(Vtx v_tilde, std::vector<Vtx> U,
                                  std::vector<Vtx> A, std::vector<Vtx> B,
                                  std::vector<Vtx> R, std::uint32_t ell,
                                  std::int64_t r, Vtx n) {
    if (ell < 4 || ell > kMaxPathLen + 1)
        throw std::domain_error("build_configuration: ell out of range");
    Configuration s;
    s.v_tilde = v_tilde;
    s.U = sorted_unique(std::move(U));
    s.A = sorted_unique(std::move(A));
    s.B = sorted_unique(std::move(B));
    s.R = sorted_unique(std::move(R));
    s.ell = ell;
    s.r = r;
    if (std::binary_search(s.U.begin(), s.U.end(), v_tilde))
        throw std::invalid_argument("build_configuration: v_tilde in U");
    if (s.A.empty() || s.A.size() != s.B.size())
        throw std::invalid_argument("build_configuration: |A| = |B| >= 1 required");
    {
        std::vector<Vtx> inter;
        std::set_intersection(s.A.begin(), s.A.end(), s.B.begin(), s.B.end(),
                              std::back_inserter(inter));
        if (!inter.empty())
            throw std::invalid_argument("build_configuration: A, B must be disjoint");
    }
    if (!is_subset(s.A, s.U) || !is_subset(s.B, s.U))
        throw std::invalid_argument("build_configuration: A, B must lie in U");
    if (!is_subset(s.U, s.R) ||
        !std::binary_search(s.R.begin(), s.R.end(), v_tilde))
        throw std::invalid_argument("build_configuration: {v_tilde} u U subseteq R");

    const std::vector<std::uint8_t> r_mask = [&] {
        std::vector<std::uint8_t> m;
        Vtx maxv = v_tilde;
        for (const Vtx v : s.R) maxv = std::max(maxv, v);
        m.assign(maxv + 1, 0);
        for (const Vtx v : s.R) m[v] = 1;
        return m;
    }();
    s.V.assign(ell - 2, {});
    for (std::uint32_t j = 1; j + 3 <= ell + 0u; ++j) {
        const std::int64_t lo = static_cast<std::int64_t>(j - 1) * r;
        const std::int64_t hi =
            std::min<std::int64_t>(static_cast<std::int64_t>(j) * r, n);
        for (std::int64_t v = lo + 1; v <= hi; ++v) {
            const Vtx vv = static_cast<Vtx>(v);
            if (vv < r_mask.size() && r_mask[vv]) continue;
            s.V[j].push_back(vv);
        }
        if (s.V[j].empty()) s.degenerate = true;
    }
    return s;
}

SampledConfiguration subsample_configuration(const Configuration& sigma,
                                             std::uint64_t class_cap,
                                             std::uint64_t seed) {
    if (class_cap == 0)
        throw std::invalid_argument("subsample_configuration: cap >= 1 required");
    SampledConfiguration out;
    out.sigma = sigma;
    CounterRng rng = CounterRng::stream(seed, 3);
    auto shrink = [&](std::vector<Vtx>& set) {
        if (set.size() <= class_cap) return;
        const double fraction =
            static_cast<double>(class_cap) / static_cast<double>(set.size());
        // partial Fisher-Yates, then re-sort for determinism
        for (std::uint64_t i = 0; i < class_cap; ++i) {
            const std::uint64_t pick = i + rng.next_below(set.size() - i);
            std::swap(set[i], set[pick]);
        }
        set.resize(class_cap);
        std::sort(set.begin(), set.end());
        out.scale /= fraction;
    };
    shrink(out.sigma.A);
    shrink(out.sigma.B);
    for (std::uint32_t j = 1; j + 3 <= sigma.ell; ++j) shrink(out.sigma.V[j]);
    return out;
}

std::vector<std::pair<Vtx, Vtx>> closing_pairs_config(const PairStateGraph& g,
                                                      const Configuration& sigma,
                                                      Vtx x, Vtx y, std::uint32_t j) {
    if (x == y) throw std::invalid_argument("closing_pairs_config: x != y");
    if (j < 1 || j > sigma.ell - 1)
        throw std::domain_error("closing_pairs_config: j in [1, ell-1] required");
    const LayeredNeighborhood ln =
        layered_neighborhood(g, sigma.A, sigma.R, sigma.ell - 3, sigma.r);
    const std::vector<std::uint8_t> w_mask =
        make_mask(g.n(), ln.layers[sigma.ell - 3]);
    const std::vector<std::uint8_t> b_mask = make_mask(g.n(), sigma.B);

    PathScratch scratch(g.n());
    std::vector<PathRec> from_x, from_y;
    collect_paths(g, x, j - 1, scratch, from_x);
    collect_paths(g, y, sigma.ell - j - 1, scratch, from_y);

    std::vector<std::pair<Vtx, Vtx>> out;
    for (const PathRec& px : from_x) {
        if (!b_mask[px.end()]) continue;
        for (const PathRec& py : from_y) {
            if (!w_mask[py.end()]) continue;
            bool disjoint = true;
            for (std::uint8_t i = 0; i <= px.len && disjoint; ++i)
                for (std::uint8_t l = 0; l <= py.len; ++l)
                    if (px.v[i] == py.v[l]) {
                        disjoint = false;
                        break;
                    }
            if (disjoint) out.emplace_back(px.end(), py.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TupleLedger::TupleLedger(const Configuration& sigma, const ProcessParams& params)
    : sigma_(sigma), ell_(sigma.ell) {
    r2_threshold_ = 1.0 / params.p *
                    powd(static_cast<double>(params.n),
                         -30.0 * params.ell * params.eps);
    if (sigma_.degenerate)
        throw std::invalid_argument("TupleLedger: degenerate configuration");
    const std::uint64_t total = sigma_.full_tuple_count();
    if (total > 10'000'000ull)
        throw std::length_error(
            "TupleLedger: |T_Sigma| > 1e7; use subsample_configuration");
    levels_.assign(ell_ - 2, {});
    ever_suffix_.assign(ell_ - 2, {});

    // T_{Sigma,0}(0) = A x V_1 x ... x V_{ell-3} x B
    Tuple t{};
    auto rec = [&](auto&& self, std::uint32_t pos) -> void {
        if (pos == ell_ - 2) {
            for (const Vtx b : sigma_.B) {
                t[pos] = b;
                levels_[0].insert(t);
            }
            return;
        }
        const std::vector<Vtx>& cls = (pos == 0) ? sigma_.A : sigma_.V[pos];
        for (const Vtx v : cls) {
            t[pos] = v;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
}

Tuple TupleLedger::suffix_key(const Tuple& t, std::uint32_t j) const {
    Tuple k{};
    for (std::uint32_t i = j; i < ell_ - 1; ++i) k[i] = t[i];
    return k;
}

Tuple TupleLedger::prefix_key(const Tuple& t, std::uint32_t j) const {
    Tuple k{};
    for (std::uint32_t i = 0; i < j; ++i) k[i] = t[i];
    return k;
}

void TupleLedger::record_added(const Tuple& t, std::uint32_t j) {
    const Tuple suf = suffix_key(t, j);
    const Tuple pre = prefix_key(t, j);
    auto [it, inserted] = ever_suffix_[j].emplace(suf, pre);
    if (!inserted && it->second != pre) ut_violated_ = true;
}

LedgerUpdate TupleLedger::tuple_step_update(
    const PairStateGraph& g_before, VertexPair e_next,
    const std::vector<VertexPair>* newly_closed) {
    if (g_before.state(e_next) != PairState::Open)
        throw std::logic_error("tuple_step_update: e_next must be open in G(i)");

    std::vector<VertexPair> closed_local;
    if (!newly_closed) {
        closed_local = closing_pairs(g_before, e_next.a, e_next.b, ell_);
        newly_closed = &closed_local;
    }
    std::vector<VertexPair> closed_sorted = *newly_closed;
    std::sort(closed_sorted.begin(), closed_sorted.end());
    auto e_closes = [&](VertexPair f) {
        return std::binary_search(closed_sorted.begin(), closed_sorted.end(), f);
    };

    LedgerUpdate up;
    up.added.assign(ell_ - 2, 0);
    up.removed.assign(ell_ - 2, 0);

    const std::vector<std::uint8_t> a_mask = make_mask(g_before.n(), sigma_.A);
    std::map<Vtx, bool> blocked_cache; // v_j -> has j-edge path from A
    std::vector<std::vector<Tuple>> to_add(ell_ - 2), to_remove(ell_ - 2);

    // additions j-1 -> j
    for (std::uint32_t j = 1; j + 2 <= ell_ - 1; ++j) {
        for (const Tuple& t : levels_[j - 1]) {
            if (sigma_.pair_f(t, j) != e_next) continue;
            bool ok = true;
            for (std::uint32_t h = j + 1; h <= ell_ - 2 && ok; ++h)
                if (e_closes(sigma_.pair_f(t, h))) ok = false;
            if (!ok) continue;
            const Vtx vj = t[j];
            auto it = blocked_cache.find(vj);
            if (it == blocked_cache.end())
                it = blocked_cache
                         .emplace(vj, has_exact_len_path_to_set(g_before, vj, j, a_mask))
                         .first;
            if (it->second) continue; // a j-edge path from A blocks the addition
            to_add[j].push_back(t);
        }
    }

    // removals below the top level
    for (std::uint32_t j = 0; j + 3 <= ell_ - 1; ++j) {
        for (const Tuple& t : levels_[j]) {
            for (std::uint32_t h = j + 1; h <= ell_ - 2; ++h) {
                const VertexPair f = sigma_.pair_f(t, h);
                if (f == e_next || e_closes(f)) {
                    to_remove[j].push_back(t);
                    break;
                }
            }
        }
    }

    // top level: case 1 / case 2 with (R2)/(I2)
    {
        const std::uint32_t top = ell_ - 3;
        // ordered closing families are computed lazily, once per step
        std::map<std::pair<int, std::uint32_t>,
                 std::vector<std::pair<Vtx, Vtx>>> fam_cache;
        auto family = [&](int order, std::uint32_t j)
            -> const std::vector<std::pair<Vtx, Vtx>>& {
            auto key = std::make_pair(order, j);
            auto it = fam_cache.find(key);
            if (it == fam_cache.end()) {
                const Vtx x = order == 0 ? e_next.a : e_next.b;
                const Vtx y = order == 0 ? e_next.b : e_next.a;
                it = fam_cache
                         .emplace(key, closing_pairs_config(g_before, sigma_, x, y, j))
                         .first;
            }
            return it->second;
        };

        for (const Tuple& t : levels_[top]) {
            const VertexPair f = sigma_.pair_f(t, ell_ - 2);
            if (f == e_next) { // case 1
                to_remove[top].push_back(t);
                continue;
            }
            const PairState fs = g_before.state(f);
            const bool triggered =
                (fs == PairState::Open) ? e_closes(f)
                                        : pairs_co_cycle(g_before, e_next, f, ell_);
            if (!triggered) continue;
            // case 2: (R2) wants a witnessing small family containing (b,w)
            bool removed = false;
            if (r2_threshold_ >= 1.0) {
                const std::pair<Vtx, Vtx> bw{t[ell_ - 2], t[ell_ - 3]};
                for (int order = 0; order < 2 && !removed; ++order)
                    for (std::uint32_t j = 1; j <= ell_ - 1 && !removed; ++j) {
                        const auto& fam = family(order, j);
                        if (static_cast<double>(fam.size()) > r2_threshold_) continue;
                        if (std::binary_search(fam.begin(), fam.end(), bw))
                            removed = true;
                    }
            }
            if (removed) {
                to_remove[top].push_back(t);
            } else {
                ++up.ignored;
                ++ignored_count_;
            }
        }
    }

    for (std::uint32_t j = 0; j < ell_ - 2; ++j) {
        for (const Tuple& t : to_remove[j]) levels_[j].erase(t);
        up.removed[j] = static_cast<std::int64_t>(to_remove[j].size());
        for (const Tuple& t : to_add[j]) {
            levels_[j].insert(t);
            record_added(t, j);
        }
        up.added[j] = static_cast<std::int64_t>(to_add[j].size());
    }
    return up;
}

std::vector<Tuple> TupleLedger::z_set(const PairStateGraph& g) const {
    std::vector<Tuple> out;
    for (const Tuple& t : levels_[ell_ - 3])
        if (g.state(sigma_.pair_f(t, ell_ - 2)) == PairState::Open)
            out.push_back(t);
    return out;
}

void TupleLedger::verify_consistency(const PairStateGraph& g) const {
    for (std::uint32_t j = 0; j + 2 <= ell_ - 1; ++j) {
        for (const Tuple& t : levels_[j]) {
            for (std::uint32_t h = 1; h <= j; ++h)
                if (g.state(sigma_.pair_f(t, h)) != PairState::Edge)
                    throw std::logic_error("ledger: f_1..f_j must be edges");
            for (std::uint32_t h = j + 1; h <= ell_ - 2; ++h) {
                const PairState s = g.state(sigma_.pair_f(t, h));
                const bool top_last = (j == ell_ - 3u) && (h == ell_ - 2u);
                if (top_last) {
                    if (s == PairState::Edge)
                        throw std::logic_error("ledger: top-level last pair is an edge");
                } else if (s != PairState::Open) {
                    throw std::logic_error("ledger: f_{j+1}..f_{ell-2} must be open");
                }
            }
        }
    }
}

std::string TupleLedger::snapshot_json(std::int64_t step,
                                       const BadEventReport* bad) const {
    nlohmann::json j;
    j["step"] = step;
    std::vector<std::uint64_t> counts;
    for (const auto& lv : levels_) counts.push_back(lv.size());
    j["level_counts"] = counts;
    j["ignored_count"] = ignored_count_;
    j["scale"] = scale_;
    j["ut_violated"] = ut_violated_;
    if (bad) {
        j["bad_events"] = {{"b1_count", bad->b1_count},
                           {"b1_threshold", bad->b1_threshold},
                           {"b1_holds", bad->b1_holds},
                           {"l_sigma_size", bad->L_sigma.size()},
                           {"b2_threshold", bad->b2_threshold},
                           {"b2_holds", bad->b2_holds}};
    }
    return j.dump();
}

LSigmaResult compute_L_sigma(const PairStateGraph& g, const Configuration& sigma,
                             const ProcessParams& params,
                             std::optional<double> threshold) {
    const double thr =
        threshold ? *threshold
                  : 1.0 / params.p * powd(static_cast<double>(params.n),
                                          -30.0 * params.ell * params.eps);
    const std::uint32_t ell = sigma.ell;
    const LayeredNeighborhood ln =
        layered_neighborhood(g, sigma.A, sigma.R, ell - 3, sigma.r);
    const std::vector<std::uint8_t> w_mask = make_mask(g.n(), ln.layers[ell - 3]);
    const std::vector<std::uint8_t> b_mask = make_mask(g.n(), sigma.B);

    // paths from every vertex, by length; heavy worst case is bounded by the
    // desk-scale graphs this runs on
    PathScratch scratch(g.n());
    std::vector<std::vector<std::vector<PathRec>>> paths(g.n() + 1);
    for (Vtx v = 1; v <= g.n(); ++v) {
        paths[v].resize(ell - 1);
        for (std::uint32_t len = 0; len + 1 <= ell - 1; ++len)
            collect_paths(g, v, len, scratch, paths[v][len]);
    }

    LSigmaResult out;
    out.per_j.assign(ell, {});
    std::set<VertexPair> pair_set;
    for (Vtx x = 1; x <= g.n(); ++x) {
        for (Vtx y = 1; y <= g.n(); ++y) {
            if (x == y) continue;
            for (std::uint32_t j = 1; j <= ell - 1; ++j) {
                std::set<std::pair<Vtx, Vtx>> fam;
                for (const PathRec& px : paths[x][j - 1]) {
                    if (!b_mask[px.end()]) continue;
                    for (const PathRec& py : paths[y][ell - j - 1]) {
                        if (!w_mask[py.end()]) continue;
                        bool disjoint = true;
                        for (std::uint8_t i = 0; i <= px.len && disjoint; ++i)
                            for (std::uint8_t l = 0; l <= py.len; ++l)
                                if (px.v[i] == py.v[l]) {
                                    disjoint = false;
                                    break;
                                }
                        if (disjoint) fam.emplace(px.end(), py.end());
                    }
                }
                if (static_cast<double>(fam.size()) >= thr && !fam.empty()) {
                    out.per_j[j].emplace_back(x, y);
                    pair_set.insert(VertexPair(x, y));
                }
            }
        }
    }
    out.pairs.assign(pair_set.begin(), pair_set.end());
    return out;
}

BadEventReport check_bad_events(const PairStateGraph& g, const Configuration& sigma,
                                const ProcessParams& params,
                                std::optional<double> b1_threshold,
                                std::optional<double> b2_threshold,
                                std::optional<double> l_threshold) {
    const std::uint32_t ell = sigma.ell;
    const double np = static_cast<double>(params.n) * params.p;
    BadEventReport rep;
    const double k2 = static_cast<double>(sigma.k_sigma()) *
                      static_cast<double>(sigma.k_sigma());
    rep.b1_threshold =
        b1_threshold ? *b1_threshold
                     : k2 * powd(np, static_cast<double>(ell) - 4.0) *
                           powd(static_cast<double>(params.n), -9.0 * params.eps);
    rep.b2_threshold =
        b2_threshold ? *b2_threshold
                     : 1.0 / params.p * powd(static_cast<double>(params.n),
                                             -1.0 / (2.0 * params.ell));

    // b1: pairs (b,w) in B x N^{(ell-4)}(A,R) joined by an (ell-2)-edge path
    const LayeredNeighborhood ln =
        layered_neighborhood(g, sigma.A, sigma.R, ell - 4, sigma.r);
    const std::vector<std::uint8_t> w_mask = make_mask(g.n(), ln.layers[ell - 4]);
    std::vector<std::uint8_t> hit(g.n() + 1, 0), on_path(g.n() + 1, 0);
    for (const Vtx b : sigma.B) {
        std::fill(hit.begin(), hit.end(), 0);
        auto rec = [&](auto&& self, Vtx at, std::uint32_t rem) -> void {
            for (const Vtx w : g.neighbors(at)) {
                if (on_path[w]) continue;
                if (rem == 1) {
                    if (w_mask[w] && !hit[w]) {
                        hit[w] = 1;
                        ++rep.b1_count;
                    }
                    continue;
                }
                on_path[w] = 1;
                self(self, w, rem - 1);
                on_path[w] = 0;
            }
        };
        on_path[b] = 1;
        rec(rec, b, ell - 2);
        on_path[b] = 0;
    }
    rep.b1_holds = static_cast<double>(rep.b1_count) > rep.b1_threshold;

    const LSigmaResult ls = compute_L_sigma(g, sigma, params, l_threshold);
    rep.L_sigma = ls.pairs;
    rep.b2_holds = static_cast<double>(rep.L_sigma.size()) >= rep.b2_threshold;
    return rep;
}

GoodConfigResult find_good_configuration(const PairStateGraph& g, Vtx v_tilde,
                                         const std::vector<Vtx>& U,
                                         const ProcessParams& params) {
    GoodConfigResult out;
    const std::vector<Vtx> Us = sorted_unique(U);
    if (std::binary_search(Us.begin(), Us.end(), v_tilde))
        throw std::invalid_argument("find_good_configuration: v_tilde in U");
    if (!params.saturated &&
        static_cast<std::int64_t>(Us.size()) != params.u)
        throw std::invalid_argument("find_good_configuration: |U| = u required");
    const std::int64_t k = params.k;
    const std::uint32_t ell = params.ell;

    const IndependentSubset ind = greedy_independent_subset(g, Us);
    out.S = ind.S;
    out.peel_premise_failed = ind.premise_failed;
    const std::vector<std::uint8_t> s_mask = make_mask(g.n(), out.S);

    // order vertices by |Gamma(v) ^ S| descending, ties by label
    std::vector<Vtx> ord(g.n());
    std::vector<std::uint32_t> s_deg(g.n() + 1, 0);
    for (Vtx v = 1; v <= g.n(); ++v) {
        ord[v - 1] = v;
        for (const Vtx w : g.neighbors(v))
            if (s_mask[w]) ++s_deg[v];
    }
    std::stable_sort(ord.begin(), ord.end(), [&](Vtx a, Vtx b) {
        if (s_deg[a] != s_deg[b]) return s_deg[a] > s_deg[b];
        return a < b;
    });

    // greedy indices ell_A, then ell_B, first reaching 2k
    std::vector<std::uint8_t> in_NA(g.n() + 1, 0), in_NB(g.n() + 1, 0);
    out.ell_A = kInfIndex;
    std::size_t idx = 0;
    for (; idx < ord.size(); ++idx) {
        for (const Vtx w : g.neighbors(ord[idx]))
            if (s_mask[w] && !in_NA[w]) {
                in_NA[w] = 1;
                out.N_A.push_back(w);
            }
        if (static_cast<std::int64_t>(out.N_A.size()) >= 2 * k) {
            out.ell_A = idx + 1;
            break;
        }
    }
    out.ell_B = kInfIndex;
    if (out.ell_A != kInfIndex) {
        for (idx = out.ell_A; idx < ord.size(); ++idx) {
            for (const Vtx w : g.neighbors(ord[idx]))
                if (s_mask[w] && !in_NA[w] && !in_NB[w]) {
                    in_NB[w] = 1;
                    out.N_B.push_back(w);
                }
            if (static_cast<std::int64_t>(out.N_B.size()) >= 2 * k) {
                out.ell_B = idx + 1;
                break;
            }
        }
    }
    std::sort(out.N_A.begin(), out.N_A.end());
    std::sort(out.N_B.begin(), out.N_B.end());

    std::vector<Vtx> A, B;
    const double ellB_cut = powd(static_cast<double>(params.n),
                                 2.0 * static_cast<double>(params.theta) * params.eps);
    const bool far_branch =
        out.ell_B == kInfIndex || static_cast<double>(out.ell_B) > ellB_cut;
    auto take_lowest = [](const std::vector<Vtx>& pool,
                          const std::vector<std::uint8_t>& excl, std::int64_t want,
                          std::vector<std::uint8_t>* taken) {
        std::vector<Vtx> out_set;
        for (const Vtx v : pool) {
            if (static_cast<std::int64_t>(out_set.size()) == want) break;
            if (excl[v] || (taken && (*taken)[v])) continue;
            out_set.push_back(v);
            if (taken) (*taken)[v] = 1;
        }
        return out_set;
    };
    if (far_branch) {
        // A, B subseteq S \ (N_A u N_B), arbitrary = lowest labels first
        std::vector<std::uint8_t> excl(g.n() + 1, 0);
        for (const Vtx v : out.N_A) excl[v] = 1;
        for (const Vtx v : out.N_B) excl[v] = 1;
        std::vector<std::uint8_t> taken(g.n() + 1, 0);
        A = take_lowest(out.S, excl, k, &taken);
        B = take_lowest(out.S, excl, k, &taken);
        if (static_cast<std::int64_t>(A.size()) < k ||
            static_cast<std::int64_t>(B.size()) < k)
            throw std::runtime_error(
                "find_good_configuration: S \\ (N_A u N_B) too small for A, B");
    } else {
        for (std::size_t i = 0; i < out.ell_A; ++i) out.I_A.push_back(ord[i]);
        for (std::size_t i = out.ell_A; i < out.ell_B; ++i)
            out.I_B.push_back(ord[i]);
        std::vector<std::uint8_t> excl(g.n() + 1, 0);
        for (const Vtx v : out.I_B) {
            excl[v] = 1;
            for (const Vtx w : g.neighbors(v)) excl[w] = 1;
        }
        A = take_lowest(out.N_A, excl, k, nullptr);
        if (static_cast<std::int64_t>(A.size()) < k)
            throw std::runtime_error(
                "find_good_configuration: N_A \\ (I_B u Gamma(I_B)) too small for A");
        std::vector<std::uint8_t> none(g.n() + 1, 0);
        B = take_lowest(out.N_B, none, k, nullptr);
        if (static_cast<std::int64_t>(B.size()) < k)
            throw std::runtime_error("find_good_configuration: N_B too small for B");
    }

    const P1Report p1 = build_X_P1(g, A, out.I_B, params);
    out.X1 = p1.X;
    const P2Report p2 = build_XF_P2(g, A, B, params);
    out.X2 = p2.X;
    out.F = p2.F;

    std::vector<Vtx> R = Us;
    R.push_back(v_tilde);
    R.insert(R.end(), out.X1.begin(), out.X1.end());
    R.insert(R.end(), out.X2.begin(), out.X2.end());
    out.sigma = build_configuration(v_tilde, Us, A, B, sorted_unique(std::move(R)),
                                    ell, params.r, g.n());
    out.sigma.I_A = out.I_A;
    out.sigma.I_B = out.I_B;
    return out;
}

LayeredMSets layered_M_sets(const PairStateGraph& g, const std::vector<Vtx>& A,
                            const std::vector<Vtx>& R, const ProcessParams& params,
                            std::optional<double> tau_eps_override) {
    const std::uint32_t ell = params.ell;
    const double np = static_cast<double>(params.n) * params.p;
    const double tau_eps = tau_eps_override
                               ? *tau_eps_override
                               : static_cast<double>(params.tau) * params.eps;
    const LayeredNeighborhood ln = layered_neighborhood(g, A, R, ell - 3, params.r);
    const std::vector<Vtx> Nl3 = ln.layers[ell - 3];
    const std::vector<std::uint8_t> n_mask = make_mask(g.n(), Nl3);

    LayeredMSets out;
    out.W_count.assign(ell - 1, std::vector<std::uint64_t>(g.n() + 1, 0));
    out.M.assign(ell - 1, {});
    out.m_threshold.assign(ell - 1, 0);
    out.h_threshold =
        np * powd(static_cast<double>(params.n), -2.0 * tau_eps);

    std::vector<std::uint8_t> hit(g.n() + 1, 0), on_path(g.n() + 1, 0);
    for (std::uint32_t j = 1; j + 1 <= ell - 1; ++j) {
        out.m_threshold[j] = powd(np, static_cast<double>(j)) *
                             powd(static_cast<double>(params.n), -tau_eps);
        for (Vtx v = 1; v <= g.n(); ++v) {
            std::fill(hit.begin(), hit.end(), 0);
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
                    on_path[w] = 1;
                    self(self, w, rem - 1);
                    on_path[w] = 0;
                }
            };
            on_path[v] = 1;
            rec(rec, v, j);
            on_path[v] = 0;
            out.W_count[j][v] = count;
            if (static_cast<double>(count) >= out.m_threshold[j])
                out.M[j].push_back(v);
        }
    }

    // H ladder: H^{(0)} = N^{(ell-3)}(A,R), then degree filtering into it
    out.H.assign(ell - 1, {});
    out.H[0] = Nl3;
    std::vector<std::uint8_t> prev = n_mask;
    for (std::uint32_t j = 1; j + 1 <= ell - 1; ++j) {
        std::vector<std::uint8_t> cur(g.n() + 1, 0);
        for (Vtx v = 1; v <= g.n(); ++v) {
            std::uint64_t d = 0;
            for (const Vtx w : g.neighbors(v))
                if (prev[w]) ++d;
            if (static_cast<double>(d) >= out.h_threshold) {
                out.H[j].push_back(v);
                cur[v] = 1;
            }
        }
        prev.swap(cur);
    }
    return out;
}

IgnoredDiagnostics ignored_diagnostics(const PairStateGraph& g,
                                       const Configuration& sigma,
                                       const TupleLedger& ledger,
                                       const ProcessParams& params) {
    const std::uint32_t ell = sigma.ell;
    const LayeredMSets ms = layered_M_sets(g, sigma.A, sigma.R, params);
    const std::vector<std::uint8_t> m_mask = make_mask(g.n(), ms.M[ell - 2]);
    const std::vector<std::uint8_t> ib_mask = make_mask(g.n(), sigma.I_B);
    const LayeredNeighborhood ln =
        layered_neighborhood(g, sigma.A, sigma.R, ell - 3, sigma.r);
    const std::vector<std::uint8_t> w_mask = make_mask(g.n(), ln.layers[ell - 3]);

    IgnoredDiagnostics out;
    std::set<std::pair<Vtx, Vtx>> qi, qm;
    std::vector<std::uint8_t> on_path(g.n() + 1, 0);
    for (const Vtx b : sigma.B) {
        // paths w_1 = b, w_2 .. w_ell with ell-1 edges
        auto rec = [&](auto&& self, Vtx at, std::uint32_t depth, Vtx w2) -> void {
            for (const Vtx w : g.neighbors(at)) {
                if (on_path[w]) continue;
                const Vtx w2n = (depth == 1) ? w : w2;
                if (depth == ell - 1) {
                    if (w_mask[w]) {
                        if (ib_mask[w2n]) qi.emplace(b, w);
                        if (m_mask[w2n] && !ib_mask[w2n]) qm.emplace(b, w);
                    }
                    continue;
                }
                on_path[w] = 1;
                self(self, w, depth + 1, w2n);
                on_path[w] = 0;
            }
        };
        on_path[b] = 1;
        rec(rec, b, 1, 0);
        on_path[b] = 0;
    }
    out.Q_I = qi.size();
    out.Q_M = qm.size();
    std::set<std::pair<Vtx, Vtx>> all = qi;
    all.insert(qm.begin(), qm.end());
    out.Q_total = all.size();
    const std::uint64_t top = ledger.level(ell - 3).size();
    out.t_minus_z = top - ledger.z_set(g).size();
    out.inequality_holds = out.t_minus_z <= out.Q_total;
    return out;
}

} // namespace clfree
