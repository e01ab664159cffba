// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run a single criterion with --only <id>.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "clfree/config_tracker.hpp"
#include "clfree/dem_check.hpp"
#include "clfree/gnp_props.hpp"
#include "clfree/harness.hpp"
#include "clfree/process.hpp"
#include "oracle.hpp"

using namespace clfree;

namespace {

ProcessParams sim_params(Vtx n, std::uint32_t ell, double mu = 0.4) {
    return derive_params(n, ell, Mode::Simulation, mu, 0.1, 1.0);
}

Configuration explicit_sigma(const ProcessParams& P, std::uint32_t k,
                             Vtx label_shift) {
    std::vector<Vtx> U, A, B, R{1};
    for (Vtx v = 0; v < 2 * k; ++v)
        U.push_back(P.n - 2 * k + 1 + v - label_shift);
    for (std::uint32_t i = 0; i < k; ++i) {
        A.push_back(U[2 * i]);     // interleave A and B inside U
        B.push_back(U[2 * i + 1]);
    }
    R.insert(R.end(), U.begin(), U.end());
    return build_configuration(1, U, A, B, R, P.ell, P.r, P.n);
}

// ------------------------------------------------------------------ 1
bool crit_no_forbidden_cycle(std::string& detail) {
    std::uint64_t violations = 0;
    for (const std::uint32_t ell : {4u, 5u, 6u}) {
        for (const Vtx n : {30u, 60u}) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                ProcessRun run(sim_params(n, ell), seed);
                std::vector<StepHook> post{[&](const StepEvent& ev) {
                    for (const VertexPair& e : ev.graph.edge_list())
                        if (count_paths_exact_len(ev.graph, e.a, e.b, ell - 1) != 0)
                            ++violations;
                }};
                run_to(run, static_cast<std::int64_t>(run.graph().pair_count()), {},
                       post);
            }
        }
    }
    detail = "copies found: " + std::to_string(violations);
    return violations == 0;
}

// ------------------------------------------------------------------ 2
bool crit_maximality(std::string& detail) {
    std::uint64_t open_leftovers = 0;
    for (const std::uint32_t ell : {4u, 5u, 6u}) {
        for (const Vtx n : {30u, 60u}) {
            for (std::uint64_t seed = 100; seed < 120; ++seed) {
                ProcessRun run(sim_params(n, ell), seed);
                const RunSummary s =
                    run_to(run, static_cast<std::int64_t>(run.graph().pair_count()));
                if (!s.terminated) ++open_leftovers;
                const PairStateGraph& g = run.graph();
                for (Vtx x = 1; x <= n; ++x)
                    for (Vtx y = x + 1; y <= n; ++y)
                        if (g.state(x, y) != PairState::Edge &&
                            is_open_bruteforce(g, x, y, ell))
                            ++open_leftovers;
            }
        }
    }
    detail = "open non-edges at termination: " + std::to_string(open_leftovers);
    return open_leftovers == 0;
}

// ------------------------------------------------------------------ 3
bool crit_incremental_oracle(std::string& detail) {
    std::uint64_t mismatches = 0;
    for (const std::uint32_t ell : {4u, 5u, 6u}) {
        for (const Vtx n : {30u, 60u}) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                ProcessRun run(sim_params(n, ell), 17 + seed);
                std::vector<StepHook> post{[&](const StepEvent& ev) {
                    const PairStateGraph want = recompute_pair_states(ev.graph, ell);
                    if (ev.graph.states() != want.states()) ++mismatches;
                }};
                run_to(run, static_cast<std::int64_t>(run.graph().pair_count()), {},
                       post);
            }
        }
    }
    detail = "steps with state mismatch: " + std::to_string(mismatches);
    return mismatches == 0;
}

// ------------------------------------------------------------------ 4
bool crit_closing_pairs(std::string& detail) {
    std::uint64_t mismatches = 0;
    for (const std::uint32_t ell : {4u, 5u}) {
        for (const Vtx n : {20u, 40u}) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                ProcessRun run(sim_params(n, ell), 31 + seed);
                std::vector<StepHook> pre{[&](const StepEvent& ev) {
                    const auto want =
                        oracle::closing_set(ev.graph, ev.chosen.a, ev.chosen.b, ell);
                    if (ev.newly_closed != want) ++mismatches;
                }};
                run_to(run, static_cast<std::int64_t>(run.graph().pair_count()), pre,
                       {});
            }
        }
    }
    detail = "steps with closing-set mismatch: " + std::to_string(mismatches);
    return mismatches == 0;
}

// ------------------------------------------------------------------ 5 & 6
OdeIdentityReport ode_worst() {
    OdeIdentityReport worst;
    for (std::uint32_t ell = 4; ell <= 8; ++ell) {
        const OdeIdentityReport rep = verify_ode_identities(ell, 1e-3, 2.0, 1.0);
        worst.max_rel_error_closed =
            std::max(worst.max_rel_error_closed, rep.max_rel_error_closed);
        worst.max_rel_error_fd =
            std::max(worst.max_rel_error_fd, rep.max_rel_error_fd);
        worst.max_rel_error_integral =
            std::max(worst.max_rel_error_integral, rep.max_rel_error_integral);
    }
    return worst;
}

bool crit_ode_identity(std::string& detail) {
    const OdeIdentityReport rep = ode_worst();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "closed %.2e (<=1e-9), fd %.2e (<=1e-6)",
                  rep.max_rel_error_closed, rep.max_rel_error_fd);
    detail = buf;
    return rep.max_rel_error_closed <= 1e-9 && rep.max_rel_error_fd <= 1e-6;
}

bool crit_integral_identity(std::string& detail) {
    const OdeIdentityReport rep = ode_worst();
    char buf[80];
    std::snprintf(buf, sizeof(buf), "quadrature %.2e (<=1e-6)",
                  rep.max_rel_error_integral);
    detail = buf;
    return rep.max_rel_error_integral <= 1e-6;
}

// ------------------------------------------------------------------ 7
bool crit_open_trajectory(std::string& detail) {
    const ProcessParams P = sim_params(3000, 4);
    const std::int64_t i_max =
        static_cast<std::int64_t>(std::floor(3000.0 * 3000.0 * P.p)); // t = 1.0
    const double pairs = 3000.0 * 2999.0 / 2.0;
    std::vector<std::vector<double>> dev(5);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ProcessRun run(P, 1000 + seed);
        auto& d = dev[seed];
        d.reserve(i_max);
        std::vector<StepHook> post{[&](const StepEvent& ev) {
            const std::int64_t i = ev.i_before + 1;
            const double q = eval_q(P.time_of(i), 4);
            d.push_back(std::abs(
                static_cast<double>(ev.graph.open_count()) / (q * pairs) - 1.0));
        }};
        run_to(run, i_max, {}, post);
        // a run that dies before t = 1.0 has |O(i)| = 0 from then on:
        // deviation 1 against the (positive) prediction
        d.resize(i_max, 1.0);
    }
    double worst_median = 0;
    double ok_until_t = 0; // largest t with every median deviation <= 0.10 so far
    bool within = true;
    for (std::int64_t i = 0; i < i_max; ++i) {
        std::vector<double> at{dev[0][i], dev[1][i], dev[2][i], dev[3][i],
                               dev[4][i]};
        const double med = median(at);
        worst_median = std::max(worst_median, med);
        if (within && med <= 0.10)
            ok_until_t = P.time_of(i + 1);
        else
            within = false;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "max median dev %.3f (<=0.10); within band up to t=%.3f of 1.0",
                  worst_median, ok_until_t);
    detail = buf;
    return worst_median <= 0.10;
}

// ------------------------------------------------------------------ 8 & 9
ScalingResult scaling_once() {
    static ScalingResult cached;
    static bool have = false;
    if (!have) {
        ScalingOptions opt;
        opt.ell = 4;
        opt.n_list = {400, 800, 1600, 3200};
        opt.runs = 5;
        opt.master_seed = 7;
        opt.jobs = 1;
        cached = run_scaling(opt);
        have = true;
    }
    return cached;
}

bool crit_edge_exponent(std::string& detail) {
    const ScalingResult res = scaling_once();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "slope %.4f in [1.23, 1.43], r2 %.4f",
                  res.fitted_exponent_edges, res.r_squared_edges);
    detail = buf;
    return res.fitted_exponent_edges >= 1.23 && res.fitted_exponent_edges <= 1.43;
}

bool crit_degree_exponent(std::string& detail) {
    const ScalingResult res = scaling_once();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "slope %.4f in [0.23, 0.43], r2 %.4f",
                  res.fitted_exponent_maxdeg, res.r_squared_maxdeg);
    detail = buf;
    return res.fitted_exponent_maxdeg >= 0.23 && res.fitted_exponent_maxdeg <= 0.43;
}

// ------------------------------------------------------------------ 10
bool crit_extension_property(std::string& detail) {
    std::uint64_t violations = 0, tracked = 0;
    for (const std::uint32_t ell : {4u, 5u}) {
        for (const Vtx n : {60u, 120u}) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                const ProcessParams P = sim_params(n, ell);
                std::vector<TupleLedger> ledgers;
                ledgers.emplace_back(explicit_sigma(P, 2, 0), P);
                ledgers.emplace_back(explicit_sigma(P, 3, 10), P);
                tracked += ledgers.size();
                ProcessRun run(P, 500 + seed);
                std::vector<StepHook> pre{[&](const StepEvent& ev) {
                    for (TupleLedger& lg : ledgers)
                        lg.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
                }};
                run_to(run, static_cast<std::int64_t>(run.graph().pair_count()), pre,
                       {});
                for (TupleLedger& lg : ledgers) {
                    if (lg.ut_violated()) ++violations;
                    lg.verify_consistency(run.graph());
                }
            }
        }
    }
    detail = "violations: " + std::to_string(violations) + " across " +
             std::to_string(tracked) + " ledgers";
    return violations == 0;
}

// ------------------------------------------------------------------ 11
bool crit_ledger_rule_oracle(std::string& detail) {
    std::uint64_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ProcessParams P = sim_params(40, 4);
        const Configuration s = explicit_sigma(P, 2, 0);
        TupleLedger ledger(s, P);
        oracle::RuleReplay replay(s, P);
        ProcessRun run(P, 900 + seed);
        std::vector<StepHook> pre{[&](const StepEvent& ev) {
            ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
            replay.step(ev.graph, ev.chosen);
            for (std::uint32_t j = 0; j + 2 <= P.ell - 1; ++j)
                if (ledger.level(j) != replay.level(j)) ++mismatches;
            if (ledger.ignored_count() != replay.ignored()) ++mismatches;
        }};
        run_to(run, static_cast<std::int64_t>(run.graph().pair_count()), pre, {});
    }
    detail = "per-level mismatches: " + std::to_string(mismatches);
    return mismatches == 0;
}

// ------------------------------------------------------------------ 12
bool crit_coupling(std::string& detail) {
    const ProcessParams P = sim_params(60, 4);
    const std::int64_t i = 50;
    const std::uint64_t trials = 1000;
    std::uint64_t x_ge = 0, subset_bad = 0, y_below = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const CoupledRun cr = run_coupled(P, 4.0, i, 4000 + t);
        if (cr.X_M >= i) {
            ++x_ge;
            if (!cr.subset_holds) ++subset_bad;
        }
        if (cr.Y_M < i) ++y_below;
    }
    const double p0 = std::exp(-static_cast<double>(i) / 4.0);
    const double se = std::sqrt(p0 * (1 - p0) / static_cast<double>(trials));
    const double freq = static_cast<double>(y_below) / trials;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "subset ok on %llu/%llu, freq(Y^M<i) %.2e <= %.2e",
                  static_cast<unsigned long long>(x_ge - subset_bad),
                  static_cast<unsigned long long>(x_ge), freq, p0 + 3 * se);
    detail = buf;
    return subset_bad == 0 && freq <= p0 + 3 * se && x_ge > 0;
}

// ------------------------------------------------------------------ 13
bool crit_greedy_independent(std::string& detail) {
    std::uint64_t dep = 0, undersized = 0;
    CounterRng rng(20260808);
    for (int inst = 0; inst < 10000; ++inst) {
        const Vtx n = 6 + static_cast<Vtx>(rng.next_below(24));
        const double p = rng.next_double() * 0.6;
        PairStateGraph g(n, false);
        for (Vtx x = 1; x <= n; ++x)
            for (Vtx y = x + 1; y <= n; ++y)
                if (rng.next_double() < p) g.add_edge(x, y);
        std::vector<Vtx> U;
        for (Vtx v = 1; v <= n; ++v)
            if (rng.next_double() < 0.8) U.push_back(v);
        if (U.empty()) U.push_back(1);
        const IndependentSubset r = greedy_independent_subset(g, U);
        for (std::size_t a = 0; a < r.S.size(); ++a)
            for (std::size_t b = a + 1; b < r.S.size(); ++b)
                if (g.has_edge(r.S[a], r.S[b])) ++dep;
        if (!r.premise_failed && 6 * r.S.size() < U.size()) ++undersized;
    }
    detail = "dependent pairs: " + std::to_string(dep) +
             ", undersized: " + std::to_string(undersized);
    return dep == 0 && undersized == 0;
}

// ------------------------------------------------------------------ 14
bool crit_cross_oracle(std::string& detail) {
    std::uint64_t mismatches = 0;
    CounterRng rng(997);
    for (int inst = 0; inst < 1000; ++inst) {
        const Vtx n = 6 + static_cast<Vtx>(rng.next_below(9)); // up to 14
        const std::uint32_t ell = 4 + static_cast<std::uint32_t>(rng.next_below(3));
        PairStateGraph g(n, true);
        const double p = 0.15 + 0.35 * rng.next_double();
        // grow a classified C_ell-free graph so closing sets are meaningful
        for (Vtx x = 1; x <= n; ++x)
            for (Vtx y = x + 1; y <= n; ++y) {
                if (g.state(x, y) != PairState::Open) continue;
                if (rng.next_double() < p) {
                    const auto closed = closing_pairs(g, x, y, ell);
                    g.add_edge(x, y);
                    for (const VertexPair& c : closed) g.close_pair(c.a, c.b);
                }
            }

        // path counts against the shared sequence enumerator
        for (int probe = 0; probe < 3; ++probe) {
            const Vtx x = 1 + static_cast<Vtx>(rng.next_below(n));
            Vtx y = 1 + static_cast<Vtx>(rng.next_below(n));
            if (x == y) y = (y % n) + 1;
            const std::uint32_t len =
                1 + static_cast<std::uint32_t>(rng.next_below(ell - 1));
            std::vector<Vtx> forbidden;
            for (Vtx v = 1; v <= n; ++v)
                if (v != x && v != y && rng.next_double() < 0.15)
                    forbidden.push_back(v);
            if (count_paths_exact_len(g, x, y, len, forbidden) !=
                oracle::seq_count_paths(g, x, y, len, forbidden))
                ++mismatches;
        }

        // closing pairs against the sequence-cycle enumeration
        {
            Vtx u = 1 + static_cast<Vtx>(rng.next_below(n));
            Vtx v = 1 + static_cast<Vtx>(rng.next_below(n));
            if (u == v) v = (v % n) + 1;
            if (g.state(u, v) != PairState::Edge) {
                std::set<VertexPair> want;
                // sequences u, v, w_2 .. w_{ell-1}; at most one non-edge slot
                std::vector<Vtx> seq(ell);
                seq[0] = u;
                seq[1] = v;
                std::vector<Vtx> interior(ell - 2, 1);
                for (;;) {
                    for (std::uint32_t q = 0; q + 2 < ell; ++q)
                        seq[q + 2] = interior[q];
                    std::set<Vtx> distinct(seq.begin(), seq.end());
                    if (distinct.size() == ell) {
                        int missing = 0;
                        VertexPair cand(1, 2);
                        bool ok = true;
                        for (std::uint32_t q = 1; q <= ell - 1 && ok; ++q) {
                            const Vtx a = seq[q];
                            const Vtx b = seq[(q + 1) % ell];
                            if (!g.has_edge(a, b)) {
                                if (++missing > 1) ok = false;
                                else cand = VertexPair(a, b);
                            }
                        }
                        if (ok && missing == 1 &&
                            g.state(cand) == PairState::Open)
                            want.insert(cand);
                    }
                    std::size_t pos = 0;
                    for (; pos < interior.size(); ++pos) {
                        if (interior[pos] < n) {
                            ++interior[pos];
                            break;
                        }
                        interior[pos] = 1;
                    }
                    if (pos == interior.size()) break;
                }
                const auto got = closing_pairs(g, u, v, ell);
                if (std::set<VertexPair>(got.begin(), got.end()) != want)
                    ++mismatches;
            }
        }

        // (j,d)-path counts against the enumerator-derived reference
        {
            const std::vector<Vtx> A{1}, B{n}, X{1, n};
            const std::uint32_t j = 1 + static_cast<std::uint32_t>(rng.next_below(3));
            const std::uint32_t d = static_cast<std::uint32_t>(rng.next_below(3));
            const std::int64_t r = 1 + static_cast<std::int64_t>(n / 3);
            if (count_jd_paths(g, A, B, X, j, d, r) !=
                oracle::jd_paths(g, A, B, X, j, d, r))
                ++mismatches;
        }

        // W^{(j)}(v, A) endpoint counts against the enumerator
        {
            const ProcessParams P = sim_params(std::max<Vtx>(n, ell + 1), ell);
            const std::vector<Vtx> A{1}, R{1, 2};
            const LayeredMSets ms = layered_M_sets(g, A, R, P);
            const auto layers = oracle::layered(g, A, R, ell - 3, P.r);
            for (std::uint32_t j = 1; j <= 2; ++j) {
                for (Vtx v = 1; v <= n; ++v) {
                    std::uint64_t want = 0;
                    for (const Vtx w : layers[ell - 3])
                        if (w != v && oracle::seq_count_paths(g, v, w, j) > 0)
                            ++want;
                    if (ms.W_count[j][v] != want) ++mismatches;
                }
            }
        }
    }
    detail = "mismatches: " + std::to_string(mismatches);
    return mismatches == 0;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int a = 1; a + 1 < argc; ++a)
        if (std::strcmp(argv[a], "--only") == 0) only = std::atoi(argv[a + 1]);

    const std::vector<Criterion> criteria{
        {1, "no-forbidden-cycle", crit_no_forbidden_cycle},
        {2, "maximality-at-termination", crit_maximality},
        {3, "incremental-oracle-equivalence", crit_incremental_oracle},
        {4, "closing-pairs-equivalence", crit_closing_pairs},
        {5, "ode-derivative-identity", crit_ode_identity},
        {6, "integral-identity", crit_integral_identity},
        {7, "open-pair-trajectory", crit_open_trajectory},
        {8, "final-size-exponent", crit_edge_exponent},
        {9, "max-degree-exponent", crit_degree_exponent},
        {10, "extension-property", crit_extension_property},
        {11, "ledger-rule-oracle", crit_ledger_rule_oracle},
        {12, "uniform-coupling", crit_coupling},
        {13, "greedy-independent-subset", crit_greedy_independent},
        {14, "cross-oracle-paths", crit_cross_oracle},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::printf("[%s] %02d %-32s (%6.1fs) %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name, secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
