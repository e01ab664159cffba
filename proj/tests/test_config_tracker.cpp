#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "clfree/config_tracker.hpp"
#include "clfree/gnp_props.hpp"
#include "clfree/process.hpp"
#include "oracle.hpp"

using namespace clfree;

namespace {

ProcessParams sim_params(Vtx n, std::uint32_t ell, double mu = 0.4) {
    return derive_params(n, ell, Mode::Simulation, mu, 0.1, 1.0);
}

// explicit configuration: v~ = 1, U = the top 2k labels, A/B split of U,
// R = {v~} u U, classes from the params' r
Configuration tiny_sigma(const ProcessParams& P, std::uint32_t k) {
    std::vector<Vtx> U, A, B, R{1};
    for (Vtx v = 0; v < 2 * k; ++v) U.push_back(P.n - 2 * k + 1 + v);
    for (std::uint32_t i = 0; i < k; ++i) {
        A.push_back(U[i]);
        B.push_back(U[k + i]);
    }
    R.insert(R.end(), U.begin(), U.end());
    return build_configuration(1, U, A, B, R, P.ell, P.r, P.n);
}

} // namespace

TEST_SUITE_BEGIN("config_tracker");

TEST_CASE("configuration validation") {
    const ProcessParams P = sim_params(30, 4);
    CHECK_THROWS_AS(build_configuration(5, {5, 6}, {5}, {6}, {5, 6, 1}, 4, P.r, 30),
                    std::invalid_argument); // v~ in U
    CHECK_THROWS_AS(build_configuration(1, {5, 6}, {5}, {5}, {1, 5, 6}, 4, P.r, 30),
                    std::invalid_argument); // A, B not disjoint
    CHECK_THROWS_AS(build_configuration(1, {5, 6}, {5}, {6}, {5, 6}, 4, P.r, 30),
                    std::invalid_argument); // v~ missing from R
    CHECK_THROWS_AS(build_configuration(1, {5, 6}, {5}, {7}, {1, 5, 6, 7}, 4, P.r, 30),
                    std::invalid_argument); // B must lie in U
    const Configuration s = build_configuration(
        1, {25, 26, 27, 28}, {25}, {27}, {1, 25, 26, 27, 28}, 4, P.r, 30);
    CHECK(s.V[1].size() == 30 - 5); // V_1 = [1..r] minus R
    CHECK_FALSE(s.degenerate);
}

TEST_CASE("initial ledger holds the full product at level zero") {
    const ProcessParams P = sim_params(30, 5);
    const Configuration s = tiny_sigma(P, 2);
    TupleLedger ledger(s, P);
    std::uint64_t want = s.A.size() * s.B.size();
    for (std::uint32_t j = 1; j + 3 <= P.ell; ++j) want *= s.V[j].size();
    CHECK(ledger.level(0).size() == want);
    CHECK(ledger.level(0).size() == s.full_tuple_count());
    for (std::uint32_t j = 1; j + 2 <= P.ell - 1; ++j) CHECK(ledger.level(j).empty());
    CHECK(ledger.ignored_count() == 0);
}

TEST_CASE("closing families") {
    const ProcessParams P = sim_params(24, 5);
    const Configuration s = tiny_sigma(P, 2);
    SUBCASE("empty graph has empty families") {
        PairStateGraph g(24, false);
        for (std::uint32_t j = 1; j <= P.ell - 1; ++j)
            CHECK(closing_pairs_config(g, s, 2, 3, j).empty());
    }
    SUBCASE("small instances match the exhaustive oracle") {
        const PairStateGraph g = sample_binomial_graph(24, 0.18, 5);
        for (std::uint32_t j = 1; j <= P.ell - 1; ++j) {
            const auto got = closing_pairs_config(g, s, 2, 3, j);
            const auto want = oracle::closing_family(g, s, 2, 3, j);
            CHECK(std::set<std::pair<Vtx, Vtx>>(got.begin(), got.end()) == want);
        }
    }
    SUBCASE("monotone along a process run") {
        ProcessRun run(sim_params(24, 5), 3);
        std::vector<std::set<std::pair<Vtx, Vtx>>> before(P.ell);
        for (int step = 0; step < 30; ++step) {
            if (run.graph().open_count() == 0) break;
            for (std::uint32_t j = 1; j <= P.ell - 1; ++j) {
                const auto fam = closing_pairs_config(run.graph(), s, 2, 3, j);
                const std::set<std::pair<Vtx, Vtx>> now(fam.begin(), fam.end());
                for (const auto& bw : before[j]) REQUIRE(now.count(bw));
                before[j] = now;
            }
            run.step();
        }
    }
    SUBCASE("domain errors") {
        PairStateGraph g(24, false);
        CHECK_THROWS_AS(closing_pairs_config(g, s, 2, 3, 0), std::domain_error);
        CHECK_THROWS_AS(closing_pairs_config(g, s, 2, 3, P.ell), std::domain_error);
        CHECK_THROWS_AS(closing_pairs_config(g, s, 2, 2, 1), std::invalid_argument);
    }
}

TEST_CASE("ledger replay equals the from-the-definitions oracle") {
    struct Case {
        Vtx n;
        std::uint32_t ell;
        std::uint32_t k;
        std::uint64_t seed;
    };
    for (const Case c : {Case{20, 4, 2, 1}, Case{16, 5, 2, 2}}) {
        const ProcessParams P = sim_params(c.n, c.ell);
        const Configuration s = tiny_sigma(P, c.k);
        TupleLedger ledger(s, P);
        oracle::RuleReplay replay(s, P);
        CHECK(ledger.level(0) == replay.level(0));

        ProcessRun run(P, c.seed);
        std::vector<StepHook> pre{[&](const StepEvent& ev) {
            ledger.verify_consistency(ev.graph);
            ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
            replay.step(ev.graph, ev.chosen);
        }};
        std::vector<StepHook> post{[&](const StepEvent& ev) {
            for (std::uint32_t j = 0; j + 2 <= c.ell - 1; ++j)
                REQUIRE(ledger.level(j) == replay.level(j));
            REQUIRE(ledger.ignored_count() == replay.ignored());
            REQUIRE_FALSE(ledger.ut_violated());
            ledger.verify_consistency(ev.graph);
        }};
        run_to(run, 45, pre, post);
    }
}

TEST_CASE("top-level one-step removals respect the rule bound") {
    const ProcessParams P = sim_params(20, 4);
    const Configuration s = tiny_sigma(P, 2);
    TupleLedger ledger(s, P);
    const double bound = 1.0 + 2.0 * P.ell * ledger.r2_threshold();
    ProcessRun run(P, 4);
    std::vector<StepHook> pre{[&](const StepEvent& ev) {
        const LedgerUpdate up =
            ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
        REQUIRE(static_cast<double>(up.removed[P.ell - 3]) <= bound);
    }};
    run_to(run, 60, pre, {});
}

TEST_CASE("R2 override removes every triggered tuple") {
    const ProcessParams P = sim_params(20, 4);
    const Configuration s = tiny_sigma(P, 2);
    TupleLedger ledger(s, P);
    ledger.set_r2_threshold(1e18); // every witnessing family is small enough
    ProcessRun run(P, 4);
    std::vector<StepHook> pre{[&](const StepEvent& ev) {
        ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
    }};
    run_to(run, 60, pre, {});
    CHECK(ledger.ignored_count() == 0);
    // with nothing ignored, Z equals the whole top level
    CHECK(ledger.z_set(run.graph()).size() == ledger.level(P.ell - 3).size());
    CHECK_FALSE(ledger.ut_violated());
}

TEST_CASE("z_set filters by live openness") {
    const ProcessParams P = sim_params(20, 4);
    const Configuration s = tiny_sigma(P, 2);
    TupleLedger ledger(s, P);
    ProcessRun run(P, 8);
    std::vector<StepHook> pre{[&](const StepEvent& ev) {
        ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
    }};
    run_to(run, 50, pre, {});
    const auto z = ledger.z_set(run.graph());
    std::uint64_t open_last = 0;
    for (const Tuple& t : ledger.level(P.ell - 3)) {
        const VertexPair f = s.pair_f(t, P.ell - 2);
        if (run.graph().state(f) != PairState::Edge &&
            is_open_bruteforce(run.graph(), f.a, f.b, P.ell))
            ++open_last;
    }
    CHECK(z.size() == open_last);
    CHECK(z.size() <= ledger.level(P.ell - 3).size());
}

TEST_CASE("L_Sigma") {
    const ProcessParams P = sim_params(18, 4);
    const Configuration s = tiny_sigma(P, 2);
    SUBCASE("empty graph") {
        PairStateGraph g(18, false);
        CHECK(compute_L_sigma(g, s, P).pairs.empty());
    }
    SUBCASE("impossible threshold empties the set") {
        const PairStateGraph g = sample_binomial_graph(18, 0.25, 9);
        const LSigmaResult ls = compute_L_sigma(g, s, P, 1e12);
        CHECK(ls.pairs.empty());
    }
    SUBCASE("matches direct per-pair evaluation") {
        const PairStateGraph g = sample_binomial_graph(18, 0.22, 10);
        const double thr = 2.0; // exercise a nontrivial cutoff
        const LSigmaResult ls = compute_L_sigma(g, s, P, thr);
        std::set<VertexPair> want;
        std::vector<std::set<std::pair<Vtx, Vtx>>> want_j(P.ell);
        for (Vtx x = 1; x <= 18; ++x)
            for (Vtx y = 1; y <= 18; ++y) {
                if (x == y) continue;
                for (std::uint32_t j = 1; j <= P.ell - 1; ++j)
                    if (static_cast<double>(
                            closing_pairs_config(g, s, x, y, j).size()) >= thr) {
                        want.insert(VertexPair(x, y));
                        want_j[j].emplace(x, y);
                    }
            }
        CHECK(std::set<VertexPair>(ls.pairs.begin(), ls.pairs.end()) == want);
        for (std::uint32_t j = 1; j <= P.ell - 1; ++j)
            CHECK(std::set<std::pair<Vtx, Vtx>>(ls.per_j[j].begin(),
                                                ls.per_j[j].end()) == want_j[j]);
    }
}

TEST_CASE("bad events") {
    const ProcessParams P = sim_params(20, 4);
    const Configuration s = tiny_sigma(P, 2);
    SUBCASE("empty graph raises neither event") {
        PairStateGraph g(20, false);
        const BadEventReport rep = check_bad_events(g, s, P);
        CHECK_FALSE(rep.b1_holds);
        CHECK_FALSE(rep.b2_holds);
        CHECK(rep.b1_count == 0);
    }
    SUBCASE("b1 counts match brute-force enumeration and stay monotone") {
        ProcessRun run(P, 12);
        std::uint64_t prev = 0;
        bool held = false;
        for (int step = 0; step < 40; ++step) {
            if (run.graph().open_count() == 0) break;
            run.step();
            const BadEventReport rep =
                check_bad_events(run.graph(), s, P, 3.0, 1e18);
            // brute force: pairs (b,w) in B x N^{(ell-4)}(A,R) with an
            // (ell-2)-edge path
            const auto layers =
                oracle::layered(run.graph(), s.A, s.R, P.ell - 4, s.r);
            std::uint64_t want = 0;
            for (const Vtx b : s.B)
                for (const Vtx w : layers[P.ell - 4])
                    if (b != w &&
                        oracle::dfs_count_paths(run.graph(), b, w, P.ell - 2) > 0)
                        ++want;
            REQUIRE(rep.b1_count == want);
            REQUIRE(rep.b1_count >= prev);
            if (held) REQUIRE(rep.b1_holds); // once held, holds forever
            held = rep.b1_holds;
            prev = rep.b1_count;
        }
    }
}

TEST_CASE("find_good_configuration on the empty graph") {
    const ProcessParams P = sim_params(200, 4, 2.0); // u = 25, k = 1
    REQUIRE(P.u >= 4);
    std::vector<Vtx> U;
    for (Vtx v = 2; v < 2 + static_cast<Vtx>(P.u); ++v) U.push_back(v);
    PairStateGraph g(200, false);
    const GoodConfigResult res = find_good_configuration(g, 1, U, P);
    CHECK(res.S == U); // everything independent
    CHECK(res.ell_A == kInfIndex);
    CHECK(res.ell_B == kInfIndex);
    CHECK(res.I_A.empty());
    CHECK(res.I_B.empty());
    CHECK(res.sigma.A.size() == static_cast<std::size_t>(P.k));
    CHECK(res.sigma.B.size() == static_cast<std::size_t>(P.k));
    CHECK(res.sigma.A[0] == U[0]); // lowest labels first
    CHECK_FALSE(res.peel_premise_failed);
}

TEST_CASE("find_good_configuration on simulated graphs") {
    const ProcessParams P = sim_params(120, 4, 3.0);
    REQUIRE(P.u >= 4);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        ProcessRun run(P, 40 + seed);
        run_to(run, 150);
        std::vector<Vtx> U;
        for (Vtx v = 2; static_cast<std::int64_t>(U.size()) < P.u; ++v)
            U.push_back(v);
        const GoodConfigResult res = find_good_configuration(run.graph(), 1, U, P);
        const PairStateGraph& g = run.graph();
        // Gamma(I_A) disjoint from B, Gamma(I_B) disjoint from A
        for (const Vtx v : res.I_A)
            for (const Vtx w : g.neighbors(v))
                CHECK(std::count(res.sigma.B.begin(), res.sigma.B.end(), w) == 0);
        for (const Vtx v : res.I_B)
            for (const Vtx w : g.neighbors(v))
                CHECK(std::count(res.sigma.A.begin(), res.sigma.A.end(), w) == 0);
        // size audit
        const double n = P.n;
        CHECK(static_cast<double>(res.X1.size()) <=
              P.k * std::pow(n, 5.0 * P.ell * P.eps));
        CHECK(static_cast<double>(res.X2.size()) <=
              P.k * std::pow(n, 5.0 * P.ell * P.eps));
        CHECK(static_cast<double>(res.F.size()) <= P.k * std::pow(n, 2.0 * P.eps));
        CHECK(static_cast<double>(res.sigma.R.size()) <=
              P.k * std::pow(n, 10.0 * P.ell * P.eps));
        // S is independent
        for (std::size_t i = 0; i < res.S.size(); ++i)
            for (std::size_t j = i + 1; j < res.S.size(); ++j)
                CHECK_FALSE(g.has_edge(res.S[i], res.S[j]));
    }
}

TEST_CASE("layered M sets") {
    const ProcessParams P = sim_params(20, 5);
    const Configuration s = tiny_sigma(P, 2);
    SUBCASE("empty graph") {
        PairStateGraph g(20, false);
        const LayeredMSets ms = layered_M_sets(g, s.A, s.R, P);
        for (std::uint32_t j = 1; j + 1 <= P.ell - 1; ++j) {
            CHECK(ms.M[j].empty());
            for (Vtx v = 1; v <= 20; ++v) CHECK(ms.W_count[j][v] == 0);
        }
        for (std::uint32_t j = 1; j + 1 <= P.ell - 1; ++j) CHECK(ms.H[j].empty());
    }
    SUBCASE("W counts match brute force; M inside H when the premise holds") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const PairStateGraph g = sample_binomial_graph(20, 0.2, 60 + seed);
            const LayeredMSets ms = layered_M_sets(g, s.A, s.R, P);
            const auto layers = oracle::layered(g, s.A, s.R, P.ell - 3, s.r);
            const std::vector<Vtx>& Nl3 = layers[P.ell - 3];
            for (std::uint32_t j = 1; j + 1 <= P.ell - 1; ++j) {
                for (Vtx v = 1; v <= 20; ++v) {
                    std::uint64_t want = 0;
                    for (const Vtx w : Nl3)
                        if (w != v && oracle::dfs_count_paths(g, v, w, j) > 0)
                            ++want;
                    REQUIRE(ms.W_count[j][v] == want);
                }
            }
            const double deg_premise =
                static_cast<double>(P.n) * P.p * std::pow((double)P.n, P.eps);
            if (static_cast<double>(g.max_degree()) <= deg_premise) {
                for (std::uint32_t j = 1; j + 1 <= P.ell - 1; ++j) {
                    const std::set<Vtx> h(ms.H[j].begin(), ms.H[j].end());
                    for (const Vtx v : ms.M[j]) CHECK(h.count(v));
                }
            }
        }
    }
}

TEST_CASE("ignored diagnostics") {
    const ProcessParams P = sim_params(20, 4);
    const Configuration s = tiny_sigma(P, 2);
    SUBCASE("fresh ledger on the empty graph") {
        PairStateGraph g(20, true);
        TupleLedger ledger(s, P);
        const IgnoredDiagnostics d = ignored_diagnostics(g, s, ledger, P);
        CHECK(d.Q_total == 0);
        CHECK(d.t_minus_z == 0);
        CHECK(d.inequality_holds);
    }
    SUBCASE("replay keeps |T \\ Z| <= |Q| with default thresholds") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            TupleLedger ledger(s, P);
            ProcessRun run(P, 80 + seed);
            std::vector<StepHook> pre{[&](const StepEvent& ev) {
                ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
            }};
            run_to(run, 70, pre, {});
            const IgnoredDiagnostics d =
                ignored_diagnostics(run.graph(), s, ledger, P);
            CHECK(d.t_minus_z ==
                  ledger.level(P.ell - 3).size() - ledger.z_set(run.graph()).size());
            CHECK(d.inequality_holds);
        }
    }
}

TEST_CASE("sampled configurations") {
    const ProcessParams P = sim_params(40, 5);
    const Configuration s = tiny_sigma(P, 3);
    const SampledConfiguration a = subsample_configuration(s, 4, 77);
    const SampledConfiguration b = subsample_configuration(s, 4, 77);
    CHECK(a.sigma.V[1] == b.sigma.V[1]); // deterministic in the seed
    CHECK(a.scale == b.scale);
    double want_scale = 1.0;
    for (std::uint32_t j = 1; j + 3 <= P.ell; ++j) {
        CHECK(a.sigma.V[j].size() <= 4);
        if (s.V[j].size() > 4)
            want_scale *= static_cast<double>(s.V[j].size()) / 4.0;
    }
    CHECK(a.scale == doctest::Approx(want_scale));
    TupleLedger ledger(a.sigma, P); // sampled ledger is materializable
    CHECK(ledger.level(0).size() == a.sigma.full_tuple_count());
}

TEST_CASE("ledger replay is deterministic in seed and configuration") {
    const ProcessParams P = sim_params(24, 4);
    const Configuration s = tiny_sigma(P, 2);
    auto replay_once = [&]() {
        TupleLedger lg(s, P);
        ProcessRun run(P, 123);
        std::vector<StepHook> pre{[&](const StepEvent& ev) {
            lg.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
        }};
        run_to(run, 40, pre, {});
        return std::make_pair(lg.snapshot_json(40), lg.level(P.ell - 3));
    };
    const auto a = replay_once();
    const auto b = replay_once();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("ledger snapshots embed bad events when supplied") {
    const ProcessParams P = sim_params(16, 4);
    const Configuration s = tiny_sigma(P, 1);
    TupleLedger ledger(s, P);
    PairStateGraph g(16, true);
    const BadEventReport bad = check_bad_events(g, s, P);
    const std::string j = ledger.snapshot_json(0, &bad);
    CHECK(j.find("\"bad_events\"") != std::string::npos);
    CHECK(j.find("\"level_counts\"") != std::string::npos);
    CHECK(ledger.snapshot_json(0).find("bad_events") == std::string::npos);
}

TEST_CASE("ledger consistency errors surface") {
    const ProcessParams P = sim_params(12, 4);
    const Configuration s = tiny_sigma(P, 1);
    TupleLedger ledger(s, P);
    PairStateGraph g(12, true);
    // an edge inside a level-0 tuple pair breaks the all-open pattern
    const Tuple t0 = *ledger.level(0).begin();
    g.add_edge(t0[0], t0[1]);
    CHECK_THROWS_AS(ledger.verify_consistency(g), std::logic_error);
}

TEST_SUITE_END();
