// Constructive checkers for the binomial-random-graph properties: codegree,
// greedy independent subsets, degree and crossing-edge bounds, restricted
// path counts, the greedy deletion search, and the exception-set
// constructions behind the path-endpoint events. Asymptotically-almost-sure
// statements become deterministic checkers; Monte Carlo frequency estimation
// lives in the harness.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clfree/graph.hpp"
#include "clfree/params.hpp"
#include "clfree/paths.hpp"

namespace clfree {

struct CodegreeReport {
    std::uint64_t max_codegree = 0;
    bool holds = false; // max <= 9
};
CodegreeReport check_codegree(const PairStateGraph& g);

struct IndependentSubset {
    std::vector<Vtx> S;
    bool premise_failed = false; // some peel step saw min degree >= 6
};
// Min-induced-degree peel, ties by smallest label. S is always independent;
// |S| >= ceil(|U|/6) whenever the premise never failed.
IndependentSubset greedy_independent_subset(const PairStateGraph& g,
                                            const std::vector<Vtx>& U);

struct DegreeReport {
    std::uint64_t max_degree = 0;
    double bound = 0; // n p n^{2 eps}
    bool holds = false;
};
DegreeReport check_degree_D(const PairStateGraph& g, const ProcessParams& params);

struct EdgesBoundedReport {
    std::uint64_t edge_count = 0;
    double bound = 0; // k n^{4 ell eps}
    bool holds = false;
};
// e(S, N^{(<= ell-3)}(A, S u A)) against the M-event bound.
EdgesBoundedReport check_edges_bounded_M(const PairStateGraph& g,
                                         const std::vector<Vtx>& A,
                                         const std::vector<Vtx>& S,
                                         const ProcessParams& params);

struct Q1Report {
    std::uint64_t witness_count = 0;
    double bound = 0; // (np)^{j-1} n^{9 ell eps}
    bool holds = false;
};
// Vertices w in N^{(<= d)}(A,X) reachable from v by a j-edge path whose
// first j vertices avoid N^{(<= d)}(A,X).
Q1Report check_Q1(const PairStateGraph& g, Vtx v, const std::vector<Vtx>& A,
                  const std::vector<Vtx>& X, std::uint32_t j, std::uint32_t d,
                  const ProcessParams& params);

struct DeletionResult {
    std::vector<std::size_t> I0;   // indices into the family
    std::vector<VertexPair> E0;    // union of their edge sets
    std::uint64_t remaining_count = 0;
    bool success = false;
};
// Greedy max-coverage deletion: repeatedly pick the member meeting the most
// survivors until remaining <= mu_target + k_slack or the budget is spent.
DeletionResult deletion_greedy(const std::vector<std::vector<VertexPair>>& copies,
                               double mu_target, double k_slack,
                               std::int64_t b_budget);

struct FQ2Report {
    std::vector<VertexPair> F;
    // per (j,d): surviving (j,d)-path count after deleting F
    std::vector<std::vector<std::uint64_t>> per_jd_counts;
    bool holds = false;        // every count <= k^2 (np)^{j-3} n^{4 ell eps}
    bool f_budget_ok = false;  // |F| <= k n^{2 eps}
};
FQ2Report build_F_Q2(const PairStateGraph& g, const std::vector<Vtx>& A,
                     const std::vector<Vtx>& B, const ProcessParams& params);

struct P1Report {
    std::vector<Vtx> X;
    std::vector<std::uint64_t> per_v_counts; // aligned with S
    double bound = 0; // (np)^{ell-3} n^{15 ell eps}
    bool holds = false;
};
// X = A u S u V_{S,A}; counts per v in S the w in N^{(ell-3)}(A,X) reachable
// by an (ell-2)-edge path with w_1 not in A.
P1Report build_X_P1(const PairStateGraph& g, const std::vector<Vtx>& A,
                    const std::vector<Vtx>& S, const ProcessParams& params);

struct P2Report {
    std::vector<Vtx> X;
    std::vector<VertexPair> F;
    std::uint64_t pair_count = 0;
    double bound = 0; // k^2 (np)^{ell-5} n^{15 ell eps}
    bool holds = false;
};
// F from the deletion search, X = A u B u V_F u V_{B,F}; counts pairs
// (b,w) in B x N^{(ell-4)}(A,X) joined by an (ell-2)-edge path with
// w_1 not in A and (w_2 not in A or neither of its first two edges in F).
P2Report build_XF_P2(const PairStateGraph& g, const std::vector<Vtx>& A,
                     const std::vector<Vtx>& B, const ProcessParams& params);

struct KLReport {
    bool K_holds = false;
    bool L_holds = false;
    std::uint64_t e_AB = 0;
    double K_bound = 0;
    std::uint64_t D_Ad_size = 0;
    double L_bound = 0;
    std::string witness; // names the violated inequality, empty when both hold
};
KLReport check_KL(const PairStateGraph& g, const ProcessParams& params,
                  const std::vector<Vtx>& A, const std::vector<Vtx>& B,
                  std::uint32_t d);

// JSON verdict {name, holds, value, bound, witnesses?} for the CLI.
std::string verdict_json(const std::string& name, bool holds, double value,
                         double bound, const std::string& witness = "");

} // namespace clfree
