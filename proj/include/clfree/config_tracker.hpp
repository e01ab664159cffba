// Configurations Sigma = (v~, U, A, B, R) and the tuple ledgers T_{Sigma,j}.
//
// A ledger tracks (ell-1)-tuples (v_0..v_{ell-2}) from
// T_Sigma = A x V_1 x ... x V_{ell-3} x B, where V_j = V_j(R) are the label
// classes. Level j holds tuples whose first j pairs are edges and whose
// remaining pairs are open (the last pair may also be closed at the top
// level). Updates follow the add/remove/ignore rules exactly:
//
//  add (j-1 -> j):  f_j = e_{i+1}, none of f_{j+1}..f_{ell-2} is closed by
//                   e_{i+1}, and G(i) has no j-edge path from A to v_j;
//  remove (j < ell-3): e_{i+1} is one of f_{j+1}..f_{ell-2} or closes one;
//  top level:       case 1 removes the tuple whose last pair is e_{i+1};
//                   case 2 (e_{i+1} closes f_{ell-2}) removes it when a
//                   witnessing closing family C_{x,y,Sigma}(i,j) is small
//                   (rule R2), otherwise the tuple is ignored in place (I2).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "clfree/graph.hpp"
#include "clfree/params.hpp"
#include "clfree/paths.hpp"

namespace clfree {

using Tuple = std::array<Vtx, kMaxPathLen>; // slots 0..ell-2 used, rest zero

struct BadEventReport;

struct Configuration {
    Vtx v_tilde = 0;
    std::vector<Vtx> U, A, B, R; // sorted
    std::uint32_t ell = 0;
    std::int64_t r = 0;
    std::vector<std::vector<Vtx>> V; // V[1..ell-3]; V[0] unused
    bool degenerate = false;         // some V_j empty
    std::vector<Vtx> I_A, I_B;       // set by find_good_configuration

    std::int64_t k_sigma() const { return static_cast<std::int64_t>(A.size()); }
    std::uint64_t full_tuple_count() const;
    VertexPair pair_f(const Tuple& t, std::uint32_t h) const {
        return VertexPair(t[h - 1], t[h]); // f_h = v_{h-1} v_h
    }
};

// Validates v~ not in U, A,B disjoint equal-size subsets of U,
// {v~} u U subseteq R, and derives the classes V_j(R) within [n].
Configuration build_configuration(Vtx v_tilde, std::vector<Vtx> U,
                                  std::vector<Vtx> A, std::vector<Vtx> B,
                                  std::vector<Vtx> R, std::uint32_t ell,
                                  std::int64_t r, Vtx n);

// Subsampled variant: A, B and each V_j independently truncated to caps by a
// seeded draw; reported counts are rescaled by the sampling fractions.
struct SampledConfiguration {
    Configuration sigma;
    double scale = 1.0; // product of inverse sampling fractions
};
SampledConfiguration subsample_configuration(const Configuration& sigma,
                                             std::uint64_t class_cap,
                                             std::uint64_t seed);

// C_{x,y,Sigma}(i,j): ordered closing family. All pairs (b,w) in
// B x N^{(ell-3)}(A,R) with vertex-disjoint paths b -> x on j-1 edges and
// y -> w on ell-j-1 edges. Ordered: (x,y) and (y,x) may differ.
std::vector<std::pair<Vtx, Vtx>> closing_pairs_config(const PairStateGraph& g,
                                                      const Configuration& sigma,
                                                      Vtx x, Vtx y, std::uint32_t j);

struct LedgerUpdate {
    std::vector<std::int64_t> added;   // per level
    std::vector<std::int64_t> removed; // per level
    std::int64_t ignored = 0;          // (I2) events this step
};

class TupleLedger {
public:
    TupleLedger(const Configuration& sigma, const ProcessParams& params);

    const Configuration& sigma() const { return sigma_; }
    std::uint32_t levels() const { return ell_ - 2; } // indices 0..ell-3
    const std::set<Tuple>& level(std::uint32_t j) const { return levels_.at(j); }
    std::int64_t ignored_count() const { return ignored_count_; }
    bool ut_violated() const { return ut_violated_; }
    double scale() const { return scale_; }
    void set_scale(double s) { scale_ = s; }

    // Override for the (R2) threshold p^{-1} n^{-30 ell eps}; the derived
    // value is near-degenerate in SimulationMode, so experiments may pin it.
    void set_r2_threshold(double thr) { r2_threshold_ = thr; }
    double r2_threshold() const { return r2_threshold_; }

    // Applies one step of the rules. g_before is G(i) (e_next still open in
    // it); newly_closed, when given, must equal closing_pairs(g_before, e)
    // and saves recomputing it.
    LedgerUpdate tuple_step_update(const PairStateGraph& g_before, VertexPair e_next,
                                   const std::vector<VertexPair>* newly_closed = nullptr);

    // Z_{Sigma,ell-3}(i): top-level tuples whose last pair is open in g.
    std::vector<Tuple> z_set(const PairStateGraph& g) const;

    // Checks every level's edge/open pattern against the live graph
    // (first j pairs edges, later pairs open, top-level last pair not an
    // edge); throws on violation.
    void verify_consistency(const PairStateGraph& g) const;

    // {step, level_counts, ignored_count, bad_events?}; bad events are
    // embedded when a report is supplied.
    std::string snapshot_json(std::int64_t step,
                              const struct BadEventReport* bad = nullptr) const;

private:
    Configuration sigma_;
    std::uint32_t ell_;
    double r2_threshold_;
    std::vector<std::set<Tuple>> levels_;
    // U_T structure: per level j >= 1, suffix (v_j..v_{ell-2}) -> prefix.
    std::vector<std::map<Tuple, Tuple>> ever_suffix_;
    std::int64_t ignored_count_ = 0;
    bool ut_violated_ = false;
    double scale_ = 1.0;

    Tuple suffix_key(const Tuple& t, std::uint32_t j) const;
    Tuple prefix_key(const Tuple& t, std::uint32_t j) const;
    void record_added(const Tuple& t, std::uint32_t j);
};

// L_Sigma(i): unordered pairs xy whose max ordered closing-family size meets
// the threshold; also the per-j ordered decomposition L_Sigma(i,j).
struct LSigmaResult {
    std::vector<VertexPair> pairs;
    std::vector<std::vector<std::pair<Vtx, Vtx>>> per_j; // index j in [1, ell-1]
};
LSigmaResult compute_L_sigma(const PairStateGraph& g, const Configuration& sigma,
                             const ProcessParams& params,
                             std::optional<double> threshold = std::nullopt);

struct BadEventReport {
    std::uint64_t b1_count = 0;
    double b1_threshold = 0;
    std::vector<VertexPair> L_sigma;
    double b2_threshold = 0;
    bool b1_holds = false;
    bool b2_holds = false;
};
BadEventReport check_bad_events(const PairStateGraph& g, const Configuration& sigma,
                                const ProcessParams& params,
                                std::optional<double> b1_threshold = std::nullopt,
                                std::optional<double> b2_threshold = std::nullopt,
                                std::optional<double> l_threshold = std::nullopt);

// Greedy independent subset, vertex ordering by |Gamma(v) ^ S|, the greedy
// index scan for N_A/N_B, the branch on ell_B, and the P1/P2 exception sets;
// returns every intermediate for test visibility.
struct GoodConfigResult {
    Configuration sigma;
    std::vector<Vtx> S;
    std::vector<Vtx> N_A, N_B;
    std::vector<Vtx> I_A, I_B;
    std::uint64_t ell_A = 0, ell_B = 0; // kInfIndex when unreachable
    std::vector<Vtx> X1, X2;
    std::vector<VertexPair> F;
    bool peel_premise_failed = false;
};
constexpr std::uint64_t kInfIndex = ~0ull;

GoodConfigResult find_good_configuration(const PairStateGraph& g, Vtx v_tilde,
                                         const std::vector<Vtx>& U,
                                         const ProcessParams& params);

// W^{(j)}(v,A), M^{(j)}(A) and the majorizing H^{(j)}(A) ladder.
struct LayeredMSets {
    std::vector<std::vector<std::uint64_t>> W_count; // [j][v], j in [1, ell-2]
    std::vector<std::vector<Vtx>> M;                 // [j]
    std::vector<std::vector<Vtx>> H;                 // [j], j in [0, ell-2]
    std::vector<double> m_threshold;                 // per j
    double h_threshold = 0;
};
LayeredMSets layered_M_sets(const PairStateGraph& g, const std::vector<Vtx>& A,
                            const std::vector<Vtx>& R, const ProcessParams& params,
                            std::optional<double> tau_eps_override = std::nullopt);

// Q_{Sigma*} diagnostics: pairs (w_1, w_ell) in B x N^{(ell-3)}(A,R) joined
// by an (ell-1)-edge path with w_2 in I_B (Q_I) or M^{(ell-2)}(A) \ I_B
// (Q_M); checks |T \ Z| <= |Q| on the supplied ledger.
struct IgnoredDiagnostics {
    std::uint64_t Q_total = 0;
    std::uint64_t Q_I = 0;
    std::uint64_t Q_M = 0;
    std::uint64_t t_minus_z = 0;
    bool inequality_holds = false;
};
IgnoredDiagnostics ignored_diagnostics(const PairStateGraph& g,
                                       const Configuration& sigma,
                                       const TupleLedger& ledger,
                                       const ProcessParams& params);

} // namespace clfree
