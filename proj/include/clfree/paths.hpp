// Bounded-length simple path enumeration and everything built on it:
// openness, closing pairs, layered neighborhoods, (j,d)-paths and the basic
// pair statistics. "Path" always means simple path (distinct vertices);
// enumeration is depth-first with a depth cap of ell-1 <= 9.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "clfree/graph.hpp"

namespace clfree {

constexpr std::uint32_t kMaxPathLen = 9; // edges; supports ell <= 10

struct PathRec {
    std::array<Vtx, kMaxPathLen + 1> v{}; // v[0..len]
    std::uint8_t len = 0;

    Vtx end() const { return v[len]; }
};

// Reusable buffers for the hot enumeration loops; one per run/thread.
class PathScratch {
public:
    explicit PathScratch(Vtx n)
        : on_path(n + 1, 0), mark(n + 1, 0), dist(n + 1, 0) {}

    std::vector<std::uint8_t> on_path;
    std::vector<std::uint8_t> mark;
    std::vector<std::uint32_t> dist;
    std::vector<Vtx> queue;
    std::vector<PathRec> paths_a, paths_b;
};

// All simple paths with exactly `len` edges starting at src, appended to out.
void collect_paths(const PairStateGraph& g, Vtx src, std::uint32_t len,
                   PathScratch& scratch, std::vector<PathRec>& out);

// Number of simple x-y paths with exactly `len` edges whose internal
// vertices avoid `forbidden` and which traverse `required_edge` when given.
std::uint64_t count_paths_exact_len(const PairStateGraph& g, Vtx x, Vtx y,
                                    std::uint32_t len,
                                    const std::vector<Vtx>& forbidden = {},
                                    std::optional<VertexPair> required_edge = std::nullopt);

// True iff G + {x,y} contains no copy of C_ell, i.e. no simple (ell-1)-edge
// path joins x and y. Distance-pruned DFS, still exhaustive.
bool is_open_bruteforce(const PairStateGraph& g, Vtx x, Vtx y, std::uint32_t ell);

// C_uv: all Open pairs {x,y} such that adding uv and xy creates a copy of
// C_ell containing both. Enumerates splits a+b = ell-2 of vertex-disjoint
// paths from u and from v; the a=0 / b=0 splits yield pairs incident to u
// or v. Sorted, deduplicated.
std::vector<VertexPair> closing_pairs(const PairStateGraph& g, Vtx u, Vtx v,
                                      std::uint32_t ell);
void closing_pairs_into(const PairStateGraph& g, Vtx u, Vtx v, std::uint32_t ell,
                        PathScratch& scratch, std::vector<VertexPair>& out);

// True iff adding both pairs to g creates a C_ell through both (states are
// ignored; callers filter). Pairs may share a vertex.
bool pairs_co_cycle(const PairStateGraph& g, VertexPair e, VertexPair f,
                    std::uint32_t ell);

// Fresh graph with every non-edge state recomputed via is_open_bruteforce.
// Test oracle and rejection-mode helper.
PairStateGraph recompute_pair_states(const PairStateGraph& g, std::uint32_t ell);

// Label class V_j(X) = {v not in X : (j-1) r < v <= j r}.
bool in_label_class(Vtx v, std::uint32_t j, std::int64_t r,
                    const std::vector<std::uint8_t>& x_mask);

struct LayeredNeighborhood {
    std::vector<Vtx> base, exclusion;
    std::vector<std::vector<Vtx>> layers; // layers[j] = N^{(j)}, each sorted

    std::vector<Vtx> up_to(std::size_t j) const; // N^{(<=j)}, sorted union
};

// N^{(0)} = S, N^{(j+1)} = Gamma(N^{(j)}) intersect V_{j+1}(X).
LayeredNeighborhood layered_neighborhood(const PairStateGraph& g,
                                         const std::vector<Vtx>& S,
                                         const std::vector<Vtx>& X,
                                         std::uint32_t depth, std::int64_t r);

// (j,d)-paths wrt (A,B,X): simple vertex sequences w_0..w_j = v_d..v_0 with
// w_0 in B, v_0 in A, v_{d'} in V_{d'}(X) for 1 <= d' <= d. Counted as
// directed sequences from the B end; edge-disjoint from excluded_edges.
std::uint64_t count_jd_paths(const PairStateGraph& g, const std::vector<Vtx>& A,
                             const std::vector<Vtx>& B, const std::vector<Vtx>& X,
                             std::uint32_t j, std::uint32_t d, std::int64_t r,
                             const std::vector<VertexPair>& excluded_edges = {});

// Distinct edge sets of (j,d)-paths (the family the deletion search runs on).
std::vector<std::vector<VertexPair>> jd_path_edge_sets(
    const PairStateGraph& g, const std::vector<Vtx>& A, const std::vector<Vtx>& B,
    const std::vector<Vtx>& X, std::uint32_t j, std::uint32_t d, std::int64_t r);

struct PairStatistics {
    std::uint64_t e_AB = 0;       // edges with one end in A, one in B
    std::uint64_t codegree_max = 0; // max over distinct pairs |Gamma(x) ^ Gamma(y)|
    std::vector<Vtx> D_Ad;        // {v : |Gamma(v) ^ A| >= d}
};

PairStatistics pair_statistics(const PairStateGraph& g, const std::vector<Vtx>& A,
                               const std::vector<Vtx>& B, std::uint32_t d);

// True iff some simple path with exactly `len` edges ends in `targets`
// starting from src (used by the tuple add rule with targets = A).
bool has_exact_len_path_to_set(const PairStateGraph& g, Vtx src, std::uint32_t len,
                               const std::vector<std::uint8_t>& target_mask);

std::vector<std::uint8_t> make_mask(Vtx n, const std::vector<Vtx>& verts);

} // namespace clfree
