// Evolving graph with a state for every unordered vertex pair.
//
// Vertices are labeled 1..n and the labels are load-bearing: the class
// V_j(X) = {v not in X : (j-1)r < v <= jr} used by the configuration
// machinery depends on the labels exactly as defined. Pair states live in a
// flat triangular array indexed by pair rank; the Open set is additionally
// kept in a swap-remove array with a position map for O(1) uniform draws.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clfree {

using Vtx = std::uint32_t;

enum class PairState : std::uint8_t { Open = 0, Edge = 1, Closed = 2, Unclassified = 3 };

struct VertexPair {
    Vtx a = 0, b = 0; // normalized a < b

    VertexPair() = default;
    VertexPair(Vtx x, Vtx y) : a(x < y ? x : y), b(x < y ? y : x) {
        if (x == y) throw std::invalid_argument("VertexPair: x != y required");
    }
    friend bool operator==(const VertexPair&, const VertexPair&) = default;
    friend auto operator<=>(const VertexPair&, const VertexPair&) = default;
};

class PairStateGraph {
public:
    // All pairs Open (with_open_index) or Unclassified.
    explicit PairStateGraph(Vtx n, bool with_open_index = true);

    Vtx n() const { return n_; }
    std::uint64_t pair_count() const {
        return static_cast<std::uint64_t>(n_) * (n_ - 1) / 2;
    }
    std::uint32_t step() const { return static_cast<std::uint32_t>(edges_.size()); }

    std::uint64_t rank(Vtx x, Vtx y) const {
        if (x == y || x < 1 || y < 1 || x > n_ || y > n_)
            throw std::out_of_range("PairStateGraph::rank: bad pair");
        if (x > y) std::swap(x, y);
        const std::uint64_t xm1 = x - 1;
        return xm1 * n_ - xm1 * (xm1 + 1) / 2 + (y - x - 1);
    }
    VertexPair unrank(std::uint64_t r) const;

    PairState state(Vtx x, Vtx y) const { return state_[rank(x, y)]; }
    PairState state(VertexPair p) const { return state(p.a, p.b); }
    bool has_edge(Vtx x, Vtx y) const { return state(x, y) == PairState::Edge; }

    const std::vector<Vtx>& neighbors(Vtx v) const { return adj_[v]; }
    std::size_t degree(Vtx v) const { return adj_[v].size(); }
    std::size_t max_degree() const;

    const std::vector<VertexPair>& edge_list() const { return edges_; }

    // Open -> Edge (or Unclassified -> Edge on unclassified graphs).
    void add_edge(Vtx x, Vtx y);
    // Open -> Closed. No-op rejected: the pair must currently be Open.
    void close_pair(Vtx x, Vtx y);
    void set_state(Vtx x, Vtx y, PairState s); // classification helper

    bool has_open_index() const { return has_open_index_; }
    std::size_t open_count() const;
    VertexPair open_at(std::size_t idx) const; // index into the swap-remove array

    // Full state vector, by rank (test/oracle access).
    const std::vector<PairState>& states() const { return state_; }

private:
    Vtx n_ = 0;
    bool has_open_index_ = false;
    std::vector<std::vector<Vtx>> adj_;   // 1-based, sorted
    std::vector<PairState> state_;        // by pair rank
    std::vector<VertexPair> edges_;       // insertion order
    std::vector<std::uint32_t> open_ranks_;
    std::vector<std::int32_t> open_pos_;  // rank -> index in open_ranks_, -1 if absent

    void open_index_remove(std::uint64_t rk);
};

// Sorted edge-list text format: header "n m ell", then one "x y" line per
// edge, 1-based labels, lexicographically sorted.
void save_edge_list(const PairStateGraph& g, std::uint32_t ell, std::ostream& out);
void save_edge_list_file(const PairStateGraph& g, std::uint32_t ell,
                         const std::string& path);
// Returns the graph (unclassified pair states) and ell from the header.
std::pair<PairStateGraph, std::uint32_t> load_edge_list(std::istream& in);
std::pair<PairStateGraph, std::uint32_t> load_edge_list_file(const std::string& path);

} // namespace clfree
