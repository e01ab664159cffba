#include "clfree/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace clfree {

PairStateGraph::PairStateGraph(Vtx n, bool with_open_index)
    : n_(n), has_open_index_(with_open_index) {
    if (n < 2) throw std::invalid_argument("PairStateGraph: n >= 2 required");
    adj_.assign(n + 1, {});
    state_.assign(pair_count(),
                  with_open_index ? PairState::Open : PairState::Unclassified);
    if (with_open_index) {
        open_ranks_.resize(pair_count());
        for (std::uint64_t i = 0; i < pair_count(); ++i)
            open_ranks_[i] = static_cast<std::uint32_t>(i);
        open_pos_.resize(pair_count());
        for (std::uint64_t i = 0; i < pair_count(); ++i)
            open_pos_[i] = static_cast<std::int32_t>(i);
    }
}

VertexPair PairStateGraph::unrank(std::uint64_t r) const {
    // walk the row lengths; rows shrink from n-1 down to 1
    Vtx x = 1;
    std::uint64_t row = n_ - 1;
    while (r >= row) {
        r -= row;
        --row;
        ++x;
    }
    return VertexPair(x, static_cast<Vtx>(x + 1 + r));
}

std::size_t PairStateGraph::max_degree() const {
    std::size_t d = 0;
    for (Vtx v = 1; v <= n_; ++v) d = std::max(d, adj_[v].size());
    return d;
}

void PairStateGraph::open_index_remove(std::uint64_t rk) {
    const std::int32_t pos = open_pos_[rk];
    if (pos < 0) return;
    const std::uint32_t last = open_ranks_.back();
    open_ranks_[pos] = last;
    open_pos_[last] = pos;
    open_ranks_.pop_back();
    open_pos_[rk] = -1;
}

void PairStateGraph::add_edge(Vtx x, Vtx y) {
    const std::uint64_t rk = rank(x, y);
    const PairState s = state_[rk];
    if (s == PairState::Edge)
        throw std::logic_error("add_edge: pair is already an edge");
    state_[rk] = PairState::Edge;
    if (has_open_index_ && s == PairState::Open) open_index_remove(rk);
    auto& ax = adj_[x];
    ax.insert(std::lower_bound(ax.begin(), ax.end(), y), y);
    auto& ay = adj_[y];
    ay.insert(std::lower_bound(ay.begin(), ay.end(), x), x);
    edges_.push_back(VertexPair(x, y));
}

void PairStateGraph::close_pair(Vtx x, Vtx y) {
    const std::uint64_t rk = rank(x, y);
    if (state_[rk] != PairState::Open)
        throw std::logic_error("close_pair: pair is not open");
    state_[rk] = PairState::Closed;
    if (has_open_index_) open_index_remove(rk);
}

void PairStateGraph::set_state(Vtx x, Vtx y, PairState s) {
    const std::uint64_t rk = rank(x, y);
    if (state_[rk] == PairState::Edge || s == PairState::Edge)
        throw std::logic_error("set_state: use add_edge for edges");
    if (has_open_index_) {
        if (state_[rk] == PairState::Open && s != PairState::Open)
            open_index_remove(rk);
        else if (state_[rk] != PairState::Open && s == PairState::Open) {
            open_pos_[rk] = static_cast<std::int32_t>(open_ranks_.size());
            open_ranks_.push_back(static_cast<std::uint32_t>(rk));
        }
    }
    state_[rk] = s;
}

std::size_t PairStateGraph::open_count() const {
    if (has_open_index_) return open_ranks_.size();
    std::size_t c = 0;
    for (const PairState s : state_)
        if (s == PairState::Open) ++c;
    return c;
}

VertexPair PairStateGraph::open_at(std::size_t idx) const {
    return unrank(open_ranks_.at(idx));
}

void save_edge_list(const PairStateGraph& g, std::uint32_t ell, std::ostream& out) {
    std::vector<VertexPair> edges = g.edge_list();
    std::sort(edges.begin(), edges.end());
    out << g.n() << ' ' << edges.size() << ' ' << ell << '\n';
    for (const VertexPair& e : edges) out << e.a << ' ' << e.b << '\n';
}

void save_edge_list_file(const PairStateGraph& g, std::uint32_t ell,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_edge_list(g, ell, out);
}

std::pair<PairStateGraph, std::uint32_t> load_edge_list(std::istream& in) {
    Vtx n = 0;
    std::uint64_t m = 0;
    std::uint32_t ell = 0;
    if (!(in >> n >> m >> ell))
        throw std::runtime_error("edge list: bad header (want \"n m ell\")");
    PairStateGraph g(n, /*with_open_index=*/false);
    for (std::uint64_t i = 0; i < m; ++i) {
        Vtx x = 0, y = 0;
        if (!(in >> x >> y)) throw std::runtime_error("edge list: truncated");
        g.add_edge(x, y);
    }
    return {std::move(g), ell};
}

std::pair<PairStateGraph, std::uint32_t> load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return load_edge_list(in);
}

} // namespace clfree
