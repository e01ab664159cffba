#include "clfree/process.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace clfree {

ProcessRun::ProcessRun(ProcessParams params, std::uint64_t rng_seed, StepMode mode)
    : params_(params),
      graph_(params.n, /*with_open_index=*/mode == StepMode::Eager),
      seed_(rng_seed),
      rng_(CounterRng::stream(rng_seed, 0)),
      mode_(mode),
      scratch_(params.n) {}

std::optional<VertexPair> ProcessRun::draw_open_pair() {
    if (mode_ == StepMode::Eager) {
        const std::size_t c = graph_.open_count();
        if (c == 0) return std::nullopt;
        return graph_.open_at(static_cast<std::size_t>(rng_.next_below(c)));
    }
    // Rejection: uniform non-edge, redrawn while closed. After pair_count()
    // consecutive rejections a full sweep decides termination; if the sweep
    // still sees an open pair, rejection sampling resumes (the law of the
    // draw is untouched).
    const std::uint64_t total = graph_.pair_count();
    std::uint64_t rejections = 0;
    for (;;) {
        const VertexPair cand = graph_.unrank(rng_.next_below(total));
        if (graph_.state(cand) != PairState::Edge &&
            is_open_bruteforce(graph_, cand.a, cand.b, params_.ell))
            return cand;
        if (++rejections >= total) {
            bool any_open = false;
            for (Vtx x = 1; x <= graph_.n() && !any_open; ++x)
                for (Vtx y = x + 1; y <= graph_.n() && !any_open; ++y)
                    if (graph_.state(x, y) != PairState::Edge &&
                        is_open_bruteforce(graph_, x, y, params_.ell))
                        any_open = true;
            if (!any_open) return std::nullopt;
            rejections = 0;
        }
    }
}

ProcessRun::StepResult ProcessRun::step() {
    StepResult out;
    if (!step_with_hooks({}, {}, &out)) throw ProcessTerminated();
    return out;
}

bool ProcessRun::step_with_hooks(const std::vector<StepHook>& pre_hooks,
                                 const std::vector<StepHook>& post_hooks,
                                 StepResult* result) {
    const std::optional<VertexPair> chosen = draw_open_pair();
    if (!chosen) {
        terminated_ = true;
        return false;
    }
    const std::int64_t i_before = step_index();
    closed_buf_.clear();
    if (mode_ == StepMode::Eager)
        closing_pairs_into(graph_, chosen->a, chosen->b, params_.ell, scratch_,
                           closed_buf_);
    for (const StepHook& h : pre_hooks)
        h(StepEvent{i_before, graph_, *chosen, closed_buf_});
    graph_.add_edge(chosen->a, chosen->b);
    if (mode_ == StepMode::Eager)
        for (const VertexPair& p : closed_buf_) graph_.close_pair(p.a, p.b);
    for (const StepHook& h : post_hooks)
        h(StepEvent{i_before, graph_, *chosen, closed_buf_});
    if (result) {
        result->chosen = *chosen;
        result->newly_closed = closed_buf_;
    }
    return true;
}

RunSummary run_to(ProcessRun& run, std::int64_t max_steps,
                  const std::vector<StepHook>& pre_hooks,
                  const std::vector<StepHook>& post_hooks) {
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary out;
    for (std::int64_t s = 0; s < max_steps; ++s)
        if (!run.step_with_hooks(pre_hooks, post_hooks, nullptr)) break;
    out.final_i = run.step_index();
    out.final_edges = static_cast<std::int64_t>(run.graph().edge_list().size());
    out.max_degree = run.graph().max_degree();
    out.terminated = run.terminated();
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

CoupledRun run_coupled(const ProcessParams& params, double lambda, std::int64_t i,
                       std::uint64_t seed, bool extend_to_i) {
    if (lambda < 2) throw std::domain_error("run_coupled: lambda >= 2 required");
    const Vtx n = params.n;
    const std::uint64_t N = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (i < 1 || static_cast<double>(i) * lambda > static_cast<double>(N))
        throw std::domain_error("run_coupled: i out of range");

    CoupledRun out;
    out.i = i;
    out.lambda = lambda;
    out.M = static_cast<std::int64_t>(std::floor(static_cast<double>(i) * lambda));

    CounterRng rng = CounterRng::stream(seed, 1);
    std::vector<std::uint32_t> ranks(N);
    for (std::uint64_t r = 0; r < N; ++r) ranks[r] = static_cast<std::uint32_t>(r);

    PairStateGraph proc(n, /*with_open_index=*/true);
    const double open_floor = static_cast<double>(n) * n / lambda;
    PathScratch scratch(n);
    std::vector<VertexPair> closed;
    out.X.resize(out.M);
    out.Y.resize(out.M);
    // incremental Fisher-Yates: position j settled right before traversal
    for (std::uint64_t j = 0; j < N; ++j) {
        const bool within_M = j < static_cast<std::uint64_t>(out.M);
        if (!within_M) {
            if (!extend_to_i || out.reached_i || proc.open_count() == 0) break;
        }
        if (j + 1 < N) {
            const std::uint64_t pick = j + rng.next_below(N - j);
            std::swap(ranks[j], ranks[pick]);
        }
        const VertexPair e = proc.unrank(ranks[j]);
        const bool small_open = static_cast<double>(proc.open_count()) < open_floor;
        const bool accepted = proc.state(e) == PairState::Open;
        if (accepted) {
            closing_pairs_into(proc, e.a, e.b, params.ell, scratch, closed);
            proc.add_edge(e.a, e.b);
            for (const VertexPair& p : closed) proc.close_pair(p.a, p.b);
            out.proc_edges.push_back(e);
        }
        if (within_M) {
            out.permutation.push_back(e);
            out.unif_edges.push_back(e);
            out.X[j] = accepted ? 1 : 0;
            out.Y[j] = small_open ? 1 : out.X[j];
            out.X_M += out.X[j];
            out.Y_M += out.Y[j];
        }
        if (extend_to_i && !out.reached_i &&
            static_cast<std::int64_t>(proc.edge_list().size()) == i) {
            out.reached_i = true;
            out.open_count_at_i = proc.open_count();
            out.proc_edges_at_i = proc.edge_list();
        }
    }

    // Exact subset check: the first min(i, X^M) accepted edges must all
    // appear among the M drawn pairs.
    std::vector<VertexPair> unif_sorted = out.unif_edges;
    std::sort(unif_sorted.begin(), unif_sorted.end());
    const std::int64_t upto = std::min<std::int64_t>(i, out.X_M);
    for (std::int64_t j = 0; j < upto; ++j) {
        if (!std::binary_search(unif_sorted.begin(), unif_sorted.end(),
                                out.proc_edges[j])) {
            out.subset_holds = false;
            break;
        }
    }
    return out;
}

PairStateGraph sample_binomial_graph(Vtx n, double p_prime, std::uint64_t seed,
                                     std::optional<std::uint32_t> classify_ell) {
    if (p_prime < 0 || p_prime > 1)
        throw std::domain_error("sample_binomial_graph: p in [0,1] required");
    PairStateGraph g(n, /*with_open_index=*/false);
    CounterRng rng = CounterRng::stream(seed, 2);
    for (Vtx x = 1; x <= n; ++x)
        for (Vtx y = x + 1; y <= n; ++y)
            if (rng.next_double() < p_prime) g.add_edge(x, y);
    if (classify_ell) return recompute_pair_states(g, *classify_ell);
    return g;
}

} // namespace clfree
