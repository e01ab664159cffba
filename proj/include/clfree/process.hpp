// The C_ell-free process: add uniformly chosen open pairs one at a time,
// never creating a copy of C_ell. Eager mode maintains the full pair-state
// partition (exact open counts, exact termination); Rejection mode redraws
// uniform non-edges until an open one is found and keeps no state.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "clfree/graph.hpp"
#include "clfree/params.hpp"
#include "clfree/paths.hpp"
#include "clfree/rng.hpp"

namespace clfree {

enum class StepMode { Eager, Rejection };

struct ProcessTerminated : std::runtime_error {
    ProcessTerminated() : std::runtime_error("process terminated: no open pair") {}
};

// Observer data for one step. Pre-step hooks run before the graph mutates
// (graph = G(i), the chosen pair still open in it); post-step hooks run
// after (graph = G(i+1)). newly_closed is exact in Eager mode only.
struct StepEvent {
    std::int64_t i_before = 0; // number of edges before the step
    const PairStateGraph& graph;
    VertexPair chosen;
    const std::vector<VertexPair>& newly_closed;
};

using StepHook = std::function<void(const StepEvent&)>;

class ProcessRun {
public:
    ProcessRun(ProcessParams params, std::uint64_t rng_seed,
               StepMode mode = StepMode::Eager);

    const ProcessParams& params() const { return params_; }
    const PairStateGraph& graph() const { return graph_; }
    StepMode mode() const { return mode_; }
    std::uint64_t seed() const { return seed_; }
    std::int64_t step_index() const { return graph_.step(); }
    bool terminated() const { return terminated_; }

    struct StepResult {
        VertexPair chosen;
        std::vector<VertexPair> newly_closed;
    };

    // One step: draw uniformly from the open set, flip it to Edge, close its
    // closing pairs (Eager). Throws ProcessTerminated when no open pair.
    StepResult step();

    // Returns false (and sets the terminated flag) when the open set is empty.
    bool step_with_hooks(const std::vector<StepHook>& pre_hooks,
                         const std::vector<StepHook>& post_hooks,
                         StepResult* result);

    const std::vector<VertexPair>& last_newly_closed() const { return closed_buf_; }

private:
    ProcessParams params_;
    PairStateGraph graph_;
    std::uint64_t seed_;
    CounterRng rng_;
    StepMode mode_;
    bool terminated_ = false;
    PathScratch scratch_;
    std::vector<VertexPair> closed_buf_;

    std::optional<VertexPair> draw_open_pair();
};

struct RunSummary {
    std::int64_t final_i = 0;
    std::int64_t final_edges = 0;
    std::size_t max_degree = 0;
    bool terminated = false;
    double wall_seconds = 0;
};

// Executes steps until max_steps or termination; pre hooks see G(i),
// post hooks see G(i+1).
RunSummary run_to(ProcessRun& run, std::int64_t max_steps,
                  const std::vector<StepHook>& pre_hooks = {},
                  const std::vector<StepHook>& post_hooks = {});

// Coupled generation against the uniform random graph: a uniform permutation
// e_1..e_N of all pairs, the H-free filter indicators X_j, the padded
// indicators Y_j (forced to 1 while the open set is small), G_{n,M} and the
// filtered process graph, with M = floor(i lambda).
struct CoupledRun {
    std::int64_t i = 0;
    double lambda = 0;
    std::int64_t M = 0;
    std::vector<VertexPair> permutation; // first M drawn pairs
    std::vector<std::uint8_t> X, Y;      // indicators, index 0 = e_1
    std::int64_t X_M = 0, Y_M = 0;       // cumulative sums at M
    std::vector<VertexPair> unif_edges;  // edge set of G_{n,M}
    std::vector<VertexPair> proc_edges;  // accepted edges, in order
    bool subset_holds = true;            // G(min(i, X^M)) subseteq G_{n,M}

    // filled when the traversal is extended to step i of the process
    bool reached_i = false;
    std::size_t open_count_at_i = 0;
    std::vector<VertexPair> proc_edges_at_i;
};

// extend_to_i keeps filtering the permutation past M until the process has
// i edges (the filtered traversal of a uniform permutation is the process).
CoupledRun run_coupled(const ProcessParams& params, double lambda, std::int64_t i,
                       std::uint64_t seed, bool extend_to_i = false);

// G_{n,p'}: every pair independently an edge. States unclassified unless
// classify (then recomputed for the given ell).
PairStateGraph sample_binomial_graph(Vtx n, double p_prime, std::uint64_t seed,
                                     std::optional<std::uint32_t> classify_ell = std::nullopt);

} // namespace clfree
