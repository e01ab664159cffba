// Experiment orchestration: seeded multi-run simulation with per-step CSVs,
// run manifests with git-style content hashes, the scaling sweep with
// log-log exponent fits, and the coupled transfer experiment.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clfree/config_tracker.hpp"
#include "clfree/process.hpp"
#include "clfree/stats.hpp"

namespace clfree {

std::string sha1_hex(const std::string& data);
// git blob convention: sha1("blob <len>\0" + data)
std::string git_blob_hash(const std::string& data);

struct ExperimentManifest {
    std::string command;
    std::string mode; // eager | rejection, when meaningful
    std::string params_json;
    std::uint64_t master_seed = 0;
    std::uint64_t run_count = 0;
    std::string out_dir;
    std::map<std::string, std::string> file_hashes;
    std::string timestamp; // informational; not part of the reproducible body

    std::string to_json() const;
};

// Writes body to out_dir/name and records its blob hash in the manifest.
void write_output(ExperimentManifest& manifest, const std::string& name,
                  const std::string& body);
void write_manifest(const ExperimentManifest& manifest);

struct SimulateOptions {
    ProcessParams params;
    std::uint64_t master_seed = 0;
    std::uint32_t runs = 1;
    std::int64_t max_steps = -1; // -1: to termination
    StepMode mode = StepMode::Eager;
    bool track_tuples = false;
    bool track_closed = false;
    std::uint32_t closed_sample = 50;
    std::int64_t stride = 1;
    std::uint64_t tuple_class_cap = 0; // 0: exact ledger
    bool save_graph = false;           // emit the final edge list
};

struct SimulateRunOutput {
    RunSummary summary;
    std::string step_csv;
    std::string summary_json;
    std::string closed_csv;  // when track_closed
    std::string ledger_json; // when track_tuples
    std::string graph_txt;   // when save_graph
};

SimulateRunOutput simulate_one_run(const SimulateOptions& opt,
                                   std::uint32_t run_index);

// Bounded worker pool; results land in index order.
std::vector<SimulateRunOutput> simulate_runs(const SimulateOptions& opt,
                                             unsigned jobs);

struct ScalingOptions {
    std::uint32_t ell = 4;
    std::vector<std::uint32_t> n_list;
    std::uint32_t runs = 5;
    std::uint64_t master_seed = 0;
    double mu_hat = 0.4, eps_hat = 0.1, W_hat = 1.0;
    unsigned jobs = 1;
};

struct ScalingResult {
    std::vector<std::uint32_t> n_list;
    std::vector<double> median_edges, median_maxdeg;
    double fitted_exponent_edges = 0;
    double fitted_exponent_maxdeg = 0;
    double r_squared_edges = 0, r_squared_maxdeg = 0;

    std::string to_csv() const;
    std::string to_json() const;
};

ScalingResult run_scaling(const ScalingOptions& opt);

// Fits ln(median / (ln n)^{1/(ell-1)}) against ln n.
LineFit scaling_fit(const std::vector<std::uint32_t>& n_list,
                    const std::vector<double>& medians, std::uint32_t ell);

using GraphPredicate = std::function<bool(const PairStateGraph&)>; // "in Q"

struct TransferOptions {
    ProcessParams params;
    double lambda = 4;
    std::int64_t i = 50;
    std::uint64_t trials = 1000;
    std::uint64_t master_seed = 0;
    GraphPredicate property; // decreasing
    unsigned jobs = 1;
};

struct TransferResult {
    std::uint64_t trials = 0;
    std::uint64_t proc_fail = 0;    // G(i) not in Q and |O(i)| >= n^2/lambda
    std::uint64_t unif_fail = 0;    // G_{n,M} not in Q
    std::uint64_t y_below_i = 0;    // Y^M < i
    std::uint64_t x_ge_i = 0;       // trials with X^M >= i
    std::uint64_t subset_violations = 0;

    std::string to_json() const;
};

TransferResult run_transfer(const TransferOptions& opt);

// Named decreasing properties for the CLI: "always-true", "codegree-le-9",
// "max-degree-le:<d>". Throws on unknown names.
GraphPredicate named_property(const std::string& name);

} // namespace clfree
