#include "clfree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <json.hpp>

#include "clfree/dem_check.hpp"
#include "clfree/gnp_props.hpp"
#include "clfree/graph.hpp"

namespace clfree {

// ---------------------------------------------------------------- sha1

namespace {

struct Sha1 {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                          0xC3D2E1F0u};
    std::uint64_t total = 0;
    unsigned char block[64];
    std::size_t fill = 0;

    static std::uint32_t rol(std::uint32_t v, int s) {
        return (v << s) | (v >> (32 - s));
    }

    void process(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    void update(const unsigned char* data, std::size_t len) {
        total += len;
        while (len > 0) {
            const std::size_t take = std::min(len, 64 - fill);
            std::memcpy(block + fill, data, take);
            fill += take;
            data += take;
            len -= take;
            if (fill == 64) {
                process(block);
                fill = 0;
            }
        }
    }

    std::string finish() {
        const std::uint64_t bits = total * 8;
        const unsigned char pad = 0x80;
        update(&pad, 1);
        const unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char lenb[8];
        for (int i = 0; i < 8; ++i) lenb[i] = (bits >> (56 - 8 * i)) & 0xFF;
        update(lenb, 8);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 40);
    }
};

} // namespace

std::string sha1_hex(const std::string& data) {
    Sha1 s;
    s.update(reinterpret_cast<const unsigned char*>(data.data()), data.size());
    return s.finish();
}

std::string git_blob_hash(const std::string& data) {
    std::string header = "blob " + std::to_string(data.size());
    header.push_back('\0');
    return sha1_hex(header + data);
}

// ---------------------------------------------------------------- manifest

std::string ExperimentManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    if (!mode.empty()) j["mode"] = mode;
    j["params"] = nlohmann::json::parse(params_json);
    j["master_seed"] = master_seed;
    j["run_count"] = run_count;
    j["out_dir"] = out_dir;
    j["file_hashes"] = file_hashes;
    j["timestamp"] = timestamp;
    return j.dump(2);
}

void write_output(ExperimentManifest& manifest, const std::string& name,
                  const std::string& body) {
    namespace fs = std::filesystem;
    fs::create_directories(manifest.out_dir);
    const fs::path path = fs::path(manifest.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    manifest.file_hashes[name] = git_blob_hash(body);
}

void write_manifest(const ExperimentManifest& manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(manifest.out_dir);
    std::ofstream out(fs::path(manifest.out_dir) / "manifest.json");
    out << manifest.to_json() << '\n';
}

// ---------------------------------------------------------------- simulate

SimulateRunOutput simulate_one_run(const SimulateOptions& opt,
                                   std::uint32_t run_index) {
    const ProcessParams& P = opt.params;
    ProcessRun run(P, CounterRng::stream(opt.master_seed, run_index).next_u64(),
                   opt.mode);

    // optional tuple ledger, auto-built on the empty graph
    std::optional<TupleLedger> ledger;
    if (opt.track_tuples) {
        if (P.u < 2 || P.saturated)
            throw std::invalid_argument("tuple tracking needs 2 <= u << n");
        std::vector<Vtx> U;
        for (Vtx v = 2; v <= P.n && static_cast<std::int64_t>(U.size()) < P.u; ++v)
            U.push_back(v);
        GoodConfigResult good = find_good_configuration(run.graph(), 1, U, P);
        if (opt.tuple_class_cap > 0) {
            SampledConfiguration sc = subsample_configuration(
                good.sigma, opt.tuple_class_cap, opt.master_seed + run_index);
            ledger.emplace(sc.sigma, P);
            ledger->set_scale(sc.scale);
        } else {
            ledger.emplace(good.sigma, P);
        }
    }

    // optional closed-family sample: fixed pairs drawn up front
    std::vector<VertexPair> closed_sample;
    if (opt.track_closed) {
        CounterRng rng = CounterRng::stream(opt.master_seed ^ 0x9E37u, run_index);
        const std::uint64_t total = run.graph().pair_count();
        for (std::uint32_t s = 0; s < opt.closed_sample; ++s)
            closed_sample.push_back(run.graph().unrank(rng.next_below(total)));
        std::sort(closed_sample.begin(), closed_sample.end());
        closed_sample.erase(std::unique(closed_sample.begin(), closed_sample.end()),
                            closed_sample.end());
    }

    std::ostringstream csv;
    csv.precision(10);
    csv << "schema=simulate.v1\n";
    csv << "i,t,open_count,q_pred,open_resid,max_degree,new_closed_count";
    if (opt.track_tuples) {
        for (std::uint32_t j = 0; j + 3 <= P.ell; ++j) csv << ",tuple_j" << j;
        csv << ",ignored";
    }
    csv << "\n";

    std::vector<std::pair<std::int64_t, double>> closed_series;
    const double pair_total = static_cast<double>(P.n) * (P.n - 1) / 2.0;

    const bool eager_mode = opt.mode == StepMode::Eager;
    auto emit_row = [&](std::int64_t i, std::size_t open_count,
                        std::size_t max_degree, std::size_t newly_closed) {
        const double t = P.time_of(i);
        const double q_pred = eval_q(t, P.ell) * pair_total;
        // open counts exist only under eager maintenance
        const double resid =
            (eager_mode && q_pred > 0)
                ? static_cast<double>(open_count) / q_pred - 1.0
                : 0.0;
        csv << i << ',' << t << ',' << open_count << ',' << q_pred << ','
            << resid << ',' << max_degree << ',' << newly_closed;
        if (opt.track_tuples) {
            for (std::uint32_t j = 0; j + 3 <= P.ell; ++j)
                csv << ',' << ledger->level(j).size();
            csv << ',' << ledger->ignored_count();
        }
        csv << '\n';
    };

    const bool eager = opt.mode == StepMode::Eager;
    if (eager) emit_row(0, run.graph().open_count(), 0, 0);

    std::vector<StepHook> pre, post;
    if (opt.track_tuples)
        pre.push_back([&](const StepEvent& ev) {
            ledger->tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
        });
    post.push_back([&](const StepEvent& ev) {
        const std::int64_t i_now = ev.i_before + 1;
        if (opt.stride > 0 && (i_now % opt.stride == 0))
            emit_row(i_now, eager ? ev.graph.open_count() : 0, ev.graph.max_degree(),
                     ev.newly_closed.size());
        if (opt.track_closed && opt.stride > 0 && (i_now % opt.stride == 0)) {
            double sum = 0;
            std::uint64_t cnt = 0;
            for (const VertexPair& uv : closed_sample) {
                if (ev.graph.state(uv) == PairState::Edge) continue;
                sum += static_cast<double>(
                    closing_pairs(ev.graph, uv.a, uv.b, P.ell).size());
                ++cnt;
            }
            if (cnt > 0)
                closed_series.emplace_back(i_now, sum / static_cast<double>(cnt));
        }
    });

    const std::int64_t budget =
        opt.max_steps >= 0 ? opt.max_steps
                           : static_cast<std::int64_t>(run.graph().pair_count());
    SimulateRunOutput out;
    out.summary = run_to(run, budget, pre, post);
    emit_row(out.summary.final_i, eager ? run.graph().open_count() : 0,
             run.graph().max_degree(), 0);
    out.step_csv = csv.str();

    nlohmann::json sj;
    sj["run_index"] = run_index;
    sj["seed"] = run.seed();
    sj["final_i"] = out.summary.final_i;
    sj["final_edges"] = out.summary.final_edges;
    sj["max_degree"] = out.summary.max_degree;
    sj["terminated"] = out.summary.terminated;
    sj["wall_seconds"] = out.summary.wall_seconds;
    out.summary_json = sj.dump(2);

    if (opt.track_closed) {
        const TrajectoryReport rep = trajectory_report(
            closed_series, TrajectoryQuantity::ClosedFamilySize, P);
        out.closed_csv = rep.to_csv();
    }
    if (opt.track_tuples) out.ledger_json = ledger->snapshot_json(out.summary.final_i);
    if (opt.save_graph) {
        std::ostringstream gtxt;
        save_edge_list(run.graph(), P.ell, gtxt);
        out.graph_txt = gtxt.str();
    }
    return out;
}

std::vector<SimulateRunOutput> simulate_runs(const SimulateOptions& opt,
                                             unsigned jobs) {
    std::vector<SimulateRunOutput> results(opt.runs);
    if (jobs == 0) jobs = 1;
    std::atomic<std::uint32_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::uint32_t idx = next.fetch_add(1);
            if (idx >= opt.runs) return;
            results[idx] = simulate_one_run(opt, idx);
        }
    };
    if (jobs == 1 || opt.runs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<unsigned>(jobs, opt.runs); ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return results;
}

// ---------------------------------------------------------------- scaling

LineFit scaling_fit(const std::vector<std::uint32_t>& n_list,
                    const std::vector<double>& medians, std::uint32_t ell) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const double n = n_list[i];
        const double logfac =
            std::pow(std::log(n), 1.0 / (static_cast<double>(ell) - 1.0));
        xs.push_back(std::log(n));
        ys.push_back(std::log(medians[i] / logfac));
    }
    return fit_line(xs, ys);
}

ScalingResult run_scaling(const ScalingOptions& opt) {
    if (opt.n_list.size() < 3)
        throw std::invalid_argument("run_scaling: need >= 3 sizes");
    ScalingResult res;
    res.n_list = opt.n_list;
    for (std::size_t s = 0; s < opt.n_list.size(); ++s) {
        SimulateOptions sim;
        sim.params = derive_params(opt.n_list[s], opt.ell, Mode::Simulation,
                                   opt.mu_hat, opt.eps_hat, opt.W_hat);
        sim.master_seed = opt.master_seed + 1000 * s;
        sim.runs = opt.runs;
        sim.max_steps = -1;
        sim.stride = 0; // summaries only
        const auto outs = simulate_runs(sim, opt.jobs);
        std::vector<double> edges, degs;
        for (const auto& o : outs) {
            edges.push_back(static_cast<double>(o.summary.final_edges));
            degs.push_back(static_cast<double>(o.summary.max_degree));
        }
        res.median_edges.push_back(median(edges));
        res.median_maxdeg.push_back(median(degs));
    }
    const LineFit fe = scaling_fit(res.n_list, res.median_edges, opt.ell);
    const LineFit fd = scaling_fit(res.n_list, res.median_maxdeg, opt.ell);
    res.fitted_exponent_edges = fe.slope;
    res.r_squared_edges = fe.r_squared;
    res.fitted_exponent_maxdeg = fd.slope;
    res.r_squared_maxdeg = fd.r_squared;
    return res;
}

std::string ScalingResult::to_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << "schema=scaling.v1\n";
    out << "n,median_final_edges,median_max_degree\n";
    for (std::size_t i = 0; i < n_list.size(); ++i)
        out << n_list[i] << ',' << median_edges[i] << ',' << median_maxdeg[i] << '\n';
    return out.str();
}

std::string ScalingResult::to_json() const {
    nlohmann::json j;
    j["fitted_exponent_edges"] = fitted_exponent_edges;
    j["fitted_exponent_maxdeg"] = fitted_exponent_maxdeg;
    j["r_squared_edges"] = r_squared_edges;
    j["r_squared_maxdeg"] = r_squared_maxdeg;
    return j.dump(2);
}

// ---------------------------------------------------------------- transfer

TransferResult run_transfer(const TransferOptions& opt) {
    if (!opt.property) throw std::invalid_argument("run_transfer: property required");
    TransferResult res;
    res.trials = opt.trials;
    const double open_floor =
        static_cast<double>(opt.params.n) * opt.params.n / opt.lambda;
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> proc_fail{0}, unif_fail{0}, y_below{0}, x_ge{0},
        subset_bad{0};
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t trial = next.fetch_add(1);
            if (trial >= opt.trials) return;
            const CoupledRun cr = run_coupled(opt.params, opt.lambda, opt.i,
                                              opt.master_seed + trial,
                                              /*extend_to_i=*/true);
            PairStateGraph unif(opt.params.n, /*with_open_index=*/false);
            for (const VertexPair& e : cr.unif_edges) unif.add_edge(e.a, e.b);
            if (!opt.property(unif)) ++unif_fail;
            if (cr.Y_M < cr.i) ++y_below;
            if (cr.X_M >= cr.i) {
                ++x_ge;
                if (!cr.subset_holds) ++subset_bad;
            }
            if (cr.reached_i &&
                static_cast<double>(cr.open_count_at_i) >= open_floor) {
                PairStateGraph gi(opt.params.n, /*with_open_index=*/false);
                for (const VertexPair& e : cr.proc_edges_at_i) gi.add_edge(e.a, e.b);
                if (!opt.property(gi)) ++proc_fail;
            }
        }
    };
    unsigned jobs = opt.jobs == 0 ? 1 : opt.jobs;
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    res.proc_fail = proc_fail;
    res.unif_fail = unif_fail;
    res.y_below_i = y_below;
    res.x_ge_i = x_ge;
    res.subset_violations = subset_bad;
    return res;
}

std::string TransferResult::to_json() const {
    nlohmann::json j;
    j["trials"] = trials;
    j["freq_proc_fail"] = static_cast<double>(proc_fail) / trials;
    j["freq_unif_fail"] = static_cast<double>(unif_fail) / trials;
    j["freq_y_below_i"] = static_cast<double>(y_below_i) / trials;
    j["x_ge_i_trials"] = x_ge_i;
    j["subset_violations"] = subset_violations;
    return j.dump(2);
}

GraphPredicate named_property(const std::string& name) {
    if (name == "always-true")
        return [](const PairStateGraph&) { return true; };
    if (name == "codegree-le-9")
        return [](const PairStateGraph& g) { return check_codegree(g).holds; };
    if (name.rfind("max-degree-le:", 0) == 0) {
        const std::size_t d = std::stoul(name.substr(14));
        return [d](const PairStateGraph& g) { return g.max_degree() <= d; };
    }
    throw std::invalid_argument("unknown property: " + name);
}

} // namespace clfree
