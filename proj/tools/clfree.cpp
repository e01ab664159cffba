// clfree: simulate the C_ell-free process and check its predicted behavior.
//
// Subcommands: simulate, scaling, transfer, properties, track, verify-ode.
// Exit codes: 0 ok, 1 check failed, 2 bad flags, 3 infeasible parameters.
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "clfree/config_tracker.hpp"
#include "clfree/dem_check.hpp"
#include "clfree/gnp_props.hpp"
#include "clfree/harness.hpp"
#include "clfree/process.hpp"
#include "clfree/svg.hpp"

using namespace clfree;

namespace {

std::string now_stamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct CommonParams {
    std::uint32_t n = 100, ell = 4;
    double mu_hat = 0.4, eps_hat = 0.1, w_hat = 1.0;
    bool analysis = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--n", n, "vertex count");
        cmd->add_option("--ell", ell, "forbidden cycle length (>= 4)");
        cmd->add_option("--mu-hat", mu_hat, "simulation-mode mu");
        cmd->add_option("--eps-hat", eps_hat, "simulation-mode eps");
        cmd->add_option("--w-hat", w_hat, "simulation-mode W");
        cmd->add_flag("--analysis-mode", analysis, "strict asymptotic-regime constants");
    }

    ProcessParams derive() const {
        if (analysis) return derive_params(n, ell, Mode::Analysis);
        return derive_params(n, ell, Mode::Simulation, mu_hat, eps_hat, w_hat);
    }
};

std::vector<Vtx> parse_vertex_list(const std::string& csv) {
    std::vector<Vtx> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(static_cast<Vtx>(std::stoul(item)));
    return out;
}

int cmd_simulate(const CommonParams& cp, std::uint64_t seed, std::uint32_t runs,
                 std::int64_t max_steps, bool to_termination,
                 const std::string& track, const std::string& out_dir,
                 std::int64_t stride, unsigned jobs, bool rejection,
                 std::uint64_t tuple_cap, bool svg, bool save_graph) {
    SimulateOptions opt;
    opt.params = cp.derive();
    opt.master_seed = seed;
    opt.runs = runs;
    opt.max_steps = to_termination ? -1 : max_steps;
    opt.mode = rejection ? StepMode::Rejection : StepMode::Eager;
    opt.track_tuples = track.find("tuples") != std::string::npos;
    opt.track_closed = track.find("closed") != std::string::npos;
    opt.stride = stride;
    opt.tuple_class_cap = tuple_cap;
    opt.save_graph = save_graph;

    ExperimentManifest man;
    man.command = "simulate";
    man.mode = rejection ? "rejection" : "eager";
    man.params_json = opt.params.to_json();
    man.master_seed = seed;
    man.run_count = runs;
    man.out_dir = out_dir;
    man.timestamp = now_stamp();

    const auto results = simulate_runs(opt, jobs);
    for (std::uint32_t r = 0; r < runs; ++r) {
        const std::string tag = "run-" + std::to_string(r);
        write_output(man, tag + ".csv", results[r].step_csv);
        write_output(man, tag + "-summary.json", results[r].summary_json);
        if (opt.track_closed)
            write_output(man, tag + "-closed.csv", results[r].closed_csv);
        if (opt.track_tuples)
            write_output(man, tag + "-ledger.json", results[r].ledger_json);
        if (opt.save_graph)
            write_output(man, tag + "-graph.txt", results[r].graph_txt);
        if (svg) {
            std::vector<std::pair<std::int64_t, double>> series;
            std::istringstream in(results[r].step_csv);
            std::string line;
            std::getline(in, line); // schema
            std::getline(in, line); // header
            while (std::getline(in, line)) {
                long long i;
                double t, open;
                if (std::sscanf(line.c_str(), "%lld,%lf,%lf", &i, &t, &open) == 3)
                    series.emplace_back(i, open);
            }
            if (!series.empty()) {
                SvgStyle style;
                style.title = "open pairs, run " + std::to_string(r);
                style.y_label = "|O(i)|";
                const TrajectoryReport rep = trajectory_report(
                    series, TrajectoryQuantity::OpenPairs, opt.params);
                write_output(man, tag + "-open.svg", emit_svg(rep, style));
            }
        }
        std::cout << tag << ": final_i=" << results[r].summary.final_i
                  << " edges=" << results[r].summary.final_edges
                  << " max_deg=" << results[r].summary.max_degree
                  << (results[r].summary.terminated ? " (terminated)" : "") << "\n";
    }
    write_manifest(man);
    return 0;
}

int cmd_scaling(std::uint32_t ell, const std::string& n_csv, std::uint32_t runs,
                std::uint64_t seed, double mu_hat, double eps_hat, double w_hat,
                const std::string& out_dir, unsigned jobs, bool svg) {
    ScalingOptions opt;
    opt.ell = ell;
    for (const Vtx n : parse_vertex_list(n_csv)) opt.n_list.push_back(n);
    opt.runs = runs;
    opt.master_seed = seed;
    opt.mu_hat = mu_hat;
    opt.eps_hat = eps_hat;
    opt.W_hat = w_hat;
    opt.jobs = jobs;
    const ScalingResult res = run_scaling(opt);

    ExperimentManifest man;
    man.command = "scaling";
    man.params_json = derive_params(opt.n_list.front(), ell, Mode::Simulation,
                                    mu_hat, eps_hat, w_hat)
                          .to_json();
    man.master_seed = seed;
    man.run_count = runs;
    man.out_dir = out_dir;
    man.timestamp = now_stamp();
    write_output(man, "scaling.csv", res.to_csv());
    write_output(man, "fit.json", res.to_json());
    if (svg) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < res.n_list.size(); ++i) {
            const double logfac =
                std::pow(std::log(static_cast<double>(res.n_list[i])),
                         1.0 / (static_cast<double>(ell) - 1.0));
            xs.push_back(std::log(static_cast<double>(res.n_list[i])));
            ys.push_back(std::log(res.median_edges[i] / logfac));
        }
        const LineFit fit = fit_line(xs, ys);
        SvgStyle style;
        style.title = "final edges, log-log";
        style.x_label = "ln n";
        style.y_label = "ln(edges/(ln n)^{1/(ell-1)})";
        write_output(man, "edges.svg",
                     emit_svg_scatter(xs, ys, fit.slope, fit.intercept, true, style));
    }
    write_manifest(man);
    std::cout << res.to_json() << "\n";
    return 0;
}

int cmd_transfer(const CommonParams& cp, double lambda, std::int64_t i,
                 std::uint64_t trials, const std::string& property,
                 std::uint64_t seed, const std::string& out_dir, unsigned jobs) {
    TransferOptions opt;
    opt.params = cp.derive();
    opt.lambda = lambda;
    opt.i = i;
    opt.trials = trials;
    opt.master_seed = seed;
    opt.property = named_property(property);
    opt.jobs = jobs;
    const TransferResult res = run_transfer(opt);

    ExperimentManifest man;
    man.command = "transfer";
    man.params_json = opt.params.to_json();
    man.master_seed = seed;
    man.run_count = trials;
    man.out_dir = out_dir;
    man.timestamp = now_stamp();
    write_output(man, "transfer.json", res.to_json());
    write_manifest(man);
    std::cout << res.to_json() << "\n";
    return res.subset_violations == 0 ? 0 : 1;
}

int cmd_properties(const CommonParams& cp, const std::string& graph_file,
                   const std::string& gnp, std::uint64_t seed,
                   const std::string& check, const std::string& a_csv,
                   const std::string& b_csv, const std::string& s_csv,
                   const std::string& u_csv, std::uint32_t d) {
    ProcessParams P = cp.derive();
    PairStateGraph g(2, false);
    if (!graph_file.empty()) {
        auto [gg, file_ell] = load_edge_list_file(graph_file);
        g = std::move(gg);
        (void)file_ell;
    } else if (!gnp.empty()) {
        g = sample_binomial_graph(P.n, std::stod(gnp), seed);
    } else {
        std::cerr << "properties: need --graph or --gnp\n";
        return 2;
    }

    const std::vector<Vtx> A = parse_vertex_list(a_csv);
    const std::vector<Vtx> B = parse_vertex_list(b_csv);
    const std::vector<Vtx> S = parse_vertex_list(s_csv);
    std::vector<Vtx> U = parse_vertex_list(u_csv);
    if (U.empty())
        for (Vtx v = 1; v <= g.n(); ++v) U.push_back(v);

    std::string verdict;
    bool holds = false;
    if (check == "codegree") {
        const CodegreeReport r = check_codegree(g);
        holds = r.holds;
        verdict =
            verdict_json("codegree", r.holds, static_cast<double>(r.max_codegree), 9);
    } else if (check == "degree") {
        const DegreeReport r = check_degree_D(g, P);
        holds = r.holds;
        verdict =
            verdict_json("degree", r.holds, static_cast<double>(r.max_degree), r.bound);
    } else if (check == "independent-subset") {
        const IndependentSubset r = greedy_independent_subset(g, U);
        holds = !r.premise_failed && 6 * r.S.size() >= U.size();
        verdict = verdict_json("independent-subset", holds,
                               static_cast<double>(r.S.size()),
                               static_cast<double>(U.size()) / 6.0,
                               r.premise_failed ? "peel premise failed" : "");
    } else if (check == "edges-M") {
        const EdgesBoundedReport r = check_edges_bounded_M(g, A, S, P);
        holds = r.holds;
        verdict = verdict_json("edges-M", r.holds,
                               static_cast<double>(r.edge_count), r.bound);
    } else if (check == "KL") {
        const KLReport r = check_KL(g, P, A, B, d);
        holds = r.K_holds && r.L_holds;
        verdict = verdict_json("KL", holds, static_cast<double>(r.e_AB), r.K_bound,
                               r.witness);
    } else if (check == "P1") {
        const P1Report r = build_X_P1(g, A, S, P);
        holds = r.holds;
        double worst = 0;
        for (const auto c : r.per_v_counts)
            worst = std::max(worst, static_cast<double>(c));
        verdict = verdict_json("P1", r.holds, worst, r.bound);
    } else if (check == "P2") {
        const P2Report r = build_XF_P2(g, A, B, P);
        holds = r.holds;
        verdict =
            verdict_json("P2", r.holds, static_cast<double>(r.pair_count), r.bound);
    } else if (check == "F") {
        const FQ2Report r = build_F_Q2(g, A, B, P);
        holds = r.holds && r.f_budget_ok;
        verdict = verdict_json(
            "F", holds, static_cast<double>(r.F.size()),
            static_cast<double>(P.k) *
                std::pow(static_cast<double>(P.n), 2.0 * P.eps));
    } else {
        std::cerr << "properties: unknown --check " << check << "\n";
        return 2;
    }
    std::cout << verdict << "\n";
    return holds ? 0 : 1;
}

int cmd_track(const CommonParams& cp, std::uint64_t seed, std::int64_t max_steps,
              bool to_termination, bool exact, std::uint64_t cap,
              const std::string& config_json, const std::string& out_dir,
              bool check_each_step) {
    ProcessParams P = cp.derive();
    ProcessRun run(P, CounterRng::stream(seed, 0).next_u64(), StepMode::Eager);

    Configuration sigma;
    if (!config_json.empty()) {
        std::ifstream in(config_json);
        if (!in) throw std::runtime_error("cannot open " + config_json);
        nlohmann::json j;
        in >> j;
        sigma = build_configuration(
            j.at("v_tilde").get<Vtx>(), j.at("U").get<std::vector<Vtx>>(),
            j.at("A").get<std::vector<Vtx>>(), j.at("B").get<std::vector<Vtx>>(),
            j.at("R").get<std::vector<Vtx>>(), P.ell, P.r, P.n);
    } else {
        std::vector<Vtx> U;
        for (Vtx v = 2; v <= P.n && static_cast<std::int64_t>(U.size()) < P.u; ++v)
            U.push_back(v);
        sigma = find_good_configuration(run.graph(), 1, U, P).sigma;
    }
    if (!exact && cap > 0) {
        SampledConfiguration sc = subsample_configuration(sigma, cap, seed);
        sigma = sc.sigma;
    }
    TupleLedger ledger(sigma, P);

    std::ostringstream snapshots;
    snapshots << "[\n";
    bool first = true;
    std::vector<StepHook> pre{[&](const StepEvent& ev) {
        if (check_each_step) ledger.verify_consistency(ev.graph);
        ledger.tuple_step_update(ev.graph, ev.chosen, &ev.newly_closed);
    }};
    std::vector<StepHook> post{[&](const StepEvent& ev) {
        if (!first) snapshots << ",\n";
        first = false;
        snapshots << ledger.snapshot_json(ev.i_before + 1);
    }};
    const std::int64_t budget =
        to_termination ? static_cast<std::int64_t>(run.graph().pair_count())
                       : max_steps;
    const RunSummary sum = run_to(run, budget, pre, post);
    snapshots << "\n]\n";

    ExperimentManifest man;
    man.command = "track";
    man.params_json = P.to_json();
    man.master_seed = seed;
    man.run_count = 1;
    man.out_dir = out_dir;
    man.timestamp = now_stamp();
    const BadEventReport bad = check_bad_events(run.graph(), sigma, P);
    write_output(man, "ledger-steps.json", snapshots.str());
    write_output(man, "ledger-snapshot.json",
                 ledger.snapshot_json(sum.final_i, &bad));
    nlohmann::json final_j;
    final_j["final_i"] = sum.final_i;
    final_j["ut_violated"] = ledger.ut_violated();
    final_j["ignored_count"] = ledger.ignored_count();
    final_j["z_size"] = ledger.z_set(run.graph()).size();
    final_j["b1_count"] = bad.b1_count;
    final_j["b1_holds"] = bad.b1_holds;
    final_j["b2_holds"] = bad.b2_holds;
    write_output(man, "ledger-final.json", final_j.dump(2));
    write_manifest(man);
    std::cout << final_j.dump(2) << "\n";
    return ledger.ut_violated() ? 1 : 0;
}

int cmd_verify_ode(std::uint32_t ell, double step, double t_end, double W) {
    const OdeIdentityReport rep = verify_ode_identities(ell, step, t_end, W);
    nlohmann::json j;
    j["max_rel_error_derivative"] = rep.max_rel_error_closed;
    j["max_rel_error_fd"] = rep.max_rel_error_fd;
    j["max_rel_error_integral"] = rep.max_rel_error_integral;
    std::cout << j.dump(2) << "\n";
    const bool ok = rep.max_rel_error_closed <= 1e-9 &&
                    rep.max_rel_error_fd <= 1e-6 &&
                    rep.max_rel_error_integral <= 1e-6;
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"C_ell-free process laboratory"};
    app.require_subcommand(1);
    // plain key=value lines under a [subcommand] section; explicit flags win
    app.set_config("--config", "", "config file with a [subcommand] section");

    auto* sim = app.add_subcommand("simulate", "run the process");
    CommonParams sim_cp;
    sim_cp.attach(sim);
    std::uint64_t sim_seed = 1;
    std::uint32_t sim_runs = 1;
    std::int64_t sim_steps = -1, sim_stride = 1;
    std::uint64_t sim_cap = 0;
    bool sim_term = false, sim_rej = false, sim_svg = false, sim_save = false;
    std::string sim_track = "open,degree", sim_out = "out/simulate";
    unsigned sim_jobs = std::thread::hardware_concurrency();
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--runs", sim_runs, "number of runs");
    sim->add_option("--max-steps", sim_steps, "step budget");
    sim->add_flag("--to-termination", sim_term, "run until no open pair");
    sim->add_option("--track", sim_track, "open,degree,closed,tuples");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--stride", sim_stride, "CSV row stride (0 = summary only)");
    sim->add_option("--jobs", sim_jobs, "worker pool size");
    sim->add_flag("--rejection", sim_rej, "rejection sampling mode");
    sim->add_option("--tuple-cap", sim_cap, "sampled ledger class cap (0 = exact)");
    sim->add_flag("--svg", sim_svg, "emit open-pair trajectory charts");
    sim->add_flag("--save-graph", sim_save, "emit the final edge list per run");

    auto* sca = app.add_subcommand("scaling", "final-size exponent sweep");
    std::uint32_t sca_ell = 4, sca_runs = 5;
    std::string sca_nlist = "400,800,1600,3200", sca_out = "out/scaling";
    std::uint64_t sca_seed = 1;
    double sca_mu = 0.4, sca_eps = 0.1, sca_w = 1.0;
    unsigned sca_jobs = std::thread::hardware_concurrency();
    bool sca_svg = false;
    sca->add_option("--ell", sca_ell);
    sca->add_option("--n-list", sca_nlist, ">= 3 sizes, comma separated");
    sca->add_option("--runs", sca_runs, "runs per size");
    sca->add_option("--seed", sca_seed);
    sca->add_option("--mu-hat", sca_mu);
    sca->add_option("--eps-hat", sca_eps);
    sca->add_option("--w-hat", sca_w);
    sca->add_option("--out", sca_out);
    sca->add_option("--jobs", sca_jobs);
    sca->add_flag("--svg", sca_svg);

    auto* tra = app.add_subcommand("transfer", "coupled uniform-graph experiment");
    CommonParams tra_cp;
    tra_cp.attach(tra);
    double tra_lambda = 4;
    std::int64_t tra_i = 50;
    std::uint64_t tra_trials = 1000, tra_seed = 1;
    std::string tra_prop = "codegree-le-9", tra_out = "out/transfer";
    unsigned tra_jobs = std::thread::hardware_concurrency();
    tra->add_option("--lambda", tra_lambda, ">= 2");
    tra->add_option("--i", tra_i, "target step");
    tra->add_option("--trials", tra_trials);
    tra->add_option("--property", tra_prop,
                    "always-true | codegree-le-9 | max-degree-le:<d>");
    tra->add_option("--seed", tra_seed);
    tra->add_option("--out", tra_out);
    tra->add_option("--jobs", tra_jobs);

    auto* pro = app.add_subcommand("properties", "graph property checkers");
    CommonParams pro_cp;
    pro_cp.attach(pro);
    std::string pro_graph, pro_gnp, pro_check = "codegree";
    std::string pro_a, pro_b, pro_s, pro_u;
    std::uint64_t pro_seed = 1;
    std::uint32_t pro_d = 1;
    pro->add_option("--graph", pro_graph, "edge-list file");
    pro->add_option("--gnp", pro_gnp, "sample G_{n,p'} with this p'");
    pro->add_option("--seed", pro_seed);
    pro->add_option("--check", pro_check,
                    "codegree|degree|independent-subset|edges-M|KL|P1|P2|F");
    pro->add_option("--A", pro_a, "vertex list");
    pro->add_option("--B", pro_b, "vertex list");
    pro->add_option("--S", pro_s, "vertex list");
    pro->add_option("--U", pro_u, "vertex list");
    pro->add_option("--d", pro_d, "degree threshold for KL");

    auto* trk = app.add_subcommand("track", "replay with tuple ledgers");
    CommonParams trk_cp;
    trk_cp.attach(trk);
    std::uint64_t trk_seed = 1, trk_cap = 0;
    std::int64_t trk_steps = 100;
    bool trk_term = false, trk_exact = true, trk_check = false;
    std::string trk_config, trk_out = "out/track";
    trk->add_option("--seed", trk_seed);
    trk->add_option("--max-steps", trk_steps);
    trk->add_flag("--to-termination", trk_term);
    trk->add_flag("--exact,!--sampled", trk_exact, "ledger mode");
    trk->add_option("--cap", trk_cap, "sampled-mode class cap");
    trk->add_option("--sigma", trk_config, "configuration JSON file");
    trk->add_option("--out", trk_out);
    trk->add_flag("--check-consistency", trk_check, "verify ledger each step");

    auto* ode = app.add_subcommand("verify-ode", "trajectory identity checks");
    std::uint32_t ode_ell = 4;
    double ode_step = 1e-3, ode_tend = 2.0, ode_w = 1.0;
    ode->add_option("--ell", ode_ell);
    ode->add_option("--step", ode_step);
    ode->add_option("--t-end", ode_tend);
    ode->add_option("--w", ode_w);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_cp, sim_seed, sim_runs, sim_steps, sim_term,
                                sim_track, sim_out, sim_stride, sim_jobs, sim_rej,
                                sim_cap, sim_svg, sim_save);
        if (sca->parsed())
            return cmd_scaling(sca_ell, sca_nlist, sca_runs, sca_seed, sca_mu,
                               sca_eps, sca_w, sca_out, sca_jobs, sca_svg);
        if (tra->parsed())
            return cmd_transfer(tra_cp, tra_lambda, tra_i, tra_trials, tra_prop,
                                tra_seed, tra_out, tra_jobs);
        if (pro->parsed())
            return cmd_properties(pro_cp, pro_graph, pro_gnp, pro_seed, pro_check,
                                  pro_a, pro_b, pro_s, pro_u, pro_d);
        if (trk->parsed())
            return cmd_track(trk_cp, trk_seed, trk_steps, trk_term, trk_exact,
                             trk_cap, trk_config, trk_out, trk_check);
        if (ode->parsed()) return cmd_verify_ode(ode_ell, ode_step, ode_tend, ode_w);
    } catch (const std::domain_error& e) {
        std::cerr << "infeasible parameters: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "infeasible parameters: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
