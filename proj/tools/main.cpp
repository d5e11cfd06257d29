// Command-line driver for the operator-inference pipeline: generate a
// benchmark workspace, select training rows from its dictionary, infer
// operators from noisy re-projected data, and run the Monte Carlo
// evaluation. Subcommands communicate only through files, so each stage can
// be rerun or swapped out independently.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opinf/opinf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRankDeficient = 3;
constexpr int kExitUnstable = 4;

int thread_count() {
    if (const char *env = std::getenv("OPINF_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct Options {
    std::string benchmark = "heat";
    std::string method = "active";
    std::string dir;
    std::string selection;
    std::string out;
    std::string config;
    std::string sigma_grid = "1e-3,3.1623e-3,1e-2,3.1623e-2,1e-1";
    int grid_points = 0; // 0: benchmark default
    int n = 7;
    int ell = 0; // 0: benchmark default
    long K = 0;
    long horizon = 0; // 0: benchmark default
    long replicates = 10000;
    long steps = 40;
    double dt = 0.01;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Flags override config-file values, so the config is applied to the
// defaults before CLI11 parses.
void apply_config(Options &opt, const std::string &path) {
    std::ifstream in(path);
    if (!in) throw opinf::PreconditionError("cannot open config file " + path);
    json cfg = json::parse(in);
    if (cfg.contains("benchmark")) opt.benchmark = cfg["benchmark"].get<std::string>();
    if (cfg.contains("method")) opt.method = cfg["method"].get<std::string>();
    if (cfg.contains("out")) opt.out = cfg["out"].get<std::string>();
    if (cfg.contains("selection")) opt.selection = cfg["selection"].get<std::string>();
    if (cfg.contains("sigma-grid")) opt.sigma_grid = cfg["sigma-grid"].get<std::string>();
    if (cfg.contains("grid-points")) opt.grid_points = cfg["grid-points"].get<int>();
    if (cfg.contains("n")) opt.n = cfg["n"].get<int>();
    if (cfg.contains("ell")) opt.ell = cfg["ell"].get<int>();
    if (cfg.contains("K")) opt.K = cfg["K"].get<long>();
    if (cfg.contains("horizon")) opt.horizon = cfg["horizon"].get<long>();
    if (cfg.contains("replicates")) opt.replicates = cfg["replicates"].get<long>();
    if (cfg.contains("steps")) opt.steps = cfg["steps"].get<long>();
    if (cfg.contains("dt")) opt.dt = cfg["dt"].get<double>();
    if (cfg.contains("sigma")) opt.sigma = cfg["sigma"].get<double>();
    if (cfg.contains("seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
}

std::vector<double> parse_sigma_grid(const std::string &text) {
    std::vector<double> grid;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) grid.push_back(std::stod(token));
    }
    if (grid.empty()) throw opinf::PreconditionError("empty sigma grid");
    return grid;
}

void write_json(const fs::path &path, const json &value) {
    opinf::atomic_write_file(path, [&](std::ostream &out) { out << value.dump(2) << '\n'; });
}

json read_json(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw opinf::PreconditionError("cannot open " + path.string());
    return json::parse(in);
}

// ------------------------------------------------------------------
// Benchmark workspaces
// ------------------------------------------------------------------

struct Workspace {
    opinf::BenchmarkWorkspace ws;
    json meta;
};

Workspace build_heat_workspace(const Options &opt) {
    opinf::HeatParams params;
    if (opt.grid_points > 0) params.grid_points = opt.grid_points;
    params.dt = opt.dt;
    const long L = opt.horizon > 0 ? opt.horizon : 10000;
    opinf::BenchmarkWorkspace ws = opinf::make_heat_workspace(params, opt.n, L, opt.seed);

    json meta;
    meta["benchmark"] = "heat";
    meta["layout_version"] = 1;
    meta["grid_points"] = params.grid_points;
    meta["dt"] = params.dt;
    meta["conductivity"] = params.conductivity;
    meta["heat_capacity"] = params.heat_capacity;
    meta["density"] = params.density;
    meta["exchange"] = params.exchange;
    meta["N"] = ws.sys.state_dim();
    meta["p"] = ws.sys.input_dim();
    meta["n"] = opt.n;
    meta["ell"] = 1;
    meta["L"] = L;
    meta["M"] = ws.dictionary.width();
    meta["seed"] = opt.seed;
    return Workspace{std::move(ws), std::move(meta)};
}

Workspace build_lv_workspace(const Options &opt) {
    opinf::LotkaVolterraParams params;
    if (opt.grid_points > 0) params.grid_points = opt.grid_points;
    params.dt = opt.dt;
    const long steps_per_traj = opt.horizon > 0 ? opt.horizon : 5000;
    const int trajectories = 6;
    opinf::BenchmarkWorkspace ws = opinf::make_lv_workspace(params, opt.n, steps_per_traj, trajectories, opt.seed);

    json meta;
    meta["benchmark"] = "lotka-volterra";
    meta["layout_version"] = 1;
    meta["grid_points"] = params.grid_points;
    meta["dt"] = params.dt;
    meta["constants"] = {params.a1, params.a2, params.a3, params.a4, params.a5,
                         params.a6, params.a7, params.a8};
    meta["diffusion"] = {params.d1, params.d2, params.d3};
    meta["N"] = ws.sys.state_dim();
    meta["p"] = 0;
    meta["n"] = opt.n;
    meta["ell"] = 2;
    meta["L"] = ws.dictionary.size();
    meta["M"] = ws.dictionary.width();
    meta["horizon"] = steps_per_traj;
    meta["trajectories"] = trajectories;
    meta["seed"] = opt.seed;
    return Workspace{std::move(ws), std::move(meta)};
}

opinf::PolynomialSystem system_from_meta(const json &meta) {
    const std::string name = meta.at("benchmark").get<std::string>();
    if (name == "heat") {
        opinf::HeatParams params;
        params.grid_points = meta.at("grid_points").get<int>();
        params.dt = meta.at("dt").get<double>();
        params.conductivity = meta.at("conductivity").get<double>();
        params.heat_capacity = meta.at("heat_capacity").get<double>();
        params.density = meta.at("density").get<double>();
        params.exchange = meta.at("exchange").get<double>();
        return opinf::make_heat_benchmark(params);
    }
    if (name == "lotka-volterra") {
        opinf::LotkaVolterraParams params;
        params.grid_points = meta.at("grid_points").get<int>();
        params.dt = meta.at("dt").get<double>();
        const auto &a = meta.at("constants");
        params.a1 = a[0];
        params.a2 = a[1];
        params.a3 = a[2];
        params.a4 = a[3];
        params.a5 = a[4];
        params.a6 = a[5];
        params.a7 = a[6];
        params.a8 = a[7];
        const auto &d = meta.at("diffusion");
        params.d1 = d[0];
        params.d2 = d[1];
        params.d3 = d[2];
        return opinf::make_lotka_volterra_benchmark(params);
    }
    throw opinf::PreconditionError("unknown benchmark '" + name + "' in metadata");
}

opinf::LotkaVolterraParams lv_params_from_meta(const json &meta) {
    opinf::LotkaVolterraParams params;
    params.grid_points = meta.at("grid_points").get<int>();
    params.dt = meta.at("dt").get<double>();
    const auto &a = meta.at("constants");
    params.a1 = a[0];
    params.a2 = a[1];
    params.a3 = a[2];
    params.a4 = a[3];
    params.a5 = a[4];
    params.a6 = a[5];
    params.a7 = a[6];
    params.a8 = a[7];
    const auto &d = meta.at("diffusion");
    params.d1 = d[0];
    params.d2 = d[1];
    params.d3 = d[2];
    return params;
}

opinf::Dictionary load_dictionary(const fs::path &dir, const json &meta) {
    opinf::Dictionary dict;
    dict.rows = opinf::read_matrix(dir / "dictionary.opif");
    dict.n = meta.at("n").get<int>();
    dict.p = meta.at("p").get<int>();
    dict.ell = meta.at("ell").get<int>();
    for (Eigen::Index i = 0; i < dict.rows.rows(); ++i) dict.provenance.push_back({0, i});
    return dict;
}

// ------------------------------------------------------------------
// Subcommands
// ------------------------------------------------------------------

int cmd_benchmark(const Options &opt) {
    if (opt.out.empty()) throw opinf::PreconditionError("--out directory is required");
    if (opt.benchmark != "heat" && opt.benchmark != "lotka-volterra")
        throw opinf::PreconditionError("unknown benchmark '" + opt.benchmark + "' (choose heat or lotka-volterra)");
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    Workspace built = opt.benchmark == "heat" ? build_heat_workspace(opt) : build_lv_workspace(opt);
    const opinf::BenchmarkWorkspace &ws = built.ws;

    for (int j = 1; j <= ws.sys.order(); ++j)
        opinf::write_matrix(dir / ("A_" + std::to_string(j) + ".opif"), Eigen::MatrixXd(ws.sys.op(j)));
    if (ws.sys.input_dim() > 0) opinf::write_matrix(dir / "B.opif", ws.sys.input_map());
    opinf::write_matrix(dir / "basis_states.opif", ws.basis_states);
    if (ws.basis_inputs.size() > 0) opinf::write_matrix(dir / "basis_inputs.opif", ws.basis_inputs);
    opinf::write_matrix(dir / "pod_V.opif", ws.basis.V);
    opinf::write_matrix(dir / "pod_singular_values.opif", ws.basis.singular_values);
    opinf::write_matrix(dir / "dictionary.opif", ws.dictionary.rows);
    opinf::atomic_write_file(dir / "dictionary_provenance.csv", [&](std::ostream &out) {
        out << "row,trajectory,time_index\n";
        for (std::size_t i = 0; i < ws.dictionary.provenance.size(); ++i)
            out << i << ',' << ws.dictionary.provenance[i].trajectory << ','
                << ws.dictionary.provenance[i].time_index << '\n';
    });

    const opinf::InferredOperators intrusive = opinf::intrusive_operators(ws.sys, ws.basis.V);
    for (int j = 1; j <= ws.sys.order(); ++j)
        opinf::write_matrix(dir / ("intrusive_A_" + std::to_string(j) + ".opif"),
                            intrusive.A_hat[static_cast<std::size_t>(j - 1)]);
    if (intrusive.p > 0) opinf::write_matrix(dir / "intrusive_B.opif", intrusive.B_hat);

    write_json(dir / "meta.json", built.meta);
    std::cout << "benchmark workspace written to " << dir.string() << " (N = " << ws.sys.state_dim()
              << ", L = " << ws.dictionary.size() << ", M = " << ws.dictionary.width() << ")\n";
    return 0;
}

int cmd_select(const Options &opt) {
    if (opt.dir.empty()) throw opinf::PreconditionError("benchmark directory argument is required");
    if (opt.out.empty()) throw opinf::PreconditionError("--out file is required");
    const fs::path dir(opt.dir);
    const json meta = read_json(dir / "meta.json");
    const opinf::Dictionary dict = load_dictionary(dir, meta);
    const long K = opt.K > 0 ? opt.K : dict.width();

    opinf::SelectionPlan plan;
    if (opt.method == "active") {
        plan = opinf::qdeim_init(dict);
        plan = opinf::greedy_oversample(dict, plan, K);
    } else if (opt.method == "equidistant") {
        plan = opinf::equidistant_selection(dict.size(), K);
        plan.s_min_history.push_back(opinf::s_min(opinf::select_rows(dict, plan).D));
    } else {
        throw opinf::PreconditionError("unknown method '" + opt.method + "' (choose active or equidistant)");
    }
    opinf::write_selection_csv(opt.out, plan);
    std::cout << "selected " << plan.indices.size() << " rows with s_min = " << plan.s_min_history.back() << "\n";
    return 0;
}

int cmd_infer(const Options &opt) {
    if (opt.dir.empty()) throw opinf::PreconditionError("benchmark directory argument is required");
    if (opt.selection.empty()) throw opinf::PreconditionError("--selection file is required");
    if (opt.out.empty()) throw opinf::PreconditionError("--out directory is required");
    const fs::path dir(opt.dir);
    const json meta = read_json(dir / "meta.json");
    const opinf::PolynomialSystem sys = system_from_meta(meta);
    const Eigen::MatrixXd V = opinf::read_matrix(dir / "pod_V.opif");
    const opinf::Dictionary dict = load_dictionary(dir, meta);
    const opinf::SelectionPlan plan = opinf::read_selection_csv(opt.selection);

    const Eigen::MatrixXd Xtrain = dict.states_of(plan.indices);
    const Eigen::MatrixXd Utrain = dict.inputs_of(plan.indices);
    const Eigen::MatrixXd Z =
        opinf::reproject_noisy(sys, V, Xtrain, Utrain, opinf::NoiseModel{opt.sigma, opinf::Rng::derive(opt.seed, 0)});
    const opinf::DataMatrix data = opinf::assemble_data_matrix(Xtrain, Utrain, dict.ell);
    const opinf::InferredOperators ops = opinf::infer_operators(data, Z);

    const fs::path out(opt.out);
    fs::create_directories(out);
    for (int j = 1; j <= ops.ell; ++j)
        opinf::write_matrix(out / ("A_hat_" + std::to_string(j) + ".opif"),
                            ops.A_hat[static_cast<std::size_t>(j - 1)]);
    if (ops.p > 0) opinf::write_matrix(out / "B_hat.opif", ops.B_hat);
    json ops_meta;
    ops_meta["layout_version"] = 1;
    ops_meta["n"] = ops.n;
    ops_meta["p"] = ops.p;
    ops_meta["ell"] = ops.ell;
    ops_meta["sigma"] = opt.sigma;
    ops_meta["seed"] = opt.seed;
    ops_meta["s_min"] = ops.s_min_of_D;
    ops_meta["K"] = plan.indices.size();
    write_json(out / "operators_meta.json", ops_meta);
    std::cout << "inferred operators written to " << out.string() << " (s_min = " << ops.s_min_of_D << ")\n";
    return 0;
}

int cmd_evaluate(const Options &opt) {
    if (opt.dir.empty()) throw opinf::PreconditionError("benchmark directory argument is required");
    if (opt.selection.empty()) throw opinf::PreconditionError("--selection file is required");
    if (opt.out.empty()) throw opinf::PreconditionError("--out directory is required");
    const fs::path dir(opt.dir);
    const json meta = read_json(dir / "meta.json");
    const opinf::PolynomialSystem sys = system_from_meta(meta);
    const Eigen::MatrixXd V = opinf::read_matrix(dir / "pod_V.opif");
    const opinf::Dictionary dict = load_dictionary(dir, meta);
    const opinf::SelectionPlan plan = opinf::read_selection_csv(opt.selection);
    const std::vector<double> sigmas = parse_sigma_grid(opt.sigma_grid);
    const long steps = opt.steps;
    const int threads = thread_count();

    Eigen::VectorXd test_x0;
    Eigen::MatrixXd test_inputs;
    if (meta.at("benchmark") == "heat") {
        test_x0 = Eigen::VectorXd::Constant(sys.state_dim(), 500.0);
        test_inputs = opinf::heat_test_inputs(steps, meta.at("dt").get<double>(), static_cast<int>(sys.input_dim()));
    } else {
        test_x0 = opinf::lv_test_initial_state(lv_params_from_meta(meta));
        test_inputs = Eigen::MatrixXd(0, steps);
    }

    const Eigen::MatrixXd Xtrain = dict.states_of(plan.indices);
    const Eigen::MatrixXd Utrain = dict.inputs_of(plan.indices);

    const fs::path out(opt.out);
    fs::create_directories(out);

    json summary;
    summary["sigma_grid"] = sigmas;
    summary["replicates"] = opt.replicates;
    summary["steps"] = steps;
    summary["seed"] = opt.seed;
    json unstable = json::object();
    std::vector<opinf::EvalReport> reports;
    bool dominated = false;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const opinf::EvalReport report =
            opinf::mc_state_errors(sys, V, Xtrain, Utrain, test_x0, test_inputs, steps, sigmas[i], opt.replicates,
                                   opinf::Rng::derive(opt.seed, 1000 + i), threads);
        opinf::write_eval_report_csv(out / ("eval_" + std::to_string(i) + ".csv"), report);
        unstable[std::to_string(sigmas[i])] = report.replicates_unstable;
        if (report.replicates_used * 10 < opt.replicates) dominated = true;
        reports.push_back(report);
    }
    summary["unstable"] = unstable;
    summary["s_min"] = reports.front().s_min;

    // log-log slopes over the three smallest sigmas (or all, if fewer)
    std::vector<std::size_t> order(sigmas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigmas[a] < sigmas[b]; });
    const std::size_t fit_count = std::min<std::size_t>(3, order.size());
    json slopes = json::object();
    for (const long step : {std::min<long>(10, steps), std::min<long>(20, steps)}) {
        std::vector<double> nsr, mse, bias;
        for (std::size_t i = 0; i < fit_count; ++i) {
            const opinf::EvalReport &r = reports[order[i]];
            const double m = r.mse[static_cast<std::size_t>(step - 1)];
            const double b = r.bias[static_cast<std::size_t>(step - 1)];
            if (std::isfinite(m) && m > 0.0 && std::isfinite(b) && b > 0.0) {
                nsr.push_back(r.noise_to_signal);
                mse.push_back(m);
                bias.push_back(b);
            }
        }
        if (nsr.size() >= 2) {
            slopes["mse_step" + std::to_string(step)] = opinf::loglog_slope(nsr, mse);
            slopes["bias_step" + std::to_string(step)] = opinf::loglog_slope(nsr, bias);
        }
    }
    summary["slopes"] = slopes;

    // equidistant baseline at the same K, evaluated at the middle sigma
    {
        const double mid_sigma = sigmas[order[order.size() / 2]];
        const opinf::SelectionPlan equi =
            opinf::equidistant_selection(dict.size(), static_cast<Eigen::Index>(plan.indices.size()));
        const Eigen::MatrixXd Xe = dict.states_of(equi.indices);
        const Eigen::MatrixXd Ue = dict.inputs_of(equi.indices);
        json comparison;
        comparison["sigma"] = mid_sigma;
        try {
            const opinf::EvalReport equi_report =
                opinf::mc_state_errors(sys, V, Xe, Ue, test_x0, test_inputs, steps, mid_sigma, opt.replicates,
                                       opinf::Rng::derive(opt.seed, 2000), threads);
            opinf::write_eval_report_csv(out / "eval_equidistant.csv", equi_report);
            comparison["equidistant_s_min"] = equi_report.s_min;
            comparison["equidistant_unstable"] = equi_report.replicates_unstable;
            const long probe = std::min<long>(20, steps);
            comparison["equidistant_mse"] = equi_report.mse[static_cast<std::size_t>(probe - 1)];
            for (const auto &r : reports) {
                if (r.sigma == mid_sigma) comparison["selected_mse"] = r.mse[static_cast<std::size_t>(probe - 1)];
            }
        } catch (const opinf::RankError &e) {
            comparison["equidistant_error"] = e.what();
        }
        summary["comparison"] = comparison;
    }

    write_json(out / "summary.json", summary);
    std::cout << "evaluation written to " << out.string() << "\n";
    if (dominated) {
        std::cerr << "warning: fewer than 10% usable replicates for at least one sigma\n";
        return kExitUnstable;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    Options opt;
    // Config file values act as defaults; explicit flags win.
    for (int i = 1; i < argc - 1; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                apply_config(opt, argv[i + 1]);
            } catch (const std::exception &e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitValidation;
            }
        }
    }

    CLI::App app{"operator inference with active data selection"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--seed", opt.seed, "master seed; all randomness derives from it");
        cmd->add_option("--out", opt.out, "output file or directory");
        cmd->add_option("--config", opt.config, "JSON config with flat keys mirroring the flags");
    };

    CLI::App *bench = app.add_subcommand("benchmark", "generate a benchmark workspace");
    bench->add_option("--benchmark", opt.benchmark, "heat | lotka-volterra");
    bench->add_option("--grid-points", opt.grid_points, "spatial resolution (0 = benchmark default)");
    bench->add_option("--dt", opt.dt, "time step");
    bench->add_option("--n", opt.n, "reduced dimension");
    bench->add_option("--ell", opt.ell, "polynomial order (0 = benchmark default)");
    bench->add_option("--horizon", opt.horizon, "basis trajectory length (0 = benchmark default)");
    add_common(bench);

    CLI::App *select = app.add_subcommand("select", "select dictionary rows");
    select->add_option("dir", opt.dir, "benchmark workspace directory")->required();
    select->add_option("--method", opt.method, "active | equidistant");
    select->add_option("--K", opt.K, "rows to select (0 = M)");
    add_common(select);

    CLI::App *infer = app.add_subcommand("infer", "re-project selected rows with noise and solve");
    infer->add_option("dir", opt.dir, "benchmark workspace directory")->required();
    infer->add_option("--selection", opt.selection, "selection CSV")->required();
    infer->add_option("--sigma", opt.sigma, "noise standard deviation");
    add_common(infer);

    CLI::App *evaluate = app.add_subcommand("evaluate", "Monte Carlo bias/MSE against the intrusive model");
    evaluate->add_option("dir", opt.dir, "benchmark workspace directory")->required();
    evaluate->add_option("--selection", opt.selection, "selection CSV")->required();
    evaluate->add_option("--sigma-grid", opt.sigma_grid, "comma-separated sigma values");
    evaluate->add_option("--replicates", opt.replicates, "Monte Carlo replicates per sigma");
    evaluate->add_option("--steps", opt.steps, "prediction horizon");
    add_common(evaluate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) return cmd_benchmark(opt);
        if (select->parsed()) return cmd_select(opt);
        if (infer->parsed()) return cmd_infer(opt);
        if (evaluate->parsed()) return cmd_evaluate(opt);
    } catch (const opinf::PreconditionError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const opinf::RankError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRankDeficient;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
