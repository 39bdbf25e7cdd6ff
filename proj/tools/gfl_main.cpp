// gfl: generate instances, solve, sweep rho, analyse local rates.
#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>

#include "gfl/experiment.hpp"

namespace {

using namespace gfl;

// Flags shared by solve/bench/rate. Every flag is kept as text and pushed
// through the same key/value path as the config file, so flags win simply by
// being applied last.
struct CommonFlags {
    std::string config;
    std::map<std::string, std::string> kv;
    bool no_timing = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--config", config, "flat key = value config file");
        auto opt = [&](const char* flag, const char* key, const char* help) {
            cmd->add_option_function<std::string>(flag, [this, key](const std::string& v) { kv[key] = v; }, help);
        };
        opt("--instance", "instance", "chain | grid | files | jumps");
        opt("--graph", "graph", "edge-list CSV");
        opt("--obs", "obs", "observation CSV, one row per vertex");
        opt("--lambda", "lambda", "penalty (comma list for bench)");
        opt("--rho", "rho", "rho value or comma list");
        opt("--rho-min", "rho_min", "log grid lower end");
        opt("--rho-max", "rho_max", "log grid upper end");
        opt("--rho-count", "rho_count", "log grid size");
        opt("--iters", "iters", "iteration budget");
        opt("--seed", "seed", "generator seed");
        opt("--out", "out", "output directory");
        opt("--partition", "partition", "greedy | grid | none | file");
        opt("--partition-file", "partition_file", "e0 edge indices, one per line");
        opt("--solvers", "solvers", "comma list of decomposed, network, reference");
        opt("--workers", "workers", "concurrent cells (0 = all cores)");
        opt("--n", "n", "chain length");
        opt("--sigma", "sigma", "noise standard deviation");
        opt("--rows", "rows", "grid rows");
        opt("--cols", "cols", "grid columns");
        opt("--setting", "setting", "jump-chain setting 1, 2 or 3");
        cmd->add_flag("--no-timing", no_timing, "write 0 in the elapsed column");
        cmd->add_flag_callback("--rho-per-lambda", [this] { kv["rho_per_lambda"] = "true"; },
                               "scale the rho grid by each lambda");
    }

    ExperimentConfig resolve(ExperimentConfig cfg) const {
        if (!config.empty()) apply_settings(cfg, load_key_values(config));
        std::map<std::string, std::string> flags = kv;
        if (!flags.count("instance") && (flags.count("graph") || flags.count("obs"))) flags["instance"] = "files";
        apply_settings(cfg, flags);
        if (no_timing) cfg.timing = false;
        if (cfg.rho_grid.empty()) cfg.rho_grid = default_rho_grid();
        return cfg;
    }
};

void print_summary(const BenchResult& r, const ExperimentConfig& cfg) {
    std::cout << std::setprecision(6);
    for (const auto& row : r.summary) {
        std::cout << "lambda=" << row.lambda << " solver=" << to_string(row.solver) << " best_rho=" << row.best_rho;
        for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
            std::cout << " iters_to_" << cfg.thresholds[i] << '=';
            if (row.iters_to[i]) std::cout << *row.iters_to[i];
            else std::cout << "NA";
        }
        std::cout << " final_error=" << row.final_error << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"graph-fused lasso solvers and experiments"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "write graph.csv / obs.csv for a synthetic instance");
    std::string gen_kind = "chain";
    InstanceSource gsrc;
    std::string gen_out = ".";
    int setting = 1;
    gen->add_option("kind", gen_kind, "chain | grid | jumps")->check(CLI::IsMember({"chain", "grid", "jumps"}));
    gen->add_option("--n", gsrc.chain.n, "chain length");
    gen->add_option("--sigma", gsrc.chain.noise_sigma, "noise standard deviation");
    gen->add_option("--seed", gsrc.chain.seed, "generator seed");
    gen->add_option("--rows", gsrc.grid.rows, "grid rows");
    gen->add_option("--cols", gsrc.grid.cols, "grid columns");
    gen->add_option("--radius", gsrc.grid.radius, "disk radius");
    gen->add_option("--setting", setting, "jump-chain setting")->check(CLI::Range(1, 3));
    gen->add_option("--out", gen_out, "output directory");

    // solve
    auto* solve = app.add_subcommand("solve", "run one solver at one rho");
    CommonFlags solve_flags;
    solve_flags.add(solve);
    std::string solver_name = "decomposed";
    bool early_stop = false;
    solve->add_option("--solver", solver_name, "decomposed | network | reference");
    solve->add_flag("--early-stop", early_stop, "stop on the residual tolerance");

    // bench
    auto* bench = app.add_subcommand("bench", "sweep (solver, rho, lambda) cells and summarise");
    CommonFlags bench_flags;
    bench_flags.add(bench);

    // rate
    auto* rate = app.add_subcommand("rate", "predicted and empirical local rates over a rho grid");
    CommonFlags rate_flags;
    rate_flags.add(rate);
    RateConfig rcfg;
    std::string kink = "locked";
    bool no_empirical = false;
    rate->add_option("--inf-cap", rcfg.model.inf_cap, "stiffness standing in for fused pairs");
    rate->add_option("--tie-tol", rcfg.model.tie_tol, "fused-pair tolerance (<= 0: automatic)");
    rate->add_option("--kink", kink, "locked | zero")->check(CLI::IsMember({"locked", "zero"}));
    rate->add_option("--empirical-iters", rcfg.empirical_iters, "iterations per empirical run");
    rate->add_option("--reference-iters", rcfg.reference_iters, "iterations of the x* solve");
    rate->add_flag("--no-empirical", no_empirical, "skip the empirical columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        if (gen_kind == "chain") gsrc.kind = InstanceSource::Kind::Chain;
        else if (gen_kind == "grid") gsrc.kind = InstanceSource::Kind::Grid;
        else {
            gsrc.kind = InstanceSource::Kind::JumpChain;
            gsrc.jumps = rate_setting_jumps(setting);
            if (gen->count("--n") == 0) gsrc.chain.n = 100;
        }
        gsrc.grid.noise_sigma = gsrc.chain.noise_sigma;
        gsrc.grid.seed = gsrc.chain.seed;
        if (gsrc.kind == InstanceSource::Kind::Chain && gsrc.chain.n < 45)
            throw ConfigError("chain length must be at least 45");
        if (gsrc.kind == InstanceSource::Kind::Grid &&
            (gsrc.grid.rows == 0 || gsrc.grid.cols == 0 ||
             !(gsrc.grid.radius < 0.5 * static_cast<double>(std::min(gsrc.grid.rows, gsrc.grid.cols)))))
            throw ConfigError("grid needs rows, cols >= 1 and radius < min(rows, cols) / 2");
        if (!(gsrc.chain.noise_sigma >= 0.0)) throw ConfigError("sigma must be nonnegative");
        cmd_gen(gsrc, gen_out);
        return 0;
    }

    if (solve->parsed()) {
        ExperimentConfig cfg = solve_flags.resolve({});
        cfg.validate();
        SolverKind kind;
        try {
            kind = parse_solver_kind(solver_name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (cfg.rho_grid.size() != 1 && solve_flags.kv.count("rho") == 0) cfg.rho_grid = {1.0};
        if (cfg.rho_grid.size() != 1) throw ConfigError("solve takes a single --rho");
        if (cfg.lambdas.size() != 1) throw ConfigError("solve takes a single --lambda");
        auto [inst, part] = build_instance(cfg.source, cfg.lambdas.front());
        SolveOptions o;
        o.max_iters = cfg.iters;
        o.timing = cfg.timing;
        o.early_stop = early_stop;
        const SolveResult r = run_solver(kind, inst, part, cfg.rho_grid.front(), o);
        std::filesystem::create_directories(cfg.out);
        write_trace_csv(cfg.out / "trace.csv", r.trace);
        write_observations(cfg.out / "solution.csv", r.x);
        std::cout << std::setprecision(15) << "solver=" << to_string(kind) << " iterations=" << r.trace.size()
                  << " objective=" << (r.trace.empty() ? objective(inst, inst.y) : r.trace.back().objective)
                  << " e0=" << part.e0.size() << '\n';
        return 0;
    }

    if (bench->parsed()) {
        const ExperimentConfig cfg = bench_flags.resolve({});
        const BenchResult r = cmd_bench(cfg);
        print_summary(r, cfg);
        return 0;
    }

    if (rate->parsed()) {
        ExperimentConfig base;
        base.source.kind = InstanceSource::Kind::JumpChain;
        base.source.chain.n = 100;
        base.source.chain.seed = 1;
        base.source.jumps = rate_setting_jumps(1);
        rcfg.experiment = rate_flags.resolve(base);
        rcfg.model.kink = kink == "zero" ? KinkModel::ZeroResolvent : KinkModel::Locked;
        rcfg.empirical = !no_empirical;
        const RateAnalysis r = cmd_rate(rcfg);
        std::cout << std::setprecision(6) << "f*=" << std::setprecision(15) << r.reference_objective << '\n';
        for (const auto& row : r.rows)
            std::cout << std::setprecision(6) << "rho=" << row.rho << " c_decomposed=" << row.c_decomposed
                      << " c_network=" << row.c_network << " empirical_decomposed=" << row.c_empirical_decomposed
                      << " empirical_network=" << row.c_empirical_network << '\n';
        std::cout << "saturated c=" << r.saturated_c << '\n';
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
