#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gfl/experiment.hpp"

using namespace gfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gfl_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GFL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_chain_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.source.kind = InstanceSource::Kind::Chain;
    cfg.source.chain.seed = 3;
    cfg.rho_grid = log_grid(0.1, 10, 5);
    cfg.lambdas = {1.0};
    cfg.iters = 300;
    cfg.out = out;
    cfg.timing = false;
    cfg.workers = 2;
    return cfg;
}

}  // namespace

TEST_CASE("log grids") {
    const auto g = default_rho_grid();
    REQUIRE(g.size() == 16);
    CHECK(g.front() == doctest::Approx(1e-2));
    CHECK(g.back() == doctest::Approx(1e2));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e4, 1.0 / 15)));
    CHECK(log_grid(3, 3, 1) == std::vector<double>{3});
    CHECK_THROWS_AS(log_grid(0, 1, 4), ConfigError);
}

TEST_CASE("key/value config parsing") {
    const auto kv = parse_key_values("# sweep\ninstance = grid\nrows=8 \ncols = 8\nradius = 2 # small\nlambda = 1, 5\n");
    CHECK(kv.at("instance") == "grid");
    CHECK(kv.at("rows") == "8");
    CHECK(kv.at("radius") == "2");
    ExperimentConfig cfg;
    apply_settings(cfg, kv);
    CHECK(cfg.source.kind == InstanceSource::Kind::Grid);
    CHECK(cfg.source.grid.rows == 8);
    CHECK(cfg.lambdas == std::vector<double>{1, 5});
    CHECK_THROWS_AS(parse_key_values("colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigError);
    CHECK_THROWS_AS(apply_settings(cfg, {{"iters", "-3"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(cfg, {{"partition", "random"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(cfg, {{"rho", "1"}, {"rho_min", "0.1"}}), ConfigError);
    apply_settings(cfg, {{"rho_min", "0.1"}, {"rho_max", "10"}, {"rho_count", "3"}});
    CHECK(cfg.rho_grid.size() == 3);
    CHECK(cfg.rho_grid[1] == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = small_chain_config("unused");
    CHECK_NOTHROW(cfg.validate());
    cfg.solvers.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_chain_config("unused");
    cfg.rho_grid.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_chain_config("unused");
    cfg.iters = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_chain_config("unused");
    cfg.source.partition = PartitionKind::Grid;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("bench with budget 1 records one iteration per cell") {
    ExperimentConfig cfg = small_chain_config(scratch("budget1"));
    cfg.iters = 1;
    const BenchResult r = run_bench(cfg);
    CHECK(r.cells.size() == 10);
    for (const auto& c : r.cells) CHECK(c.trace.size() == 1);
}

TEST_CASE("bench output round-trips and is reproducible") {
    const fs::path a = scratch("bench_a"), b = scratch("bench_b");
    ExperimentConfig cfg = small_chain_config(a);
    const BenchResult r = cmd_bench(cfg);
    cfg.out = b;
    cfg.workers = 1;
    cmd_bench(cfg);
    Index files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files == 10 + 2);

    const auto rows = read_summary_csv(a / "summary.csv");
    REQUIRE(rows.size() == r.summary.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].solver == r.summary[i].solver);
        CHECK(rows[i].best_rho == r.summary[i].best_rho);
        CHECK(rows[i].iters_to == r.summary[i].iters_to);
        CHECK(rows[i].final_error == r.summary[i].final_error);
        CHECK(rows[i].final_ops == r.summary[i].final_ops);
    }
    for (const auto& c : r.cells) {
        const auto back = read_trace_csv(a / cell_file_name(c));
        REQUIRE(back.size() == c.trace.size());
        for (std::size_t k = 0; k < back.size(); ++k) CHECK(back.records[k] == c.trace.records[k]);
    }
}

TEST_CASE("bench errors are nonnegative against the reference") {
    const BenchResult r = run_bench(small_chain_config(scratch("ref")));
    const double ref = r.reference_objective.begin()->second;
    for (const auto& c : r.cells) {
        CHECK(c.trace.reference_objective == ref);
        for (const auto& rec : c.trace.records) CHECK(rec.error >= 0.0);
    }
}

TEST_CASE("summary picks the fastest rho") {
    ExperimentConfig cfg;
    auto make = [](double rho, std::vector<double> errs) {
        CellResult c{SolverKind::Network, 1.0, rho, {}};
        for (std::size_t k = 0; k < errs.size(); ++k) {
            TraceRecord r;
            r.iter = k + 1;
            r.error = errs[k];
            c.trace.records.push_back(r);
        }
        return c;
    };
    const CellResult slow = make(0.1, {1, 1e-3, 1e-5, 1e-7}), fast = make(1.0, {1, 1e-5, 1e-5, 2e-6}),
                     never = make(10.0, {1, 1, 1, 1e-12});
    const SummaryRow row = summarize({&slow, &fast, &never}, cfg);
    CHECK(row.best_rho == 1.0);
    CHECK(row.iters_to[0] == Index{2});
    CHECK(row.iters_to[1] == Index{2});
    CHECK_FALSE(row.iters_to[2].has_value());
    // ties on the selection threshold go to the smaller final error
    const CellResult tie = make(2.0, {1, 1e-5, 1e-5, 1e-9});
    CHECK(summarize({&fast, &tie}, cfg).best_rho == 2.0);
}

TEST_CASE("rate table round-trips") {
    const fs::path dir = scratch("rate_rt");
    const std::vector<RateRow> rows{{0.5, 0.9, 0.95, 0.91, std::nan("")}, {2.0, 0.7, 0.8, std::nan(""), 0.81}};
    write_rate_csv(dir / "rate.csv", rows);
    const auto back = read_rate_csv(dir / "rate.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].rho == 0.5);
    CHECK(back[0].c_empirical_decomposed == 0.91);
    CHECK(std::isnan(back[0].c_empirical_network));
    CHECK(std::isnan(back[1].c_empirical_decomposed));
    CHECK(back[1].c_network == 0.8);
}

TEST_CASE("rate analysis on setting 1") {
    RateConfig cfg;
    cfg.experiment.source.kind = InstanceSource::Kind::JumpChain;
    cfg.experiment.source.chain.n = 100;
    cfg.experiment.source.chain.seed = 1;
    cfg.experiment.source.jumps = rate_setting_jumps(1);
    cfg.experiment.rho_grid = log_grid(0.1, 10, 4);
    cfg.experiment.out = scratch("rate");
    cfg.empirical_iters = 1500;
    const RateAnalysis r = cmd_rate(cfg);
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) CHECK(row.c_decomposed <= row.c_network + 1e-9);
    CHECK(std::abs(r.saturated_c - 1.0) < 1e-5);
    CHECK(fs::exists(cfg.experiment.out / "rate.csv"));
    CHECK(fs::exists(cfg.experiment.out / "rate_sanity.csv"));
    CHECK(read_rate_csv(cfg.experiment.out / "rate.csv").size() == 4);
}

TEST_CASE("gen writes reproducible files") {
    const fs::path a = scratch("gen_a"), b = scratch("gen_b");
    CHECK(run_cli("gen chain --n 100 --sigma 1 --seed 7 --out " + a.string()) == 0);
    CHECK(run_cli("gen chain --n 100 --sigma 1 --seed 7 --out " + b.string()) == 0);
    CHECK(slurp(a / "graph.csv") == slurp(b / "graph.csv"));
    CHECK(slurp(a / "obs.csv") == slurp(b / "obs.csv"));
    const VertexField y = load_observations(a / "obs.csv");
    CHECK(y.cols() == 100);
    CHECK(y.rows() == 2);

    const fs::path g = scratch("gen_grid");
    CHECK(run_cli("gen grid --out " + g.string()) == 0);
    CHECK(load_observations(g / "obs.csv").cols() == 4096);
    const Graph gg = load_edge_list(g / "graph.csv");
    CHECK(load_partition(g / "partition.csv", gg).e0.size() == 2048);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("exit");
    CHECK(run_cli("gen chain --n 60 --out " + dir.string()) == 0);
    CHECK(run_cli("solve --graph " + (dir / "graph.csv").string() + " --obs " + (dir / "obs.csv").string() +
                  " --lambda 1 --rho 1 --iters 20 --no-timing --out " + (dir / "solve").string()) == 0);
    CHECK(read_trace_csv(dir / "solve" / "trace.csv").size() == 20);
    CHECK(load_observations(dir / "solve" / "solution.csv").cols() == 60);
    // config errors
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("bench --iters 0") == 2);
    CHECK(run_cli("bench --partition sideways") == 2);
    CHECK(run_cli("gen chain --n 10") == 2);
    CHECK(run_cli("solve --solver simplex") == 2);
    CHECK(run_cli("bench --config " + (dir / "missing.cfg").string()) == 2);
    // runtime errors
    CHECK(run_cli("solve --graph " + (dir / "nope.csv").string() + " --obs " + (dir / "obs.csv").string()) == 1);
    std::ofstream(dir / "short.csv") << "1,2\n";
    CHECK(run_cli("solve --graph " + (dir / "graph.csv").string() + " --obs " + (dir / "short.csv").string()) == 1);
}

TEST_CASE("flags override the config file") {
    const fs::path dir = scratch("override");
    std::ofstream(dir / "sweep.cfg") << "instance = chain\nn = 50\niters = 500\nrho = 0.5, 1\nlambda = 1\nout = "
                                     << (dir / "from_config").string() << "\n";
    CHECK(run_cli("bench --config " + (dir / "sweep.cfg").string() + " --iters 7 --no-timing --out " +
                  (dir / "from_flags").string()) == 0);
    CHECK_FALSE(fs::exists(dir / "from_config"));
    const auto rows = read_summary_csv(dir / "from_flags" / "summary.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].iterations == 7);
}

TEST_CASE("repeated bench runs are byte-identical without timing") {
    const fs::path a = scratch("cli_a"), b = scratch("cli_b");
    const std::string common = " --instance chain --seed 2 --rho 0.5,2 --iters 50 --no-timing --out ";
    CHECK(run_cli("bench" + common + a.string()) == 0);
    CHECK(run_cli("bench" + common + b.string()) == 0);
    for (const auto& entry : fs::directory_iterator(a)) CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
}
