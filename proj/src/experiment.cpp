#include "gfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace gfl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string fmt_num(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all threads join.
template <typename Fn>
void parallel_for(Index count, Index workers, Fn&& fn) {
    if (workers == 0) workers = std::max<Index>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const Index i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

void fill_errors(ConvergenceTrace& trace, double ref) {
    trace.reference_objective = ref;
    for (auto& r : trace.records) r.error = r.objective - ref;
}

const std::set<std::string> kKnownKeys = {
    "instance", "n",      "sigma",   "seed",      "rows",      "cols",    "radius",  "jumps",
    "p",        "graph",  "obs",     "partition", "partition_file", "solvers", "rho",     "rho_min",
    "rho_max",  "rho_count", "lambda", "iters",   "out",       "workers", "timing",  "reference_factor",
    "setting",  "rho_per_lambda",
};

}  // namespace

PartitionKind parse_partition_kind(const std::string& s) {
    if (s == "greedy") return PartitionKind::Greedy;
    if (s == "grid") return PartitionKind::Grid;
    if (s == "none") return PartitionKind::None;
    if (s == "file") return PartitionKind::File;
    throw ConfigError("partition must be one of greedy, grid, none, file (got '" + s + "')");
}

std::string to_string(PartitionKind k) {
    switch (k) {
        case PartitionKind::Greedy: return "greedy";
        case PartitionKind::Grid: return "grid";
        case PartitionKind::None: return "none";
        case PartitionKind::File: return "file";
    }
    return "?";
}

std::vector<double> log_grid(double lo, double hi, Index count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ConfigError("log grid needs 0 < lo <= hi and count >= 1");
    if (count == 1) return {lo};
    std::vector<double> g(count);
    const double a = std::log10(lo), b = std::log10(hi);
    for (Index i = 0; i < count; ++i)
        g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

std::vector<double> default_rho_grid() { return log_grid(1e-2, 1e2, 16); }

void ExperimentConfig::validate() const {
    if (solvers.empty()) throw ConfigError("solver list is empty");
    if (rho_grid.empty()) throw ConfigError("rho grid is empty");
    for (double r : rho_grid)
        if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("rho values must be positive and finite");
    if (lambdas.empty()) throw ConfigError("lambda list is empty");
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be nonnegative and finite");
    if (iters < 1) throw ConfigError("iteration budget must be at least 1");
    if (reference_factor < 1) throw ConfigError("reference_factor must be at least 1");
    if (source.kind == InstanceSource::Kind::Files && (source.graph_path.empty() || source.obs_path.empty()))
        throw ConfigError("file instances need both --graph and --obs");
    if (source.partition == PartitionKind::File && source.partition_path.empty())
        throw ConfigError("partition=file needs a partition file");
    if (source.partition == PartitionKind::Grid && source.kind != InstanceSource::Kind::Grid)
        throw ConfigError("partition=grid is only defined for grid instances");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = trim(line);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (!kKnownKeys.count(key)) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto& src = cfg.source;
    // instance first so later keys refine the chosen generator
    if (auto it = kv.find("instance"); it != kv.end()) {
        const auto& v = it->second;
        if (v == "chain") src.kind = InstanceSource::Kind::Chain;
        else if (v == "grid") src.kind = InstanceSource::Kind::Grid;
        else if (v == "files") src.kind = InstanceSource::Kind::Files;
        else if (v == "jumps") src.kind = InstanceSource::Kind::JumpChain;
        else throw ConfigError("instance must be chain, grid, files or jumps (got '" + v + "')");
    }
    std::optional<double> rho_min, rho_max;
    std::optional<Index> rho_count;
    for (const auto& [key, v] : kv) {
        if (!kKnownKeys.count(key)) throw ConfigError("unknown setting '" + key + "'");
        if (key == "instance") continue;
        if (key == "n") src.chain.n = to_uint(key, v);
        else if (key == "sigma") src.chain.noise_sigma = src.grid.noise_sigma = to_double(key, v);
        else if (key == "seed") cfg.seed = src.chain.seed = src.grid.seed = to_uint(key, v);
        else if (key == "rows") src.grid.rows = to_uint(key, v);
        else if (key == "cols") src.grid.cols = to_uint(key, v);
        else if (key == "radius") src.grid.radius = to_double(key, v);
        else if (key == "jumps") {
            src.jumps.clear();
            for (const auto& s : split_list(v)) src.jumps.push_back(to_uint(key, s));
        } else if (key == "setting") {
            try {
                src.jumps = rate_setting_jumps(static_cast<int>(to_uint(key, v)));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            src.kind = InstanceSource::Kind::JumpChain;
            src.chain.n = 100;
        } else if (key == "p") src.jump_p = to_uint(key, v);
        else if (key == "graph") src.graph_path = v;
        else if (key == "obs") src.obs_path = v;
        else if (key == "partition") src.partition = parse_partition_kind(v);
        else if (key == "partition_file") src.partition_path = v;
        else if (key == "solvers") {
            cfg.solvers.clear();
            for (const auto& s : split_list(v)) {
                try {
                    cfg.solvers.push_back(parse_solver_kind(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
        } else if (key == "rho") cfg.rho_grid = parse_doubles(key, v);
        else if (key == "rho_min") rho_min = to_double(key, v);
        else if (key == "rho_max") rho_max = to_double(key, v);
        else if (key == "rho_count") rho_count = to_uint(key, v);
        else if (key == "lambda") cfg.lambdas = parse_doubles(key, v);
        else if (key == "iters") cfg.iters = to_uint(key, v);
        else if (key == "out") cfg.out = v;
        else if (key == "workers") cfg.workers = to_uint(key, v);
        else if (key == "timing") cfg.timing = to_bool(key, v);
        else if (key == "reference_factor") cfg.reference_factor = to_uint(key, v);
        else if (key == "rho_per_lambda") cfg.rho_per_lambda = to_bool(key, v);
    }
    if (rho_min || rho_max || rho_count) {
        if (kv.count("rho")) throw ConfigError("give either rho or rho_min/rho_max/rho_count, not both");
        cfg.rho_grid = log_grid(rho_min.value_or(1e-2), rho_max.value_or(1e2), rho_count.value_or(16));
    }
}

std::pair<ProblemInstance, EdgePartition> build_instance(const InstanceSource& src, double lambda) {
    std::optional<ProblemInstance> inst;
    std::optional<EdgePartition> natural;
    switch (src.kind) {
        case InstanceSource::Kind::Chain: inst = gen_chain(src.chain, lambda); break;
        case InstanceSource::Kind::Grid: {
            auto [gi, gp] = gen_grid(src.grid, lambda);
            inst = std::move(gi);
            natural = std::move(gp);
            break;
        }
        case InstanceSource::Kind::JumpChain:
            inst = gen_jump_chain(src.chain.n, src.jump_p, src.jumps, lambda, src.chain.seed);
            break;
        case InstanceSource::Kind::Files: inst = load_instance(src.graph_path, src.obs_path, lambda); break;
    }
    EdgePartition part;
    switch (src.partition) {
        case PartitionKind::Greedy: part = greedy_matching(inst->graph); break;
        case PartitionKind::None: part = empty_partition(inst->graph); break;
        case PartitionKind::File: part = load_partition(src.partition_path, inst->graph); break;
        case PartitionKind::Grid:
            if (!natural) throw ConfigError("partition=grid is only defined for grid instances");
            part = std::move(*natural);
            break;
    }
    return {std::move(*inst), std::move(part)};
}

double reference_objective(const ProblemInstance& inst, const EdgePartition& part,
                           const std::vector<CellResult>& sweep, const ExperimentConfig& cfg) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<SolverKind, double>> runs;
    for (SolverKind kind : cfg.solvers) {
        const CellResult* pick = nullptr;
        for (const auto& c : sweep) {
            if (c.solver != kind) continue;
            best = std::min(best, c.trace.best_objective());
            if (!pick || c.trace.best_objective() < pick->trace.best_objective()) pick = &c;
        }
        runs.emplace_back(kind, pick ? pick->rho : cfg.rho_grid[cfg.rho_grid.size() / 2]);
    }
    std::vector<double> found(runs.size(), std::numeric_limits<double>::infinity());
    parallel_for(runs.size(), cfg.workers, [&](Index i) {
        SolveOptions o;
        o.max_iters = cfg.reference_factor * cfg.iters;
        o.early_stop = cfg.reference_early_stop;
        o.timing = false;
        found[i] = run_solver(runs[i].first, inst, part, runs[i].second, o).trace.best_objective();
    });
    for (double f : found) best = std::min(best, f);
    return best;
}

SummaryRow summarize(const std::vector<const CellResult*>& cells, const ExperimentConfig& cfg) {
    if (cells.empty()) throw std::invalid_argument("summarize: no cells");
    const auto inf = std::numeric_limits<double>::infinity();
    const CellResult* best = nullptr;
    double best_iters = inf, best_err = inf;
    for (const CellResult* c : cells) {
        const auto it = iterations_to_error(c->trace, cfg.selection_threshold);
        const double iters = it ? static_cast<double>(*it) : inf;
        const double err = c->trace.empty() ? inf : c->trace.back().error;
        if (!best || iters < best_iters || (iters == best_iters && err < best_err)) {
            best = c;
            best_iters = iters;
            best_err = err;
        }
    }
    SummaryRow row;
    row.lambda = best->lambda;
    row.solver = best->solver;
    row.best_rho = best->rho;
    for (double thr : cfg.thresholds) row.iters_to.push_back(iterations_to_error(best->trace, thr));
    row.final_error = best_err;
    row.final_ops = best->trace.empty() ? OpCounters{} : best->trace.back().ops;
    row.iterations = best->trace.size();
    return row;
}

BenchResult run_bench(const ExperimentConfig& cfg) {
    cfg.validate();
    BenchResult result;
    for (double lambda : cfg.lambdas) {
        auto [inst, part] = build_instance(cfg.source, lambda);
        const double scale = cfg.rho_per_lambda && lambda > 0.0 ? lambda : 1.0;
        std::vector<CellResult> cells;
        for (SolverKind kind : cfg.solvers)
            for (double rho : cfg.rho_grid) cells.push_back({kind, lambda, scale * rho, {}});
        parallel_for(cells.size(), cfg.workers, [&](Index i) {
            CellResult& c = cells[i];
            SolveOptions o;
            o.max_iters = cfg.iters;
            o.timing = cfg.timing;
            try {
                c.trace = run_solver(c.solver, inst, part, c.rho, o).trace;
            } catch (const std::exception& e) {
                throw std::runtime_error("cell solver=" + to_string(c.solver) + " lambda=" + fmt_num(lambda) +
                                         " rho=" + fmt_num(c.rho) + ": " + e.what());
            }
        });
        const double ref = reference_objective(inst, part, cells, cfg);
        result.reference_objective[lambda] = ref;
        for (auto& c : cells) fill_errors(c.trace, ref);
        for (SolverKind kind : cfg.solvers) {
            std::vector<const CellResult*> mine;
            for (const auto& c : cells)
                if (c.solver == kind) mine.push_back(&c);
            result.summary.push_back(summarize(mine, cfg));
        }
        for (auto& c : cells) result.cells.push_back(std::move(c));
    }
    return result;
}

std::string cell_file_name(const CellResult& c) {
    return "trace_" + to_string(c.solver) + "_lam" + fmt_num(c.lambda) + "_rho" + fmt_num(c.rho) + ".csv";
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                       const std::vector<double>& thresholds) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "lambda,solver,best_rho";
    for (double t : thresholds) os << ",iters_to_" << fmt_num(t);
    os << ",final_error,iterations,mults,adds,norms,comps\n";
    for (const auto& r : rows) {
        os << r.lambda << ',' << to_string(r.solver) << ',' << r.best_rho;
        for (const auto& it : r.iters_to) {
            os << ',';
            if (it) os << *it;
            else os << "NA";
        }
        os << ',' << r.final_error << ',' << r.iterations << ',' << r.final_ops.mults << ',' << r.final_ops.adds << ','
           << r.final_ops.norms << ',' << r.final_ops.comps << '\n';
    }
    write_atomic(path, os.str());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty summary file", 1);
    Index n_thr = 0;
    for (const auto& h : split_list(line))
        if (h.rfind("iters_to_", 0) == 0) ++n_thr;
    std::vector<SummaryRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 3 + n_thr + 6) throw ParseError(path.string() + ": wrong field count", line_no);
        try {
            SummaryRow r;
            std::size_t k = 0;
            r.lambda = to_double("lambda", f[k++]);
            r.solver = parse_solver_kind(f[k++]);
            r.best_rho = to_double("best_rho", f[k++]);
            for (Index t = 0; t < n_thr; ++t, ++k)
                r.iters_to.push_back(f[k] == "NA" ? std::nullopt : std::optional<Index>(to_uint("iters", f[k])));
            r.final_error = f[k] == "inf" ? std::numeric_limits<double>::infinity() : to_double("final_error", f[k]);
            ++k;
            r.iterations = to_uint("iterations", f[k++]);
            r.final_ops.mults = to_uint("mults", f[k++]);
            r.final_ops.adds = to_uint("adds", f[k++]);
            r.final_ops.norms = to_uint("norms", f[k++]);
            r.final_ops.comps = to_uint("comps", f[k++]);
            rows.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string() + ": " + e.what(), line_no);
        }
    }
    return rows;
}

void write_bench(const BenchResult& result, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
    for (const auto& c : result.cells) write_trace_csv(cfg.out / cell_file_name(c), c.trace);
    write_summary_csv(cfg.out / "summary.csv", result.summary, cfg.thresholds);
    std::ostringstream ref;
    ref << std::setprecision(17) << "lambda,reference_objective\n";
    for (const auto& [lam, f] : result.reference_objective) ref << lam << ',' << f << '\n';
    write_atomic(cfg.out / "reference.csv", ref.str());
}

double saturated_rate(const RateModel& base, double rho) {
    RateModel m = base;
    m.c1 = m.inf_cap * Eigen::MatrixXd::Identity(m.c1.rows(), m.c1.cols());
    m.c2 = m.inf_cap * Eigen::MatrixXd::Identity(m.c2.rows(), m.c2.cols());
    std::fill(m.active.begin(), m.active.end(), true);
    return RateEvaluator(m).c(rho);
}

RateAnalysis run_rate_analysis(const RateConfig& cfg) {
    const ExperimentConfig& ex = cfg.experiment;
    ex.validate();
    auto [inst, part] = build_instance(ex.source, ex.lambdas.front());
    const EdgePartition net = empty_partition(inst.graph);

    // x* from a long decomposed run; f* is the best objective of both solvers
    SolveOptions hp;
    hp.max_iters = cfg.reference_iters;
    hp.timing = false;
    const double rho_hp = 1.0;
    RateAnalysis out;
    SolveResult dec, nw;
    parallel_for(2, ex.workers, [&](Index i) {
        if (i == 0) dec = solve_decomposed(inst, part, rho_hp / 2.0, hp);
        else nw = solve_network(inst, rho_hp, hp);
    });
    out.xstar = dec.x;
    out.reference_objective = std::min(dec.trace.best_objective(), nw.trace.best_objective());

    const RateModel md = build_rate_model(inst, part, out.xstar, cfg.model);
    const RateModel mn = build_rate_model(inst, net, out.xstar, cfg.model);
    const RateEvaluator ed(md), en(mn);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    out.rows.resize(ex.rho_grid.size());
    parallel_for(ex.rho_grid.size(), ex.workers, [&](Index i) {
        const double rho = ex.rho_grid[i];
        RateRow& r = out.rows[i];
        r.rho = rho;
        r.c_decomposed = ed.c(rho);
        r.c_network = en.c(rho);
        r.c_empirical_decomposed = r.c_empirical_network = nan;
        if (!cfg.empirical) return;
        SolveOptions o;
        o.max_iters = cfg.empirical_iters;
        o.timing = false;
        o.reference_objective = out.reference_objective;
        try {
            r.c_empirical_decomposed = empirical_rate(solve_decomposed(inst, part, rho / 2.0, o).trace, cfg.tail_fraction);
        } catch (const RateError&) {
        }
        try {
            r.c_empirical_network = empirical_rate(solve_network(inst, rho, o).trace, cfg.tail_fraction);
        } catch (const RateError&) {
        }
    });
    out.saturated_c = saturated_rate(md, ex.rho_grid.front());
    return out;
}

void write_rate_csv(const std::filesystem::path& path, const std::vector<RateRow>& rows) {
    std::ostringstream os;
    os << std::setprecision(17) << "rho,c_decomposed,c_network,c_empirical_decomposed,c_empirical_network\n";
    for (const auto& r : rows)
        os << r.rho << ',' << r.c_decomposed << ',' << r.c_network << ',' << r.c_empirical_decomposed << ','
           << r.c_empirical_network << '\n';
    write_atomic(path, os.str());
}

std::vector<RateRow> read_rate_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (trim(line) != "rho,c_decomposed,c_network,c_empirical_decomposed,c_empirical_network")
        throw ParseError(path.string() + ": unexpected header", 1);
    auto num = [](const std::string& s) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return x;
    };
    std::vector<RateRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(trim(line));
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw ParseError(path.string() + ": expected 5 fields", line_no);
        try {
            rows.push_back({num(f[0]), num(f[1]), num(f[2]), num(f[3]), num(f[4])});
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string() + ": " + e.what(), line_no);
        }
    }
    return rows;
}

void write_rate_sanity_csv(const std::filesystem::path& path, double inf_cap, double rho, double c) {
    std::ostringstream os;
    os << std::setprecision(17) << "inf_cap,rho,c\n" << inf_cap << ',' << rho << ',' << c << '\n';
    write_atomic(path, os.str());
}

void cmd_gen(const InstanceSource& src, const std::filesystem::path& out) {
    if (src.kind == InstanceSource::Kind::Files) throw ConfigError("gen needs a generator, not input files");
    InstanceSource s = src;
    if (s.kind == InstanceSource::Kind::Grid && s.partition == PartitionKind::Greedy) s.partition = PartitionKind::Grid;
    auto [inst, part] = build_instance(s, 1.0);
    std::filesystem::create_directories(out);
    write_edge_list(out / "graph.csv", inst.graph);
    write_observations(out / "obs.csv", inst.y);
    if (s.kind == InstanceSource::Kind::Grid) write_partition(out / "partition.csv", part);
}

BenchResult cmd_bench(const ExperimentConfig& cfg) {
    BenchResult r = run_bench(cfg);
    write_bench(r, cfg);
    return r;
}

RateAnalysis cmd_rate(const RateConfig& cfg) {
    RateAnalysis r = run_rate_analysis(cfg);
    std::filesystem::create_directories(cfg.experiment.out);
    write_rate_csv(cfg.experiment.out / "rate.csv", r.rows);
    write_rate_sanity_csv(cfg.experiment.out / "rate_sanity.csv", cfg.model.inf_cap, cfg.experiment.rho_grid.front(),
                          r.saturated_c);
    return r;
}

}  // namespace gfl
