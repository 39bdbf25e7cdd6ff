#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfl/admm.hpp"
#include "gfl/data.hpp"
#include "gfl/rate.hpp"

namespace gfl {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class PartitionKind { Greedy, Grid, None, File };

PartitionKind parse_partition_kind(const std::string& s);
std::string to_string(PartitionKind k);

/// Where an experiment's instance comes from.
struct InstanceSource {
    enum class Kind { Chain, Grid, Files, JumpChain } kind = Kind::Chain;
    ChainSpec chain;
    GridSpec grid;
    /// JumpChain: 1-based positions after which the signal jumps.
    std::vector<Index> jumps;
    Index jump_p = 2;
    std::filesystem::path graph_path;
    std::filesystem::path obs_path;
    PartitionKind partition = PartitionKind::Greedy;
    std::filesystem::path partition_path;
};

struct ExperimentConfig {
    InstanceSource source;
    std::vector<SolverKind> solvers{SolverKind::Decomposed, SolverKind::Network};
    std::vector<double> rho_grid;
    std::vector<double> lambdas{1.0};
    Index iters = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    Index workers = 0;  ///< 0 -> hardware concurrency
    bool timing = true;
    /// Reference optimum budget as a multiple of `iters`.
    Index reference_factor = 10;
    /// Stop the reference runs early once residuals fall below tolerance.
    bool reference_early_stop = false;
    /// Multiply the rho grid by lambda for each lambda (lambda > 0). The
    /// shrinkage threshold is lambda / rho, so this keeps the useful range
    /// of rho inside the grid as lambda grows.
    bool rho_per_lambda = false;
    /// Error thresholds reported in the bench summary.
    std::vector<double> thresholds{1e-2, 1e-4, 1e-6};
    /// Threshold used to pick each solver's best rho.
    double selection_threshold = 1e-4;

    void validate() const;
};

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, Index count);

/// 16 points spanning [1e-2, 1e2].
std::vector<double> default_rho_grid();

/// Flat `key = value` text ('#' comments). Unknown keys are rejected.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

/// Applies key/value settings on top of `cfg`. Keys: instance, n, sigma, seed,
/// rows, cols, radius, jumps, p, graph, obs, partition, partition_file,
/// solvers, rho, rho_min, rho_max, rho_count, lambda, iters, out, workers,
/// timing, reference_factor, rho_per_lambda, setting (1-3: one of the three jump chains).
void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

/// Builds the instance for one lambda together with its partition.
std::pair<ProblemInstance, EdgePartition> build_instance(const InstanceSource& src, double lambda);

struct CellResult {
    SolverKind solver;
    double lambda;
    double rho;
    ConvergenceTrace trace;
};

struct SummaryRow {
    double lambda;
    SolverKind solver;
    double best_rho;
    std::vector<std::optional<Index>> iters_to;  ///< one per threshold
    double final_error;
    OpCounters final_ops;
    Index iterations;
};

struct BenchResult {
    std::vector<CellResult> cells;
    std::map<double, double> reference_objective;  ///< per lambda
    std::vector<SummaryRow> summary;
};

/// Lowest objective reachable by the given solvers: each runs at its best
/// sweep rho (lowest objective seen) for reference_factor x iters, and the
/// minimum over those runs and the sweep traces is returned.
double reference_objective(const ProblemInstance& inst, const EdgePartition& part,
                           const std::vector<CellResult>& sweep, const ExperimentConfig& cfg);

/// Runs every (lambda, solver, rho) cell, computes the reference optimum per
/// lambda, back-fills the error column and builds the summary.
BenchResult run_bench(const ExperimentConfig& cfg);

/// Writes trace_<solver>_lam<lambda>_rho<rho>.csv per cell, summary.csv and
/// reference.csv (the optimum used for each lambda).
void write_bench(const BenchResult& result, const ExperimentConfig& cfg);
std::string cell_file_name(const CellResult& c);

/// Columns: lambda,solver,best_rho,iters_to_<thr>...,final_error,iterations,
/// mults,adds,norms,comps. Unreached thresholds are written as NA.
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                       const std::vector<double>& thresholds);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Per-solver summary for one lambda from already error-filled cells.
SummaryRow summarize(const std::vector<const CellResult*>& cells, const ExperimentConfig& cfg);

struct RateRow {
    double rho;
    double c_decomposed;
    double c_network;
    double c_empirical_decomposed;  ///< NaN if not estimable
    double c_empirical_network;
};

struct RateAnalysis {
    std::vector<RateRow> rows;
    VertexField xstar;
    double reference_objective = 0.0;
    /// c at the saturated model (inf_cap on every curvature block).
    double saturated_c = 0.0;
};

struct RateConfig {
    ExperimentConfig experiment;
    RateModelOptions model;
    /// Iterations of the empirical runs at each rho.
    Index empirical_iters = 3000;
    double tail_fraction = 0.5;
    /// Iterations of the high-precision solve producing x*.
    Index reference_iters = 20000;
    bool empirical = true;
};

/// rho in the rate table is the penalty of the split formulation. The
/// decomposed solver realises it at rho / 2, the network solver at rho.
RateAnalysis run_rate_analysis(const RateConfig& cfg);

/// Columns: rho,c_decomposed,c_network,c_empirical_decomposed,c_empirical_network
void write_rate_csv(const std::filesystem::path& path, const std::vector<RateRow>& rows);
std::vector<RateRow> read_rate_csv(const std::filesystem::path& path);

/// c of `base` with C1 and C2 replaced by inf_cap * I. Both resolvents then
/// approach I and c tends to 1.
double saturated_rate(const RateModel& base, double rho);

/// Columns: inf_cap,rho,c
void write_rate_sanity_csv(const std::filesystem::path& path, double inf_cap, double rho, double c);

/// Writes graph.csv and obs.csv for a generated instance (plus partition.csv
/// for grids) into `out`. Instances are generated at lambda = 1; lambda is
/// not part of the files.
void cmd_gen(const InstanceSource& src, const std::filesystem::path& out);

/// run_bench + write_bench.
BenchResult cmd_bench(const ExperimentConfig& cfg);

/// run_rate_analysis, then rate.csv and rate_sanity.csv in cfg.experiment.out.
RateAnalysis cmd_rate(const RateConfig& cfg);

}  // namespace gfl
