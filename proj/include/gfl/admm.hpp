#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gfl/graph.hpp"
#include "gfl/model.hpp"
#include "gfl/ops.hpp"

namespace gfl {

/// Which splitting a SolverState belongs to.
///  - Decomposed: one auxiliary z_st = x_s - x_t per e1 edge (matching-decomposed,
///    preconditioned updates).
///  - Split: copies z_st ~ x_s and z_ts ~ x_t per e1 edge. With an empty matching
///    this is the network lasso; with a matching it is the reference split form.
enum class Formulation { Decomposed, Split };

struct SolverState {
    Formulation formulation = Formulation::Decomposed;
    double rho = 1.0;
    Index k = 0;
    VertexField x;
    /// Graph edge index of column j of z/u.
    std::vector<Index> aux_edges;
    Eigen::MatrixXd z_st, u_st;
    /// Split form only; empty for Decomposed.
    Eigen::MatrixXd z_ts, u_ts;
    /// z blocks from the previous iteration (for the dual residual).
    Eigen::MatrixXd z_st_prev, z_ts_prev;
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
};

/// Primal: norm of the constraint violation of the state's formulation.
/// Dual: rho * norm of the change in z since the previous iteration.
Residuals residuals(const Graph& g, const SolverState& state);

struct TraceRecord {
    Index iter = 0;
    double objective = 0.0;
    double error = 0.0;  ///< objective - reference, NaN without a reference
    double primal_res = 0.0;
    double dual_res = 0.0;
    OpCounters ops;
    double elapsed_s = 0.0;
    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct ConvergenceTrace {
    std::vector<TraceRecord> records;
    std::optional<double> reference_objective;

    Index size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    const TraceRecord& back() const { return records.back(); }
    /// Smallest objective over all records (+inf when empty).
    double best_objective() const;
};

struct SolveOptions {
    Index max_iters = 1000;
    /// Stop when max(primal, dual) < tol_abs + tol_rel * scale,
    /// scale = max(|x|, |z|, |u|) (Frobenius).
    bool early_stop = false;
    double tol_abs = 1e-10;
    double tol_rel = 1e-8;
    /// Fills the error column as objective - reference.
    std::optional<double> reference_objective;
    /// Default x0 = y.
    std::optional<VertexField> x0;
    /// Record wall-clock time; when false the elapsed column is 0.
    bool timing = true;
    /// Called after every iteration with the committed state.
    std::function<void(const SolverState&)> on_iteration;
};

struct SolveResult {
    VertexField x;
    ConvergenceTrace trace;
    SolverState state;
};

class SolverError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Initial state: x = x0 (or y), z consistent with x, u = 0.
SolverState initial_state(const ProblemInstance& inst, const EdgePartition& part, Formulation formulation, double rho,
                          const std::optional<VertexField>& x0 = std::nullopt);

/// Matching-decomposed ADMM with preconditioned x-update. Per iteration:
///  1. every matched pair (s,t) solved jointly with the fused term kept exact,
///  2. unmatched vertices by the loss quadratic solve,
///  3. z_st = soft-threshold(x_s - x_t - u_st / rho, lambda / rho) on e1,
///  4. u_st += rho (z_st - x_s + x_t).
/// The linear terms of steps 1-2 are
///   t_i = sum_{(i,j) in e1} [-(u_ij + rho z_ij) - rho (x_i + x_j)]
///       + sum_{(j,i) in e1} [ (u_ji + rho z_ji) - rho (x_i + x_j)]
/// with quadratic weight rho * d_i, all from the previous iterate.
SolveResult solve_decomposed(const ProblemInstance& inst, const EdgePartition& part, double rho,
                             const SolveOptions& opts = {});

/// Network lasso: ADMM on the copy formulation over every edge.
SolveResult solve_network(const ProblemInstance& inst, double rho, const SolveOptions& opts = {});

/// ADMM on the copy formulation restricted to e1, with matched pairs kept in
/// the x-block. Iterates coincide with solve_decomposed at half the rho.
SolveResult solve_reference_split(const ProblemInstance& inst, const EdgePartition& part, double rho,
                                  const SolveOptions& opts = {});

enum class SolverKind { Decomposed, Network, ReferenceSplit };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// Dispatch helper; `part` is ignored by the network solver.
SolveResult run_solver(SolverKind kind, const ProblemInstance& inst, const EdgePartition& part, double rho,
                       const SolveOptions& opts = {});

/// Trace CSV: iter,objective,error,primal_res,dual_res,mults,adds,norms,comps,elapsed_s
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);
ConvergenceTrace read_trace_csv(std::istream& in);
ConvergenceTrace read_trace_csv(const std::filesystem::path& path);

/// First iteration from which the error stays <= threshold for the rest of
/// the trace; nullopt if the trace never settles below it.
std::optional<Index> iterations_to_error(const ConvergenceTrace& trace, double threshold);

}  // namespace gfl
