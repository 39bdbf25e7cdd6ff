#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gfl/admm.hpp"
#include "gfl/graph.hpp"
#include "gfl/model.hpp"

namespace gfl {

class RateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How the resolvent of the nonsmooth z-block is linearised on e1 edges whose
/// endpoints are fused at the reference solution (where the curvature block
/// C2 is zero).
enum class KinkModel {
    /// The kink is locked: infinite curvature along z_st - z_ts, none along
    /// z_st + z_ts. The resolvent block is the projection onto the difference
    /// direction.
    Locked,
    /// Literal reading of a zero block with C2^{-1} = infinity: resolvent 0.
    ZeroResolvent,
};

struct RateModelOptions {
    /// Distance below which x*_s and x*_t count as fused; <= 0 selects
    /// 1e-6 * (1 + max|x*|).
    double tie_tol = 0.0;
    /// Finite stand-in for the infinite stiffness of a fused matched edge.
    double inf_cap = 1e8;
    KinkModel kink = KinkModel::Locked;
};

/// Local linear model of the split problem
///   f1(x) = sum_i f_i(x_i) + lambda sum_{e0} |x_s - x_t|,
///   f2(z) = lambda sum_{e1} |z_st - z_ts|,  subject to  A1 x + A2 z = 0,
/// around a reference solution x*.
///
/// Constraint rows come in groups of p: group 2j is x_{s_j} = z_{s_j t_j},
/// group 2j+1 is x_{t_j} = z_{t_j s_j} for the j-th e1 edge.
struct RateModel {
    Index n = 0;
    Index p = 0;
    double lambda = 0.0;
    double inf_cap = 1e8;
    double tie_tol = 0.0;
    KinkModel kink = KinkModel::Locked;
    std::vector<Index> e0;
    std::vector<Index> e1;
    Eigen::MatrixXd a1;  ///< (2 p |e1|) x (n p)
    Eigen::MatrixXd a2;  ///< -I of size 2 p |e1|
    Eigen::MatrixXd c1;  ///< (n p) x (n p)
    Eigen::MatrixXd c2;  ///< (2 p |e1|) square, block diagonal
    VertexField xstar;
    /// Per graph edge: true when |x*_s - x*_t| > tie_tol.
    std::vector<bool> active;

    Index constraint_dim() const noexcept { return 2 * p * e1.size(); }
};

/// Hessian of |x_i - x_j| at a non-fused pair: I/|d| - d d^T/|d|^3, d = x_i - x_j.
Eigen::MatrixXd fused_curvature(const ConstVecRef& d);

/// Assembles A1, A2, C1, C2 at `xstar`. C1 starts from the loss Hessians and
/// adds lambda*T on the (i,i), (j,j) blocks and subtracts it on (i,j), (j,i)
/// for every e0 edge (T = inf_cap * I when the pair is fused). C2 carries
/// lambda * [T, -T; -T, T] for active e1 edges and zero otherwise.
RateModel build_rate_model(const ProblemInstance& inst, const EdgePartition& part, const VertexField& xstar,
                           const RateModelOptions& opts = {});

/// Evaluates the predicted local factor for many rho values from one
/// factorisation of the model.
class RateEvaluator {
public:
    /// Keeps a pointer to `model`, which must outlive the evaluator.
    explicit RateEvaluator(const RateModel& model);
    RateEvaluator(RateModel&&) = delete;

    /// Largest real part among the eigenvalues of
    ///   1/2 [ (I - 2 R2(rho)) (I - 2 R1(rho)) + I ],
    ///   R1 = (I + rho A1 C1^{-1} A1^T)^{-1},  R2 = (I + rho A2 C2^{-1} A2^T)^{-1}.
    double c(double rho) const;

    /// Largest eigenvalue modulus of the same operator.
    double spectral_radius(double rho) const;

    Eigen::MatrixXd iteration_operator(double rho) const;
    Eigen::MatrixXd resolvent_x(double rho) const;
    Eigen::MatrixXd resolvent_z(double rho) const;

private:
    const RateModel* model_;
    Eigen::MatrixXd s1_vectors_;
    Eigen::VectorXd s1_values_;
    // per e1 edge: eigen-decomposition of the 2p x 2p block of C2
    std::vector<Eigen::MatrixXd> c2_vectors_;
    std::vector<Eigen::VectorXd> c2_values_;
};

/// Convenience wrapper: RateEvaluator(rm).c(rho).
double compute_c(const RateModel& rm, double rho);

/// All eigenvalues of a dense real matrix; throws RateError when the QR
/// iteration does not converge.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m);
double max_real_eigenvalue(const Eigen::MatrixXd& m);

/// Per-iteration contraction factor fitted to the tail of a trace: least
/// squares slope of log(error) against the iteration number over the last
/// `tail_fraction` of the records whose error exceeds 10 eps max(1, |f*|),
/// returned as exp(slope). Throws RateError with fewer than 10 usable points.
double empirical_rate(const ConvergenceTrace& trace, double tail_fraction = 0.5);

}  // namespace gfl
