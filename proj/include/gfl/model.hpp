#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "gfl/graph.hpp"
#include "gfl/ops.hpp"
#include "gfl/prox.hpp"

namespace gfl {

/// Per-vertex vectors stored column-wise: p rows, one column per vertex.
using VertexField = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Per-vertex loss f_i(x) = f(x; y_i). The solvers only need evaluation,
/// the quadratic solve  argmin_x f(x) + q |x|^2 + x^T t,  a pair solve that
/// adds the fused term lambda |x_s - x_t|, and the Hessian (for rate analysis).
class LossModel {
public:
    virtual ~LossModel() = default;

    virtual std::string name() const = 0;
    virtual double value(const ConstVecRef& y, const ConstVecRef& x) const = 0;
    virtual Eigen::MatrixXd hessian(const ConstVecRef& y, const ConstVecRef& x) const = 0;
    virtual bool strongly_convex() const { return false; }

    /// out = argmin_x f(x; y) + q |x|^2 + x^T t. `out` must not alias `t`.
    virtual void quadratic_solve(const ConstVecRef& y, double q, const ConstVecRef& t, VecRef out,
                                 OpCounters* ops) const;

    /// (out_s, out_t) = argmin f(x_s; y_s) + f(x_t; y_t) + lambda |x_s - x_t|
    ///                        + q_s |x_s|^2 + q_t |x_t|^2 + x_s^T t_s + x_t^T t_t.
    virtual void pair_solve(const ConstVecRef& y_s, const ConstVecRef& y_t, double q_s, double q_t,
                            const ConstVecRef& t_s, const ConstVecRef& t_t, double lambda, VecRef out_s,
                            VecRef out_t, OpCounters* ops) const;
};

/// f(x; y) = |x - y|^2.
class SquaredLoss final : public LossModel {
public:
    std::string name() const override { return "squared"; }
    double value(const ConstVecRef& y, const ConstVecRef& x) const override { return (x - y).squaredNorm(); }
    Eigen::MatrixXd hessian(const ConstVecRef& y, const ConstVecRef& x) const override;
    bool strongly_convex() const override { return true; }

    // (2y - t) / (2 + 2q)
    void quadratic_solve(const ConstVecRef& y, double q, const ConstVecRef& t, VecRef out,
                         OpCounters* ops) const override;

    // Completes the square on each side (c = 1 + q, centre (2y - t) / 2c) and
    // hands the result to fused_pair_solve.
    void pair_solve(const ConstVecRef& y_s, const ConstVecRef& y_t, double q_s, double q_t, const ConstVecRef& t_s,
                    const ConstVecRef& t_t, double lambda, VecRef out_s, VecRef out_t,
                    OpCounters* ops) const override;
};

std::shared_ptr<const LossModel> squared_loss();

struct ProblemInstance {
    Graph graph;
    VertexField y;  ///< p x n observations
    double lambda = 0.0;
    std::shared_ptr<const LossModel> loss = squared_loss();

    Index n() const noexcept { return graph.num_vertices(); }
    Index p() const noexcept { return static_cast<Index>(y.rows()); }

    /// Throws DimensionError / std::invalid_argument on a malformed instance.
    void validate() const;
};

ProblemInstance make_instance(Graph graph, VertexField y, double lambda,
                              std::shared_ptr<const LossModel> loss = squared_loss());

/// sum_i f_i(x_i) + lambda * sum_{(s,t) in E} |x_s - x_t|.
double objective(const ProblemInstance& inst, const VertexField& x);

/// Penalty part only, sum over the given edge indices of |x_s - x_t|.
double fused_penalty(const Graph& g, const VertexField& x);

Vector loss_quadratic_solve(const ProblemInstance& inst, Index i, double q, const ConstVecRef& t);

/// Observation CSV: one row per vertex, p comma-separated reals.
VertexField load_observations(const std::filesystem::path& path);
VertexField parse_observations(const std::string& text);
void write_observations(const std::filesystem::path& path, const VertexField& y);

}  // namespace gfl
