#pragma once

#include <Eigen/Core>

#include "gfl/ops.hpp"

namespace gfl {

using Vector = Eigen::VectorXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;

/// Inputs of  min_{x,y} c1 |x - a|^2 + c2 |y - b|^2 + lambda |x - y|.
struct FusedPairInput {
    double c1;
    double c2;
    Vector a;
    Vector b;
    double lambda;
};

/// Closed-form minimiser of the two-block fused problem. Merges the pair to
/// the weighted mean when 2 c1 c2 |a - b| <= (c1 + c2) lambda, otherwise
/// shrinks each block toward the other by lambda / (2 c_i).
///
/// `x` and `y` must not alias `a` or `b`. Counts 1 add, 1 norm, 1 compare,
/// then 1 mult + 1 add (merge) or 2 mults + 2 adds (separate).
void fused_pair_solve(double c1, double c2, const ConstVecRef& a, const ConstVecRef& b, double lambda, VecRef x,
                      VecRef y, OpCounters* ops = nullptr);

std::pair<Vector, Vector> fused_pair_solve(const FusedPairInput& in);

/// In-place variant: on entry `x` holds a and `y` holds b.
void fused_pair_solve_inplace(double c1, double c2, VecRef x, VecRef y, double lambda, OpCounters* ops = nullptr);

/// Group soft-threshold: 0 if |v| <= kappa, else (1 - kappa/|v|) v.
/// `out` may alias `v`.
void block_soft_threshold(const ConstVecRef& v, double kappa, VecRef out, OpCounters* ops = nullptr);

Vector block_soft_threshold(const ConstVecRef& v, double kappa);

}  // namespace gfl
