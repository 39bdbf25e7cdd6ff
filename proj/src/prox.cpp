#include "gfl/prox.hpp"

#include <cassert>
#include <stdexcept>

namespace gfl {

void fused_pair_solve_inplace(double c1, double c2, VecRef x, VecRef y, double lambda, OpCounters* ops) {
    const double dist = (x - y).norm();
    count(ops, 0, 1, 1, 1);
    if (2.0 * c1 * c2 * dist <= (c1 + c2) * lambda) {
        // weighted mean written as a + w (b - a)
        x += (c2 / (c1 + c2)) * (y - x);
        y = x;
        count(ops, 1, 1);
        return;
    }
    // dist == 0 always satisfies the merge condition
    assert(dist > 0.0);
    const double sx = lambda / (2.0 * c1 * dist);
    const double sy = lambda / (2.0 * c2 * dist);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double diff = x[j] - y[j];
        x[j] -= sx * diff;
        y[j] += sy * diff;
    }
    count(ops, 2, 2);
}

void fused_pair_solve(double c1, double c2, const ConstVecRef& a, const ConstVecRef& b, double lambda, VecRef x,
                      VecRef y, OpCounters* ops) {
    x = a;
    y = b;
    fused_pair_solve_inplace(c1, c2, x, y, lambda, ops);
}

std::pair<Vector, Vector> fused_pair_solve(const FusedPairInput& in) {
    if (!(in.c1 > 0.0) || !(in.c2 > 0.0)) throw std::invalid_argument("fused_pair_solve: c1 and c2 must be positive");
    if (!(in.lambda >= 0.0)) throw std::invalid_argument("fused_pair_solve: lambda must be nonnegative");
    if (in.a.size() != in.b.size()) throw std::invalid_argument("fused_pair_solve: a and b differ in dimension");
    Vector x = in.a, y = in.b;
    fused_pair_solve_inplace(in.c1, in.c2, x, y, in.lambda);
    return {std::move(x), std::move(y)};
}

void block_soft_threshold(const ConstVecRef& v, double kappa, VecRef out, OpCounters* ops) {
    const double nv = v.norm();
    count(ops, 0, 0, 1, 1);
    if (nv <= kappa) {
        out.setZero();
        return;
    }
    out = (1.0 - kappa / nv) * v;
    count(ops, 1, 0);
}

Vector block_soft_threshold(const ConstVecRef& v, double kappa) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("block_soft_threshold: kappa must be nonnegative");
    Vector out(v.size());
    block_soft_threshold(v, kappa, out);
    return out;
}

}  // namespace gfl
