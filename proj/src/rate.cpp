#include "gfl/rate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace gfl {

Eigen::MatrixXd fused_curvature(const ConstVecRef& d) {
    const double nd = d.norm();
    const Eigen::Index p = d.size();
    return Eigen::MatrixXd::Identity(p, p) / nd - (d * d.transpose()) / (nd * nd * nd);
}

RateModel build_rate_model(const ProblemInstance& inst, const EdgePartition& part, const VertexField& xstar,
                           const RateModelOptions& opts) {
    inst.validate();
    validate_partition(inst.graph, part);
    if (xstar.rows() != inst.y.rows() || xstar.cols() != inst.y.cols())
        throw DimensionError("build_rate_model: x* does not match the observation shape");
    if (!(opts.inf_cap > 0.0)) throw std::invalid_argument("build_rate_model: inf_cap must be positive");

    const Graph& g = inst.graph;
    const Index n = inst.n();
    const Index p = inst.p();
    RateModel rm;
    rm.n = n;
    rm.p = p;
    rm.lambda = inst.lambda;
    rm.inf_cap = opts.inf_cap;
    rm.kink = opts.kink;
    rm.tie_tol = opts.tie_tol > 0.0 ? opts.tie_tol : 1e-6 * (1.0 + xstar.cwiseAbs().maxCoeff());
    rm.e0 = part.e0;
    rm.e1 = part.e1;
    rm.xstar = xstar;
    rm.active.resize(g.num_edges());
    for (Index e = 0; e < g.num_edges(); ++e)
        rm.active[e] = (xstar.col(g.edge(e).s) - xstar.col(g.edge(e).t)).norm() > rm.tie_tol;

    const auto ip = static_cast<Eigen::Index>(p);
    rm.c1 = Eigen::MatrixXd::Zero(n * p, n * p);
    for (Index i = 0; i < n; ++i)
        rm.c1.block(i * p, i * p, ip, ip) = inst.loss->hessian(inst.y.col(i), xstar.col(i));
    for (Index e : part.e0) {
        const auto [i, j] = g.edge(e);
        const Eigen::MatrixXd t = rm.active[e] ? Eigen::MatrixXd(inst.lambda * fused_curvature(xstar.col(i) - xstar.col(j)))
                                               : Eigen::MatrixXd(opts.inf_cap * Eigen::MatrixXd::Identity(ip, ip));
        rm.c1.block(i * p, i * p, ip, ip) += t;
        rm.c1.block(j * p, j * p, ip, ip) += t;
        rm.c1.block(i * p, j * p, ip, ip) -= t;
        rm.c1.block(j * p, i * p, ip, ip) -= t;
    }

    const Index m = rm.constraint_dim();
    rm.a1 = Eigen::MatrixXd::Zero(m, n * p);
    rm.a2 = -Eigen::MatrixXd::Identity(m, m);
    rm.c2 = Eigen::MatrixXd::Zero(m, m);
    for (Index k = 0; k < part.e1.size(); ++k) {
        const Index e = part.e1[k];
        const auto [s, t] = g.edge(e);
        const Index row = 2 * k * p;
        rm.a1.block(row, s * p, ip, ip).setIdentity();
        rm.a1.block(row + p, t * p, ip, ip).setIdentity();
        if (rm.active[e]) {
            const Eigen::MatrixXd tb = inst.lambda * fused_curvature(xstar.col(s) - xstar.col(t));
            rm.c2.block(row, row, ip, ip) = tb;
            rm.c2.block(row + p, row + p, ip, ip) = tb;
            rm.c2.block(row, row + p, ip, ip) = -tb;
            rm.c2.block(row + p, row, ip, ip) = -tb;
        }
    }
    return rm;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw RateError("eigenvalue iteration did not converge for a " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " matrix");
    return es.eigenvalues();
}

double max_real_eigenvalue(const Eigen::MatrixXd& m) { return eigenvalues(m).real().maxCoeff(); }

RateEvaluator::RateEvaluator(const RateModel& model) : model_(&model) {
    const Eigen::Index m = static_cast<Eigen::Index>(model.constraint_dim());
    if (m == 0) return;

    // A1 C1^{-1} A1^T is symmetric PSD; its eigenbasis gives R1 for every rho.
    Eigen::LLT<Eigen::MatrixXd> llt(model.c1);
    Eigen::MatrixXd s1;
    if (llt.info() == Eigen::Success) {
        s1 = model.a1 * llt.solve(model.a1.transpose());
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.c1);
        Eigen::VectorXd inv = es.eigenvalues();
        const double cut = 1e-12 * std::max(1.0, inv.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > cut ? 1.0 / inv[i] : 0.0;
        s1 = model.a1 * es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * model.a1.transpose();
    }
    s1 = 0.5 * (s1 + s1.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(s1);
    if (es1.info() != Eigen::Success) throw RateError("symmetric eigen-decomposition of A1 C1^-1 A1^T failed");
    s1_vectors_ = es1.eigenvectors();
    s1_values_ = es1.eigenvalues().cwiseMax(0.0);

    const auto ip = static_cast<Eigen::Index>(model.p);
    const Eigen::Index b = 2 * ip;
    c2_vectors_.resize(model.e1.size());
    c2_values_.resize(model.e1.size());
    for (Index k = 0; k < model.e1.size(); ++k) {
        Eigen::MatrixXd block = model.c2.block(k * b, k * b, b, b);
        if (!model.active[model.e1[k]] && model.kink == KinkModel::Locked) {
            // stiff along the difference direction, free along the sum
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(ip, ip);
            block.topLeftCorner(ip, ip) = model.inf_cap * id;
            block.bottomRightCorner(ip, ip) = model.inf_cap * id;
            block.topRightCorner(ip, ip) = -model.inf_cap * id;
            block.bottomLeftCorner(ip, ip) = -model.inf_cap * id;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(block);
        c2_vectors_[k] = es2.eigenvectors();
        c2_values_[k] = es2.eigenvalues().cwiseMax(0.0);
    }
}

Eigen::MatrixXd RateEvaluator::resolvent_x(double rho) const {
    const Eigen::VectorXd d = (1.0 + rho * s1_values_.array()).inverse().matrix();
    return s1_vectors_ * d.asDiagonal() * s1_vectors_.transpose();
}

Eigen::MatrixXd RateEvaluator::resolvent_z(double rho) const {
    // A2 = -I, so the resolvent is (I + rho C2^{-1})^{-1} = C2 (C2 + rho I)^{-1}
    // blockwise; zero-curvature directions map to 0.
    const Eigen::Index m = static_cast<Eigen::Index>(model_->constraint_dim());
    const Eigen::Index b = 2 * static_cast<Eigen::Index>(model_->p);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    for (Index k = 0; k < c2_vectors_.size(); ++k) {
        const Eigen::VectorXd& mu = c2_values_[k];
        const Eigen::VectorXd w = (mu.array() / (mu.array() + rho)).matrix();
        r.block(k * b, k * b, b, b) = c2_vectors_[k] * w.asDiagonal() * c2_vectors_[k].transpose();
    }
    return r;
}

Eigen::MatrixXd RateEvaluator::iteration_operator(double rho) const {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const Eigen::Index m = static_cast<Eigen::Index>(model_->constraint_dim());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd refl_z = id - 2.0 * resolvent_z(rho);
    const Eigen::MatrixXd refl_x = id - 2.0 * resolvent_x(rho);
    return 0.5 * (refl_z * refl_x + id);
}

double RateEvaluator::c(double rho) const {
    if (model_->constraint_dim() == 0) return 0.0;
    return max_real_eigenvalue(iteration_operator(rho));
}

double RateEvaluator::spectral_radius(double rho) const {
    if (model_->constraint_dim() == 0) return 0.0;
    return eigenvalues(iteration_operator(rho)).cwiseAbs().maxCoeff();
}

double compute_c(const RateModel& rm, double rho) { return RateEvaluator(rm).c(rho); }

double empirical_rate(const ConvergenceTrace& trace, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("tail_fraction must be in (0, 1]");
    if (!trace.reference_objective) throw RateError("empirical_rate needs a trace with a reference objective");
    const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(*trace.reference_objective));
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : trace.records)
        if (r.error > floor) pts.emplace_back(static_cast<double>(r.iter), std::log(r.error));
    const auto keep = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(pts.size())));
    if (keep < 10) throw RateError("empirical_rate: fewer than 10 usable trace points");
    pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(keep));
    double mk = 0.0, ml = 0.0;
    for (const auto& [k, l] : pts) {
        mk += k;
        ml += l;
    }
    mk /= static_cast<double>(keep);
    ml /= static_cast<double>(keep);
    double skk = 0.0, skl = 0.0;
    for (const auto& [k, l] : pts) {
        skk += (k - mk) * (k - mk);
        skl += (k - mk) * (l - ml);
    }
    return std::exp(skl / skk);
}

}  // namespace gfl
