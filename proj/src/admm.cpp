#include "gfl/admm.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gfl {

namespace {

using Clock = std::chrono::steady_clock;

void check_common(const ProblemInstance& inst, const EdgePartition& part, double rho, const SolveOptions& opts) {
    inst.validate();
    if (!(rho > 0.0) || !std::isfinite(rho)) throw SolverError("rho must be positive and finite");
    if (opts.x0 && (opts.x0->rows() != inst.y.rows() || opts.x0->cols() != inst.y.cols()))
        throw DimensionError("x0 does not match the observation shape");
    validate_partition(inst.graph, part);
}

double state_scale(const SolverState& st) {
    double s = st.x.norm();
    s = std::max(s, std::sqrt(st.z_st.squaredNorm() + st.z_ts.squaredNorm()));
    s = std::max(s, std::sqrt(st.u_st.squaredNorm() + st.u_ts.squaredNorm()));
    return s;
}

// Shared driver: `step` performs one iteration on the state, the driver
// records the trace and applies the stopping rule.
template <typename Step>
SolveResult drive(const ProblemInstance& inst, SolverState state, const SolveOptions& opts, Step&& step) {
    SolveResult result;
    result.trace.reference_objective = opts.reference_objective;
    result.trace.records.reserve(opts.max_iters);
    OpCounters ops;
    double elapsed = 0.0;
    for (Index it = 0; it < opts.max_iters; ++it) {
        const auto t0 = Clock::now();
        state.z_st_prev = state.z_st;
        state.z_ts_prev = state.z_ts;
        step(state, ops);
        ++state.k;
        if (opts.timing) elapsed += std::chrono::duration<double>(Clock::now() - t0).count();

        TraceRecord rec;
        rec.iter = state.k;
        rec.objective = objective(inst, state.x);
        rec.error = opts.reference_objective ? rec.objective - *opts.reference_objective
                                             : std::numeric_limits<double>::quiet_NaN();
        const Residuals res = residuals(inst.graph, state);
        rec.primal_res = res.primal;
        rec.dual_res = res.dual;
        rec.ops = ops;
        rec.elapsed_s = opts.timing ? elapsed : 0.0;
        result.trace.records.push_back(rec);

        if (opts.on_iteration) opts.on_iteration(state);
        if (opts.early_stop && std::max(res.primal, res.dual) < opts.tol_abs + opts.tol_rel * state_scale(state))
            break;
    }
    result.x = state.x;
    result.state = std::move(state);
    return result;
}

// One iteration of the copy formulation on (E0 in the x-block, e1 copied).
void split_step(const ProblemInstance& inst, const EdgePartition& part, const std::vector<bool>& matched,
                Eigen::MatrixXd& t, SolverState& st, OpCounters& ops) {
    const Graph& g = inst.graph;
    const LossModel& loss = *inst.loss;
    const double rho = st.rho;
    const Eigen::Index p = st.x.rows();

    // x-update: vertex i sees (rho/2) d_i |x_i|^2 + x_i^T sum (u - rho z).
    t.setZero();
    for (Index j = 0; j < st.aux_edges.size(); ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        for (Eigen::Index c = 0; c < p; ++c) {
            t(c, e.s) += st.u_st(c, j) - rho * st.z_st(c, j);
            t(c, e.t) += st.u_ts(c, j) - rho * st.z_ts(c, j);
        }
    }
    count(&ops, 2 * st.aux_edges.size(), 4 * st.aux_edges.size());
    for (Index e : part.e0) {
        const auto [s, tt] = g.edge(e);
        loss.pair_solve(inst.y.col(s), inst.y.col(tt), 0.5 * rho * part.d[s], 0.5 * rho * part.d[tt], t.col(s),
                        t.col(tt), inst.lambda, st.x.col(s), st.x.col(tt), &ops);
    }
    for (Index i = 0; i < g.num_vertices(); ++i) {
        if (matched[i]) continue;
        loss.quadratic_solve(inst.y.col(i), 0.5 * rho * part.d[i], t.col(i), st.x.col(i), &ops);
    }

    // z-update: per e1 edge a fused pair with c1 = c2 = rho / 2.
    for (Index j = 0; j < st.aux_edges.size(); ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        st.z_st.col(j) = st.x.col(e.s) + st.u_st.col(j) / rho;
        st.z_ts.col(j) = st.x.col(e.t) + st.u_ts.col(j) / rho;
        count(&ops, 2, 2);
        fused_pair_solve_inplace(0.5 * rho, 0.5 * rho, st.z_st.col(j), st.z_ts.col(j), inst.lambda, &ops);
    }

    // dual update
    for (Index j = 0; j < st.aux_edges.size(); ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        st.u_st.col(j) += rho * (st.x.col(e.s) - st.z_st.col(j));
        st.u_ts.col(j) += rho * (st.x.col(e.t) - st.z_ts.col(j));
    }
    count(&ops, 2 * st.aux_edges.size(), 4 * st.aux_edges.size());
}

// One iteration of the matching-decomposed preconditioned scheme.
void decomposed_step(const ProblemInstance& inst, const EdgePartition& part, const std::vector<bool>& matched,
                     Eigen::MatrixXd& t, SolverState& st, OpCounters& ops) {
    const Graph& g = inst.graph;
    const LossModel& loss = *inst.loss;
    const double rho = st.rho;
    const double kappa = inst.lambda / rho;
    const Eigen::Index p = st.x.rows();
    const Index m1 = st.aux_edges.size();

    // t_i from the previous iterate: w = u + rho z, r = rho (x_s + x_t);
    // source endpoint gets -(w + r), target gets (w - r).
    t.setZero();
    for (Index j = 0; j < m1; ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        for (Eigen::Index c = 0; c < p; ++c) {
            const double w = st.u_st(c, j) + rho * st.z_st(c, j);
            const double r = rho * (st.x(c, e.s) + st.x(c, e.t));
            t(c, e.s) -= w + r;
            t(c, e.t) += w - r;
        }
    }
    count(&ops, 2 * m1, 6 * m1);

    // Steps 1 and 2 read only t, so they can overwrite x in place.
    for (Index e : part.e0) {
        const auto [s, tt] = g.edge(e);
        loss.pair_solve(inst.y.col(s), inst.y.col(tt), rho * part.d[s], rho * part.d[tt], t.col(s), t.col(tt),
                        inst.lambda, st.x.col(s), st.x.col(tt), &ops);
    }
    for (Index i = 0; i < g.num_vertices(); ++i) {
        if (matched[i]) continue;
        loss.quadratic_solve(inst.y.col(i), rho * part.d[i], t.col(i), st.x.col(i), &ops);
    }

    // Steps 3 and 4, fused per edge: the difference x_s - x_t is shared.
    for (Index j = 0; j < m1; ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        auto z = st.z_st.col(j);
        auto u = st.u_st.col(j);
        z = st.x.col(e.s) - st.x.col(e.t) - u / rho;
        count(&ops, 1, 2);
        block_soft_threshold(z, kappa, z, &ops);
        u += rho * (z - (st.x.col(e.s) - st.x.col(e.t)));
        count(&ops, 1, 2);
    }
}

}  // namespace

double ConvergenceTrace::best_objective() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : records) best = std::min(best, r.objective);
    return best;
}

Residuals residuals(const Graph& g, const SolverState& st) {
    Residuals r;
    double primal2 = 0.0;
    for (Index j = 0; j < st.aux_edges.size(); ++j) {
        const auto& e = g.edge(st.aux_edges[j]);
        if (st.formulation == Formulation::Decomposed) {
            primal2 += (st.z_st.col(j) - st.x.col(e.s) + st.x.col(e.t)).squaredNorm();
        } else {
            primal2 += (st.x.col(e.s) - st.z_st.col(j)).squaredNorm();
            primal2 += (st.x.col(e.t) - st.z_ts.col(j)).squaredNorm();
        }
    }
    r.primal = std::sqrt(primal2);
    double dz2 = 0.0;
    if (st.z_st_prev.size() == st.z_st.size()) dz2 += (st.z_st - st.z_st_prev).squaredNorm();
    if (st.z_ts_prev.size() == st.z_ts.size()) dz2 += (st.z_ts - st.z_ts_prev).squaredNorm();
    r.dual = st.rho * std::sqrt(dz2);
    return r;
}

SolverState initial_state(const ProblemInstance& inst, const EdgePartition& part, Formulation formulation, double rho,
                          const std::optional<VertexField>& x0) {
    SolverState st;
    st.formulation = formulation;
    st.rho = rho;
    st.x = x0 ? *x0 : inst.y;
    st.aux_edges = part.e1;
    const Eigen::Index p = inst.y.rows();
    const Eigen::Index m1 = static_cast<Eigen::Index>(part.e1.size());
    st.z_st.resize(p, m1);
    st.u_st = Eigen::MatrixXd::Zero(p, m1);
    if (formulation == Formulation::Split) {
        st.z_ts.resize(p, m1);
        st.u_ts = Eigen::MatrixXd::Zero(p, m1);
    }
    for (Eigen::Index j = 0; j < m1; ++j) {
        const auto& e = inst.graph.edge(part.e1[j]);
        if (formulation == Formulation::Decomposed) {
            st.z_st.col(j) = st.x.col(e.s) - st.x.col(e.t);
        } else {
            st.z_st.col(j) = st.x.col(e.s);
            st.z_ts.col(j) = st.x.col(e.t);
        }
    }
    st.z_st_prev = st.z_st;
    st.z_ts_prev = st.z_ts;
    return st;
}

SolveResult solve_decomposed(const ProblemInstance& inst, const EdgePartition& part, double rho,
                             const SolveOptions& opts) {
    check_common(inst, part, rho, opts);
    const auto matched = part.matched_vertices(inst.graph);
    Eigen::MatrixXd t(inst.p(), inst.n());
    return drive(inst, initial_state(inst, part, Formulation::Decomposed, rho, opts.x0), opts,
                 [&](SolverState& st, OpCounters& ops) { decomposed_step(inst, part, matched, t, st, ops); });
}

SolveResult solve_reference_split(const ProblemInstance& inst, const EdgePartition& part, double rho,
                                  const SolveOptions& opts) {
    check_common(inst, part, rho, opts);
    const auto matched = part.matched_vertices(inst.graph);
    Eigen::MatrixXd t(inst.p(), inst.n());
    return drive(inst, initial_state(inst, part, Formulation::Split, rho, opts.x0), opts,
                 [&](SolverState& st, OpCounters& ops) { split_step(inst, part, matched, t, st, ops); });
}

SolveResult solve_network(const ProblemInstance& inst, double rho, const SolveOptions& opts) {
    return solve_reference_split(inst, empty_partition(inst.graph), rho, opts);
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Decomposed: return "decomposed";
        case SolverKind::Network: return "network";
        case SolverKind::ReferenceSplit: return "reference";
    }
    return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "decomposed") return SolverKind::Decomposed;
    if (name == "network") return SolverKind::Network;
    if (name == "reference" || name == "reference_split") return SolverKind::ReferenceSplit;
    throw std::invalid_argument("unknown solver '" + name + "' (expected decomposed, network or reference)");
}

SolveResult run_solver(SolverKind kind, const ProblemInstance& inst, const EdgePartition& part, double rho,
                       const SolveOptions& opts) {
    switch (kind) {
        case SolverKind::Decomposed: return solve_decomposed(inst, part, rho, opts);
        case SolverKind::Network: return solve_network(inst, rho, opts);
        case SolverKind::ReferenceSplit: return solve_reference_split(inst, part, rho, opts);
    }
    throw std::invalid_argument("unknown solver kind");
}

namespace {

constexpr const char* kTraceHeader = "iter,objective,error,primal_res,dual_res,mults,adds,norms,comps,elapsed_s";

template <typename T>
T parse_field(std::string_view s, std::size_t line_no) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("invalid trace field '" + std::string(s) + "'", line_no);
    return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
    out << kTraceHeader << '\n';
    out << std::setprecision(17);
    for (const auto& r : trace.records) {
        out << r.iter << ',' << r.objective << ',' << r.error << ',' << r.primal_res << ',' << r.dual_res << ','
            << r.ops.mults << ',' << r.ops.adds << ',' << r.ops.norms << ',' << r.ops.comps << ',' << r.elapsed_s
            << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
    // write-then-rename so concurrent readers never see a partial file
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        write_trace_csv(out, trace);
    }
    std::filesystem::rename(tmp, path);
}

ConvergenceTrace read_trace_csv(std::istream& in) {
    ConvergenceTrace trace;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty trace file", 0);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw ParseError("unexpected trace header", line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view sv(line);
        std::size_t pos = 0;
        while (true) {
            auto end = sv.find(',', pos);
            f.push_back(sv.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
            if (end == std::string_view::npos) break;
            pos = end + 1;
        }
        if (f.size() != 10) throw ParseError("expected 10 trace columns", line_no);
        TraceRecord r;
        r.iter = parse_field<Index>(f[0], line_no);
        r.objective = parse_field<double>(f[1], line_no);
        r.error = parse_field<double>(f[2], line_no);
        r.primal_res = parse_field<double>(f[3], line_no);
        r.dual_res = parse_field<double>(f[4], line_no);
        r.ops.mults = parse_field<std::uint64_t>(f[5], line_no);
        r.ops.adds = parse_field<std::uint64_t>(f[6], line_no);
        r.ops.norms = parse_field<std::uint64_t>(f[7], line_no);
        r.ops.comps = parse_field<std::uint64_t>(f[8], line_no);
        r.elapsed_s = parse_field<double>(f[9], line_no);
        trace.records.push_back(r);
    }
    return trace;
}

ConvergenceTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_trace_csv(in);
}

std::optional<Index> iterations_to_error(const ConvergenceTrace& trace, double threshold) {
    std::optional<Index> settled;
    for (const auto& r : trace.records) {
        if (!(r.error <= threshold)) {
            settled.reset();
        } else if (!settled) {
            settled = r.iter;
        }
    }
    return settled;
}

}  // namespace gfl
