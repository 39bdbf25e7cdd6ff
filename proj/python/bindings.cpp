// Python bindings. Observations and solutions cross the boundary as (n, p)
// arrays, one row per vertex; the C++ side stores them as p x n.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gfl/admm.hpp"
#include "gfl/data.hpp"
#include "gfl/experiment.hpp"
#include "gfl/prox.hpp"
#include "gfl/rate.hpp"

namespace py = pybind11;
using namespace gfl;

namespace {

using RowField = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Graph make_graph(Index n, const std::vector<std::pair<Index, Index>>& edges) {
    std::vector<Edge> es;
    es.reserve(edges.size());
    for (auto [s, t] : edges) es.push_back({s, t});
    return Graph(n, std::move(es));
}

std::vector<std::pair<Index, Index>> edge_list(const Graph& g) {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(g.num_edges());
    for (const auto& e : g.edges()) out.emplace_back(e.s, e.t);
    return out;
}

ProblemInstance instance_from(const Graph& g, const RowField& y, double lambda) {
    return make_instance(g, y.transpose(), lambda);
}

py::dict trace_dict(const ConvergenceTrace& t) {
    const auto n = static_cast<py::ssize_t>(t.size());
    py::array_t<std::int64_t> iter(n), mults(n), adds(n), norms(n), comps(n);
    py::array_t<double> obj(n), err(n), pr(n), dr(n), el(n);
    for (py::ssize_t k = 0; k < n; ++k) {
        const auto& r = t.records[k];
        iter.mutable_at(k) = static_cast<std::int64_t>(r.iter);
        obj.mutable_at(k) = r.objective;
        err.mutable_at(k) = r.error;
        pr.mutable_at(k) = r.primal_res;
        dr.mutable_at(k) = r.dual_res;
        el.mutable_at(k) = r.elapsed_s;
        mults.mutable_at(k) = static_cast<std::int64_t>(r.ops.mults);
        adds.mutable_at(k) = static_cast<std::int64_t>(r.ops.adds);
        norms.mutable_at(k) = static_cast<std::int64_t>(r.ops.norms);
        comps.mutable_at(k) = static_cast<std::int64_t>(r.ops.comps);
    }
    py::dict d;
    d["iter"] = iter;
    d["objective"] = obj;
    d["error"] = err;
    d["primal_res"] = pr;
    d["dual_res"] = dr;
    d["elapsed_s"] = el;
    d["mults"] = mults;
    d["adds"] = adds;
    d["norms"] = norms;
    d["comps"] = comps;
    return d;
}

py::tuple solve(const std::string& solver, const Graph& g, const RowField& y, double lambda, double rho,
                Index max_iters, std::optional<std::vector<Index>> e0, std::optional<double> reference_objective,
                bool early_stop) {
    const ProblemInstance inst = instance_from(g, y, lambda);
    const EdgePartition part = e0 ? partition_from_matching(inst.graph, *e0) : greedy_matching(inst.graph);
    SolveOptions o;
    o.max_iters = max_iters;
    o.timing = false;
    o.early_stop = early_stop;
    o.reference_objective = reference_objective;
    SolveResult r;
    {
        py::gil_scoped_release release;
        r = run_solver(parse_solver_kind(solver), inst, part, rho, o);
    }
    return py::make_tuple(RowField(r.x.transpose()), trace_dict(r.trace));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "graph-fused lasso: ADMM solvers, matchings and local rate model";

    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<RateError>(m, "RateError", PyExc_RuntimeError);

    py::class_<Graph>(m, "Graph")
        .def(py::init(&make_graph), py::arg("n"), py::arg("edges"))
        .def_property_readonly("n", &Graph::num_vertices)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("edges", &edge_list)
        .def("__repr__", [](const Graph& g) {
            return "Graph(n=" + std::to_string(g.num_vertices()) + ", edges=" + std::to_string(g.num_edges()) + ")";
        });

    py::class_<EdgePartition>(m, "EdgePartition")
        .def_readonly("e0", &EdgePartition::e0)
        .def_readonly("e1", &EdgePartition::e1)
        .def_readonly("d", &EdgePartition::d)
        .def_readonly("user_supplied", &EdgePartition::user_supplied);

    m.def("greedy_matching", &greedy_matching, py::arg("graph"));
    m.def("empty_partition", &empty_partition, py::arg("graph"));
    m.def("is_maximal", &is_maximal, py::arg("graph"), py::arg("partition"));
    m.def("chain_graph", &chain_graph, py::arg("n"));
    m.def("grid_graph", &grid_graph, py::arg("rows"), py::arg("cols"));
    m.def("grid_partition", &grid_partition, py::arg("rows"), py::arg("cols"));
    m.def("load_edge_list", [](const std::string& path) { return load_edge_list(path); }, py::arg("path"));

    m.def(
        "fused_pair_solve",
        [](double c1, double c2, const Vector& a, const Vector& b, double lambda) {
            return fused_pair_solve(FusedPairInput{c1, c2, a, b, lambda});
        },
        py::arg("c1"), py::arg("c2"), py::arg("a"), py::arg("b"), py::arg("lam"),
        "argmin c1|x-a|^2 + c2|y-b|^2 + lam |x-y|, returns (x, y).");
    m.def(
        "block_soft_threshold", [](const Vector& v, double kappa) { return block_soft_threshold(v, kappa); },
        py::arg("v"), py::arg("kappa"));

    m.def(
        "objective",
        [](const Graph& g, const RowField& y, const RowField& x, double lambda) {
            const ProblemInstance inst = instance_from(g, y, lambda);
            return objective(inst, x.transpose());
        },
        py::arg("graph"), py::arg("y"), py::arg("x"), py::arg("lam"));

    m.def("solve", &solve, py::arg("solver"), py::arg("graph"), py::arg("y"), py::arg("lam"), py::arg("rho"),
          py::arg("max_iters") = 1000, py::arg("e0") = py::none(), py::arg("reference_objective") = py::none(),
          py::arg("early_stop") = false,
          "Run 'decomposed', 'network' or 'reference'. Returns (x, trace) with x of shape (n, p).");

    m.def(
        "gen_chain",
        [](Index n, double sigma, std::uint64_t seed) {
            const auto inst = gen_chain(ChainSpec{n, sigma, seed});
            return py::make_tuple(inst.graph, RowField(inst.y.transpose()));
        },
        py::arg("n") = 100, py::arg("sigma") = 1.0, py::arg("seed") = 0);
    m.def(
        "gen_grid",
        [](Index rows, Index cols, double radius, double sigma, std::uint64_t seed) {
            GridSpec s;
            s.rows = rows;
            s.cols = cols;
            s.radius = radius;
            s.noise_sigma = sigma;
            s.seed = seed;
            auto [inst, part] = gen_grid(s);
            return py::make_tuple(inst.graph, RowField(inst.y.transpose()), part);
        },
        py::arg("rows") = 64, py::arg("cols") = 64, py::arg("radius") = 16.0, py::arg("sigma") = 1.0,
        py::arg("seed") = 0);
    m.def(
        "gen_jump_chain",
        [](int setting, std::uint64_t seed) {
            const auto inst = gen_jump_chain(100, 2, rate_setting_jumps(setting), 1.0, seed);
            return py::make_tuple(inst.graph, RowField(inst.y.transpose()));
        },
        py::arg("setting"), py::arg("seed") = 1, "Noise-free rate-comparison chain (n = 100, p = 2).");

    m.def(
        "rate_curve",
        [](const Graph& g, const RowField& y, double lambda, const RowField& xstar, std::optional<std::vector<Index>> e0,
           const std::vector<double>& rhos, bool locked) {
            const ProblemInstance inst = instance_from(g, y, lambda);
            const EdgePartition part = e0 ? partition_from_matching(inst.graph, *e0) : greedy_matching(inst.graph);
            RateModelOptions o;
            o.kink = locked ? KinkModel::Locked : KinkModel::ZeroResolvent;
            const RateModel rm = build_rate_model(inst, part, xstar.transpose(), o);
            const RateEvaluator ev(rm);
            std::vector<double> c;
            c.reserve(rhos.size());
            for (double rho : rhos) c.push_back(ev.c(rho));
            return c;
        },
        py::arg("graph"), py::arg("y"), py::arg("lam"), py::arg("xstar"), py::arg("e0") = py::none(),
        py::arg("rhos") = default_rho_grid(), py::arg("locked") = true,
        "Predicted local factor c(rho); rho is the split-form penalty.");
    m.def("default_rho_grid", &default_rho_grid);
}
