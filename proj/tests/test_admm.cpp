#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "gfl/admm.hpp"
#include "gfl/data.hpp"
#include "oracles.hpp"

using namespace gfl;

namespace {

ProblemInstance random_instance(std::mt19937_64& gen, Index n, Index p, double lambda) {
    std::normal_distribution<double> n01;
    std::vector<Edge> edges;
    // spanning path plus random chords
    for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    for (Index s = 0; s < n; ++s)
        for (Index t = s + 2; t < n; ++t)
            if (std::bernoulli_distribution(2.0 / static_cast<double>(n))(gen)) edges.push_back({t, s});
    std::shuffle(edges.begin(), edges.end(), gen);
    VertexField y(p, n);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < p; ++k) y(k, i) = 2.0 * n01(gen);
    return make_instance(Graph(n, edges), y, lambda);
}

std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(const Graph& g) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : g.edges()) out.emplace_back(e.s, e.t);
    return out;
}

SolveOptions iters(Index k) {
    SolveOptions o;
    o.max_iters = k;
    o.timing = false;
    return o;
}

bool ops_leq(const OpCounters& a, const OpCounters& b) {
    return a.mults <= b.mults && a.adds <= b.adds && a.norms <= b.norms && a.comps <= b.comps;
}

}  // namespace

TEST_CASE("lambda = 0 returns the observations") {
    std::mt19937_64 gen(1);
    const auto inst = random_instance(gen, 15, 2, 0.0);
    const auto part = greedy_matching(inst.graph);
    for (SolverKind k : {SolverKind::Decomposed, SolverKind::Network, SolverKind::ReferenceSplit}) {
        const auto r = run_solver(k, inst, part, 1.0, iters(300));
        CHECK((r.x - inst.y).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("huge lambda fuses a connected graph to the mean") {
    std::mt19937_64 gen(2);
    const auto inst = random_instance(gen, 6, 2, 1e3);
    const auto part = greedy_matching(inst.graph);
    const Vector mean = inst.y.rowwise().mean();
    for (SolverKind k : {SolverKind::Decomposed, SolverKind::Network}) {
        const auto r = run_solver(k, inst, part, 1.0, iters(3000));
        for (Index i = 0; i < 6; ++i) CHECK((r.x.col(i) - mean).norm() < 1e-6);
    }
}

TEST_CASE("single edge fuses to the midpoint") {
    VertexField y(1, 2);
    y << 0, 1;
    const auto inst = make_instance(Graph(2, {{0, 1}}), y, 4.0);
    const auto r = solve_network(inst, 1.0, iters(500));
    const auto [b1, b2] = oracle::single_edge_grid_search(0, 1, 4.0, -0.5, 1.5, 2000);
    CHECK(b1 == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(b2 == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.x(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.x(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
    // with the edge matched the decomposed solver has nothing to iterate on
    const auto d = solve_decomposed(inst, greedy_matching(inst.graph), 1.0, iters(1));
    CHECK(d.x(0, 0) == doctest::Approx(0.5));
    CHECK(d.x(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("chain instance: decomposed and network agree") {
    ChainSpec spec;
    spec.seed = 3;
    const auto inst = gen_chain(spec, 1.0);
    const auto dec = solve_decomposed(inst, greedy_matching(inst.graph), 1.0, iters(3000));
    const auto net = solve_network(inst, 2.0, iters(3000));
    const double fd = dec.trace.back().objective, fn = net.trace.back().objective;
    CHECK(std::abs(fd - fn) <= 1e-6 * std::abs(fn));
}

TEST_CASE("grid instance: decomposed and network agree") {
    GridSpec spec;
    spec.seed = 3;
    const auto [inst, part] = gen_grid(spec, 1.0);
    const auto dec = solve_decomposed(inst, part, 1.0, iters(1500));
    const auto net = solve_network(inst, 2.0, iters(1500));
    const double fd = dec.trace.back().objective, fn = net.trace.back().objective;
    CHECK(std::abs(fd - fn) <= 1e-6 * std::abs(fn));
}

TEST_CASE("all solvers reach a common optimum on random instances") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 6; ++trial) {
        const auto inst = random_instance(gen, 10 + 7 * trial, 1 + trial % 3, 0.5 + trial * 0.3);
        const auto part = greedy_matching(inst.graph);
        const double fd = solve_decomposed(inst, part, 0.5, iters(5000)).trace.best_objective();
        const double fn = solve_network(inst, 1.0, iters(5000)).trace.best_objective();
        const double fr = solve_reference_split(inst, part, 1.0, iters(5000)).trace.best_objective();
        const double fmin = std::min({fd, fn, fr});
        CHECK(fd - fmin <= 1e-6 * std::abs(fmin));
        CHECK(fn - fmin <= 1e-6 * std::abs(fmin));
        CHECK(fr - fmin <= 1e-6 * std::abs(fmin));
    }
}

TEST_CASE("decomposed iterates equal the split form at twice the rho") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Index p = 1 + trial % 2;
        const auto inst = random_instance(gen, 8 + trial, p, 0.3 + 0.1 * trial);
        const auto part = greedy_matching(inst.graph);
        const double rho0 = 0.2 + 0.15 * trial;
        std::vector<VertexField> xd, xr;
        SolveOptions od = iters(60), orf = iters(60);
        od.on_iteration = [&](const SolverState& s) { xd.push_back(s.x); };
        orf.on_iteration = [&](const SolverState& s) { xr.push_back(s.x); };
        solve_decomposed(inst, part, rho0, od);
        solve_reference_split(inst, part, 2 * rho0, orf);
        REQUIRE(xd.size() == xr.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < xd.size(); ++k) worst = std::max(worst, (xd[k] - xr[k]).cwiseAbs().maxCoeff());
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("empty matching: decomposed reaches the network optimum") {
    std::mt19937_64 gen(9);
    const auto inst = random_instance(gen, 20, 2, 0.8);
    const double fd = solve_decomposed(inst, empty_partition(inst.graph), 0.5, iters(4000)).trace.back().objective;
    const double fn = solve_network(inst, 1.0, iters(4000)).trace.back().objective;
    CHECK(std::abs(fd - fn) <= 1e-6 * std::abs(fn));
}

TEST_CASE("operation counters: decomposed never exceeds network") {
    std::mt19937_64 gen(10);
    std::vector<std::pair<ProblemInstance, EdgePartition>> cases;
    {
        const auto inst = gen_chain(ChainSpec{}, 1.0);
        auto part = greedy_matching(inst.graph);
        cases.emplace_back(inst, part);
    }
    {
        GridSpec gs;
        gs.rows = gs.cols = 16;
        gs.radius = 4;
        cases.push_back(gen_grid(gs, 1.0));
    }
    for (int t = 0; t < 5; ++t) {
        const auto inst = random_instance(gen, 30, 2, 1.0);
        auto part = greedy_matching(inst.graph);
        cases.emplace_back(inst, part);
    }
    for (const auto& [inst, part] : cases) {
        REQUIRE_FALSE(part.e0.empty());
        for (Index k : {1u, 10u, 100u}) {
            const auto od = solve_decomposed(inst, part, 1.0, iters(k)).trace.back().ops;
            const auto on = solve_network(inst, 1.0, iters(k)).trace.back().ops;
            CHECK(ops_leq(od, on));
            CHECK(od.mults < on.mults);
            CHECK(od.adds < on.adds);
        }
    }
}

TEST_CASE("operation counters are monotone") {
    const auto inst = gen_chain(ChainSpec{}, 1.0);
    const auto r = solve_decomposed(inst, greedy_matching(inst.graph), 1.0, iters(50));
    for (std::size_t k = 1; k < r.trace.records.size(); ++k)
        CHECK(ops_leq(r.trace.records[k - 1].ops, r.trace.records[k].ops));
}

TEST_CASE("returned point satisfies subgradient optimality") {
    ChainSpec spec;
    spec.seed = 4;
    const auto inst = gen_chain(spec, 2.0);
    const auto r = solve_decomposed(inst, greedy_matching(inst.graph), 1.0, iters(4000));
    CHECK(oracle::subgradient_residual(r.x, inst.y, edge_pairs(inst.graph), inst.lambda) <= 1e-4);
    std::mt19937_64 gen(12);
    const auto rnd = random_instance(gen, 25, 3, 1.5);
    const auto rn = solve_network(rnd, 1.0, iters(6000));
    CHECK(oracle::subgradient_residual(rn.x, rnd.y, edge_pairs(rnd.graph), rnd.lambda) <= 1e-4);
}

TEST_CASE("residual examples") {
    VertexField y(1, 2);
    y << 1, 3;
    const auto inst = make_instance(Graph(2, {{0, 1}}), y, 1.0);
    const auto part = empty_partition(inst.graph);
    SolverState st = initial_state(inst, part, Formulation::Decomposed, 1.0);
    CHECK(residuals(inst.graph, st).primal == 0.0);
    st.z_st(0, 0) += 0.5;
    CHECK(residuals(inst.graph, st).primal == doctest::Approx(0.5));

    SolveOptions o = iters(1);
    o.x0 = VertexField::Zero(1, 2);
    const auto r = solve_decomposed(inst, part, 1.0, o);
    CHECK(r.trace.back().primal_res > 0.0);

    SolverState sp = initial_state(inst, part, Formulation::Split, 1.0);
    CHECK(residuals(inst.graph, sp).primal == 0.0);
    sp.z_ts(0, 0) -= 0.3;
    sp.z_st(0, 0) += 0.4;
    CHECK(residuals(inst.graph, sp).primal == doctest::Approx(0.5));
}

TEST_CASE("trace bookkeeping") {
    const auto inst = gen_chain(ChainSpec{}, 1.0);
    const auto part = greedy_matching(inst.graph);
    CHECK(solve_decomposed(inst, part, 1.0, iters(1)).trace.size() == 1);
    const auto r = solve_network(inst, 1.0, iters(37));
    CHECK(r.trace.size() == 37);
    for (std::size_t k = 0; k < r.trace.size(); ++k) CHECK(r.trace.records[k].iter == k + 1);
    CHECK(std::isnan(r.trace.back().error));
    SolveOptions o = iters(5);
    o.reference_objective = 100.0;
    const auto rr = solve_decomposed(inst, part, 1.0, o);
    for (const auto& rec : rr.trace.records) CHECK(rec.error == rec.objective - 100.0);
}

TEST_CASE("early stop ends the run before the budget") {
    const auto inst = gen_chain(ChainSpec{}, 1.0);
    SolveOptions o = iters(100000);
    o.early_stop = true;
    const auto r = solve_decomposed(inst, greedy_matching(inst.graph), 1.0, o);
    CHECK(r.trace.size() < 100000);
    const auto& last = r.trace.back();
    CHECK(std::max(last.primal_res, last.dual_res) < 1e-6);
}

TEST_CASE("solves are deterministic") {
    std::mt19937_64 gen(13);
    const auto inst = random_instance(gen, 30, 2, 1.0);
    const auto part = greedy_matching(inst.graph);
    const auto a = solve_decomposed(inst, part, 0.7, iters(200));
    const auto b = solve_decomposed(inst, part, 0.7, iters(200));
    CHECK(a.x == b.x);
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        CHECK(a.trace.records[k].objective == b.trace.records[k].objective);
        CHECK(a.trace.records[k].ops == b.trace.records[k].ops);
    }
}

TEST_CASE("trace CSV round-trips") {
    const auto inst = gen_chain(ChainSpec{}, 1.0);
    SolveOptions o;
    o.max_iters = 40;
    o.reference_objective = 130.25;
    const auto r = solve_decomposed(inst, greedy_matching(inst.graph), 1.3, o);
    std::stringstream ss;
    write_trace_csv(ss, r.trace);
    const auto back = read_trace_csv(ss);
    REQUIRE(back.size() == r.trace.size());
    for (std::size_t k = 0; k < back.size(); ++k) CHECK(back.records[k] == r.trace.records[k]);

    const auto path = std::filesystem::temp_directory_path() / "gfl_trace_test.csv";
    const auto plain = solve_network(inst, 1.0, iters(10));
    write_trace_csv(path, plain.trace);
    const auto back2 = read_trace_csv(path);
    REQUIRE(back2.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(std::isnan(back2.records[k].error));
        CHECK(back2.records[k].objective == plain.trace.records[k].objective);
        CHECK(back2.records[k].ops == plain.trace.records[k].ops);
    }
    std::stringstream bad("iter,objective\n1,2\n");
    CHECK_THROWS_AS(read_trace_csv(bad), ParseError);
}

TEST_CASE("iterations_to_error waits for the trace to settle") {
    ConvergenceTrace t;
    const double errs[] = {1.0, 1e-3, 1e-5, 1e-2, 1e-5, 1e-7};
    for (Index k = 0; k < 6; ++k) {
        TraceRecord r;
        r.iter = k + 1;
        r.error = errs[k];
        t.records.push_back(r);
    }
    CHECK(iterations_to_error(t, 1e-4) == Index{5});
    CHECK(iterations_to_error(t, 1e-1) == Index{2});
    CHECK_FALSE(iterations_to_error(t, 1e-9).has_value());
}

TEST_CASE("solver argument checks") {
    const auto inst = gen_chain(ChainSpec{}, 1.0);
    const auto part = greedy_matching(inst.graph);
    CHECK_THROWS_AS(solve_decomposed(inst, part, 0.0), SolverError);
    CHECK_THROWS_AS(solve_network(inst, -1.0), SolverError);
    SolveOptions o;
    o.x0 = VertexField::Zero(3, 100);
    CHECK_THROWS_AS(solve_decomposed(inst, part, 1.0, o), DimensionError);
    CHECK_THROWS_AS(solve_decomposed(inst, greedy_matching(chain_graph(50)), 1.0), std::invalid_argument);
    CHECK(parse_solver_kind("network") == SolverKind::Network);
    CHECK(to_string(SolverKind::ReferenceSplit) == "reference");
    CHECK_THROWS_AS(parse_solver_kind("simplex"), std::invalid_argument);
}
