#include "gfl/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gfl {

void LossModel::quadratic_solve(const ConstVecRef&, double, const ConstVecRef&, VecRef, OpCounters*) const {
    throw UnsupportedOperation("loss '" + name() + "' does not provide a quadratic solve");
}

void LossModel::pair_solve(const ConstVecRef&, const ConstVecRef&, double, double, const ConstVecRef&,
                           const ConstVecRef&, double, VecRef, VecRef, OpCounters*) const {
    throw UnsupportedOperation("loss '" + name() + "' does not provide a fused pair solve");
}

Eigen::MatrixXd SquaredLoss::hessian(const ConstVecRef& y, const ConstVecRef&) const {
    return 2.0 * Eigen::MatrixXd::Identity(y.size(), y.size());
}

void SquaredLoss::quadratic_solve(const ConstVecRef& y, double q, const ConstVecRef& t, VecRef out,
                                  OpCounters* ops) const {
    if (!(q >= 0.0)) throw std::invalid_argument("quadratic_solve: q must be nonnegative");
    out = (2.0 * y - t) / (2.0 + 2.0 * q);
    count(ops, 1, 1);
}

void SquaredLoss::pair_solve(const ConstVecRef& y_s, const ConstVecRef& y_t, double q_s, double q_t,
                             const ConstVecRef& t_s, const ConstVecRef& t_t, double lambda, VecRef out_s,
                             VecRef out_t, OpCounters* ops) const {
    const double c_s = 1.0 + q_s;
    const double c_t = 1.0 + q_t;
    out_s = (2.0 * y_s - t_s) / (2.0 * c_s);
    out_t = (2.0 * y_t - t_t) / (2.0 * c_t);
    count(ops, 2, 2);
    fused_pair_solve_inplace(c_s, c_t, out_s, out_t, lambda, ops);
}

std::shared_ptr<const LossModel> squared_loss() {
    static const auto instance = std::make_shared<const SquaredLoss>();
    return instance;
}

void ProblemInstance::validate() const {
    if (!loss) throw std::invalid_argument("problem instance has no loss model");
    if (y.rows() < 1) throw DimensionError("observation dimension p must be at least 1");
    if (static_cast<Index>(y.cols()) != graph.num_vertices())
        throw DimensionError("observations have " + std::to_string(y.cols()) + " rows but the graph has " +
                             std::to_string(graph.num_vertices()) + " vertices");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
}

ProblemInstance make_instance(Graph graph, VertexField y, double lambda, std::shared_ptr<const LossModel> loss) {
    ProblemInstance inst{std::move(graph), std::move(y), lambda, std::move(loss)};
    inst.validate();
    return inst;
}

double fused_penalty(const Graph& g, const VertexField& x) {
    double sum = 0.0;
    for (const auto& e : g.edges()) sum += (x.col(e.s) - x.col(e.t)).norm();
    return sum;
}

double objective(const ProblemInstance& inst, const VertexField& x) {
    if (x.rows() != inst.y.rows() || x.cols() != inst.y.cols())
        throw DimensionError("objective: x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                             ", expected " + std::to_string(inst.y.rows()) + "x" + std::to_string(inst.y.cols()));
    double loss = 0.0;
    for (Index i = 0; i < inst.n(); ++i) loss += inst.loss->value(inst.y.col(i), x.col(i));
    return loss + inst.lambda * fused_penalty(inst.graph, x);
}

Vector loss_quadratic_solve(const ProblemInstance& inst, Index i, double q, const ConstVecRef& t) {
    if (i >= inst.n()) throw std::out_of_range("loss_quadratic_solve: vertex out of range");
    if (static_cast<Index>(t.size()) != inst.p()) throw DimensionError("loss_quadratic_solve: t has wrong dimension");
    if (q == 0.0 && !inst.loss->strongly_convex())
        throw std::invalid_argument("loss_quadratic_solve: q = 0 requires a strongly convex loss");
    Vector out(inst.p());
    inst.loss->quadratic_solve(inst.y.col(i), q, t, out, nullptr);
    return out;
}

VertexField parse_observations(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t end = line.find(',', pos);
            if (end == std::string::npos) end = line.size();
            std::string field = line.substr(pos, end - pos);
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            if (b == std::string::npos) throw ParseError("empty observation field", line_no);
            field = field.substr(b, e - b + 1);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size())
                throw ParseError("invalid number '" + field + "'", line_no);
            row.push_back(v);
            pos = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("expected " + std::to_string(rows.front().size()) + " columns, found " +
                                 std::to_string(row.size()),
                             line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("observation file has no data rows", 0);
    VertexField y(rows.front().size(), rows.size());
    for (Index i = 0; i < rows.size(); ++i)
        for (Index j = 0; j < rows[i].size(); ++j) y(j, i) = rows[i][j];
    return y;
}

VertexField load_observations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_observations(ss.str());
}

void write_observations(const std::filesystem::path& path, const VertexField& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
        for (Eigen::Index j = 0; j < y.rows(); ++j) {
            if (j) out << ',';
            out << y(j, i);
        }
        out << '\n';
    }
}

}  // namespace gfl
