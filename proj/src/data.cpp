#include "gfl/data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gfl {

std::uint64_t Rng::splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ splitmix64(stream))) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open_low() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

VertexField chain_ground_truth(Index n) {
    VertexField y(2, n);
    for (Index i = 0; i < n; ++i) {
        const Index k = i + 1;
        if (k <= 11) y.col(i) << 1.0, 1.0;
        else if (k <= 22) y.col(i) << -1.0, 1.0;
        else if (k <= 33) y.col(i) << 2.0, 2.0;
        else if (k <= 44) y.col(i) << -1.0, -1.0;
        else y.col(i) << 0.0, 0.0;
    }
    return y;
}

namespace {

void add_noise(VertexField& y, double sigma, std::uint64_t seed) {
    if (sigma == 0.0) return;
    Rng rng(seed, /*stream=*/1);
    for (Eigen::Index i = 0; i < y.cols(); ++i)
        for (Eigen::Index j = 0; j < y.rows(); ++j) y(j, i) += sigma * rng.normal();
}

}  // namespace

ProblemInstance gen_chain(const ChainSpec& spec, double lambda) {
    if (spec.n < 45) throw std::invalid_argument("chain length must be at least 45");
    if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    VertexField y = chain_ground_truth(spec.n);
    add_noise(y, spec.noise_sigma, spec.seed);
    return make_instance(chain_graph(spec.n), std::move(y), lambda);
}

VertexField grid_ground_truth(const GridSpec& spec) {
    if (spec.rows == 0 || spec.cols == 0) throw std::invalid_argument("grid dimensions must be at least 1");
    if (!(spec.radius < 0.5 * static_cast<double>(std::min(spec.rows, spec.cols))))
        throw std::invalid_argument("radius must be below min(rows, cols) / 2");
    const double cr = 0.5 * static_cast<double>(spec.rows - 1);
    const double cc = 0.5 * static_cast<double>(spec.cols - 1);
    VertexField y(3, spec.rows * spec.cols);
    for (Index r = 0; r < spec.rows; ++r) {
        for (Index c = 0; c < spec.cols; ++c) {
            const double dr = static_cast<double>(r) - cr;
            const double dc = static_cast<double>(c) - cc;
            const bool inside = dr * dr + dc * dc <= spec.radius * spec.radius;
            const auto& v = inside ? spec.inside_value : spec.outside_value;
            y.col(r * spec.cols + c) << v[0], v[1], v[2];
        }
    }
    return y;
}

std::pair<ProblemInstance, EdgePartition> gen_grid(const GridSpec& spec, double lambda) {
    if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    VertexField y = grid_ground_truth(spec);
    add_noise(y, spec.noise_sigma, spec.seed);
    auto [g, part] = grid_partition(spec.rows, spec.cols);
    return {make_instance(std::move(g), std::move(y), lambda), std::move(part)};
}

ProblemInstance gen_jump_chain(Index n, Index p, const std::vector<Index>& jumps_after, double lambda,
                               std::uint64_t seed, double min_jump) {
    if (n < 2 || p < 1) throw std::invalid_argument("jump chain needs n >= 2 and p >= 1");
    std::vector<Index> cuts = jumps_after;
    for (Index j : cuts)
        if (j < 1 || j >= n) throw std::invalid_argument("jump position out of range");
    Rng rng(seed, /*stream=*/2);
    VertexField y(p, n);
    Vector level(p), next(p);
    auto draw = [&](Vector& v) {
        for (Index c = 0; c < p; ++c) v[c] = 10.0 * rng.uniform() - 5.0;
    };
    draw(level);
    std::size_t cut = 0;
    for (Index i = 0; i < n; ++i) {
        y.col(i) = level;
        if (cut < cuts.size() && i + 1 == cuts[cut]) {
            do draw(next);
            while ((next - level).norm() < min_jump);
            level = next;
            ++cut;
        }
    }
    return make_instance(chain_graph(n), std::move(y), lambda);
}

std::vector<Index> rate_setting_jumps(int setting) {
    std::vector<Index> jumps;
    switch (setting) {
        case 1: jumps = {50}; break;
        case 2:
            for (Index i = 10; i <= 90; i += 10) jumps.push_back(i);
            break;
        case 3:
            for (Index i = 2; i <= 98; i += 2) jumps.push_back(i);
            break;
        default: throw std::invalid_argument("rate setting must be 1, 2 or 3");
    }
    return jumps;
}

ProblemInstance load_instance(const std::filesystem::path& graph_path, const std::filesystem::path& obs_path,
                              double lambda) {
    Graph g = load_edge_list(graph_path);
    VertexField y = load_observations(obs_path);
    if (static_cast<Index>(y.cols()) != g.num_vertices())
        throw DimensionError(obs_path.string() + " has " + std::to_string(y.cols()) + " rows but " +
                             graph_path.string() + " has " + std::to_string(g.num_vertices()) + " vertices");
    return make_instance(std::move(g), std::move(y), lambda);
}

}  // namespace gfl
