#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "gfl/graph.hpp"
#include "gfl/model.hpp"

namespace gfl {

/// Reproducible noise source: std::mt19937_64 (output sequence fixed by the
/// C++ standard), 53-bit uniform conversion, Box-Muller for Gaussians. Child
/// streams are seeded through splitmix64 so (seed, stream) pairs never collide
/// in practice.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_low();
    double normal();

    static std::uint64_t splitmix64(std::uint64_t x);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct ChainSpec {
    Index n = 100;
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
};

struct GridSpec {
    Index rows = 64;
    Index cols = 64;
    double radius = 16.0;
    std::array<double, 3> inside_value{0.0, 0.0, 0.0};
    std::array<double, 3> outside_value{0.4, 0.7, 1.0};
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
};

/// Noise-free piecewise-constant chain signal in R^2 with five segments:
/// [1,1] on vertices 1-11, [-1,1] on 12-22, [2,2] on 23-33, [-1,-1] on 34-44,
/// [0,0] from 45 on (1-based vertex numbering).
VertexField chain_ground_truth(Index n);

/// Chain instance with y = ground truth + N(0, sigma^2 I). lambda is set by
/// the caller afterwards (default 1).
ProblemInstance gen_chain(const ChainSpec& spec, double lambda = 1.0);

/// Disk-in-square signal on a grid: inside_value within distance `radius` of
/// the lattice centre ((rows-1)/2, (cols-1)/2), outside_value elsewhere.
VertexField grid_ground_truth(const GridSpec& spec);

/// Grid instance plus its alternating-row matching.
std::pair<ProblemInstance, EdgePartition> gen_grid(const GridSpec& spec, double lambda = 1.0);

/// Noise-free chain whose fused solution (at the given lambda) is piecewise
/// constant with jumps exactly after the listed 1-based positions. Segment
/// levels are drawn from the seeded generator with consecutive levels at
/// least `min_jump` apart; used to reproduce prescribed active-edge patterns.
ProblemInstance gen_jump_chain(Index n, Index p, const std::vector<Index>& jumps_after, double lambda,
                               std::uint64_t seed = 1, double min_jump = 3.0);

/// The three chain settings used for rate comparisons (n = 100):
/// 1 -> jump after 50; 2 -> after 10, 20, ..., 90; 3 -> after 2, 4, ..., 98.
std::vector<Index> rate_setting_jumps(int setting);

/// Edge list + observation CSV; throws DimensionError if the row count differs
/// from the vertex count.
ProblemInstance load_instance(const std::filesystem::path& graph_path, const std::filesystem::path& obs_path,
                              double lambda);

}  // namespace gfl
