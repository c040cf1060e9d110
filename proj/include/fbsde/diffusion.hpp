#pragma once

#include "fbsde/grids.hpp"
#include "fbsde/transport.hpp"

#include <span>

namespace fbsde {

// One explicit step p + b(p) dt + sigma(p) dw.
Vec euler_step(const ModelSpec& model, const Vec& p, double dt, const Vec& dw);

// Ensemble of Euler paths together with the raw Brownian increments that
// produced them (the regression loss needs both).
struct PathEnsemble {
    int paths = 0;
    int steps = 0;
    int dim = 0;
    Vec states;     // paths x (steps + 1) x dim
    Vec increments; // paths x steps x dim

    std::span<const double> state(int path, int n) const {
        return {states.data() + (static_cast<std::size_t>(path) * (steps + 1) + n) * dim,
                static_cast<std::size_t>(dim)};
    }
    std::span<const double> increment(int path, int n) const {
        return {increments.data() + (static_cast<std::size_t>(path) * steps + n) * dim,
                static_cast<std::size_t>(dim)};
    }
};

struct EulerSampler {
    const ModelSpec* model;
    TimeGrid grid;
    std::uint64_t seed;
    Vec start;
};

// `count` independent paths, Gaussian increments of variance dt per component.
// Each path draws from its own seed stream, so the ensemble prefix is stable
// under changes of `count` or of the worker partition.
PathEnsemble sample_paths(const EulerSampler& sampler, int count,
                          std::uint64_t stream_offset = 0);

struct CubaturePoint {
    Vec point;
    double probability;
};

// 2d moment-matching points +-sqrt(d h) e_l, each with probability 1/(2d):
// mean zero and covariance h * I exactly.
std::vector<CubaturePoint> cubature_increments(int dim, double h);

// Subsamples the union of 2d sorted clouds of size M back to M particles:
// sort the 2dM values and keep the midpoint order statistic of every block
// of 2d (ranks 2d m - d), the quantile quantization at levels (m - 1/2)/M.
ParticleCDF merge_particles(std::span<const ParticleCDF* const> clouds);

// Recombining support of the cubature walk. Level n holds the integer keys
// k with ||k||_1 <= n and ||k||_1 = n (mod 2); the walk position is
// sqrt(d h) * k. Every level-n node has exactly 2d children k +- e_l at
// level n+1.
struct CubatureLattice {
    int dim = 0;
    double step_size = 0.0; // h
    double node_scale = 0.0; // sqrt(dim * h)

    struct Level {
        std::vector<int> keys; // flattened, stride dim, lexicographically sorted
        int count = 0;
    };
    std::vector<Level> levels;

    std::span<const int> key(int level, int index) const {
        return {levels[level].keys.data() + static_cast<std::size_t>(index) * dim,
                static_cast<std::size_t>(dim)};
    }
    // Index of `key` inside `level`, or -1.
    int find(int level, std::span<const int> key) const;
    Vec node_position(int level, int index) const;
};

CubatureLattice build_lattice(int dim, double h, int levels);

// Node count of level n (exact while representable in a double).
double lattice_level_size(int dim, int level);

// One backward diffusion step: for every level-n node, merge the particle
// clouds of its 2d children at level n+1.
std::vector<ParticleCDF> diffusion_merge_step(const CubatureLattice& lattice, int level,
                                              const std::vector<ParticleCDF>& child_payloads);

} // namespace fbsde
