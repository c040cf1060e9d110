#include "fbsde/diffusion.hpp"

#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fbsde {

Vec euler_step(const ModelSpec& model, const Vec& p, double dt, const Vec& dw) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler step requires dt > 0");
    const Vec b = model.drift(p);
    const Vec s = model.vol_apply(p, dw);
    Vec out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + b[i] * dt + s[i];
    return out;
}

PathEnsemble sample_paths(const EulerSampler& sampler, int count, std::uint64_t stream_offset) {
    if (count < 1) throw std::invalid_argument("path count must be >= 1");
    const int N = sampler.grid.steps;
    const int d = sampler.model->dim;
    PathEnsemble out;
    out.paths = count;
    out.steps = N;
    out.dim = d;
    out.states.resize(static_cast<std::size_t>(count) * (N + 1) * d);
    out.increments.resize(static_cast<std::size_t>(count) * N * d);

    const double dt = sampler.grid.step();
    const double root_dt = std::sqrt(dt);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        Rng rng(stream_seed(sampler.seed, stream_offset + i));
        Vec p = sampler.start;
        Vec dw(d);
        double* state_row = out.states.data() + i * static_cast<std::size_t>(N + 1) * d;
        double* incr_row = out.increments.data() + i * static_cast<std::size_t>(N) * d;
        std::memcpy(state_row, p.data(), sizeof(double) * d);
        for (int n = 0; n < N; ++n) {
            for (int k = 0; k < d; ++k) dw[k] = root_dt * rng.gauss();
            std::memcpy(incr_row + static_cast<std::size_t>(n) * d, dw.data(),
                        sizeof(double) * d);
            p = euler_step(*sampler.model, p, dt, dw);
            std::memcpy(state_row + static_cast<std::size_t>(n + 1) * d, p.data(),
                        sizeof(double) * d);
        }
    });
    return out;
}

std::vector<CubaturePoint> cubature_increments(int dim, double h) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
    const double jump = std::sqrt(static_cast<double>(dim) * h);
    const double prob = 1.0 / (2.0 * dim);
    std::vector<CubaturePoint> out;
    out.reserve(2 * dim);
    for (int l = 0; l < dim; ++l) {
        CubaturePoint up{Vec(dim, 0.0), prob};
        up.point[l] = jump;
        out.push_back(std::move(up));
        CubaturePoint down{Vec(dim, 0.0), prob};
        down.point[l] = -jump;
        out.push_back(std::move(down));
    }
    return out;
}

ParticleCDF merge_particles(std::span<const ParticleCDF* const> clouds) {
    if (clouds.empty()) throw std::invalid_argument("merge needs at least one cloud");
    const std::size_t stride = clouds.size();
    const std::size_t m_count = clouds.front()->positions.size();
    for (const ParticleCDF* c : clouds) {
        if (c->positions.size() != m_count) {
            throw std::invalid_argument("merge requires clouds of identical size");
        }
    }
    Vec all;
    all.reserve(stride * m_count);
    for (const ParticleCDF* c : clouds) {
        all.insert(all.end(), c->positions.begin(), c->positions.end());
    }
    std::sort(all.begin(), all.end());
    // keep the midpoint order statistic of every block of 2d values: rank
    // 2dm - d corresponds to the quantile (m - 1/2)/M, so repeated merges do
    // not drift the represented distribution
    const std::size_t offset = stride / 2 + 1;
    ParticleCDF out;
    out.positions.resize(m_count);
    for (std::size_t m = 1; m <= m_count; ++m) {
        out.positions[m - 1] = all[stride * m - offset];
    }
    return out;
}

int CubatureLattice::find(int level, std::span<const int> key_in) const {
    const Level& lv = levels[level];
    const int d = dim;
    int lo = 0, hi = lv.count;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        const int* k = lv.keys.data() + static_cast<std::size_t>(mid) * d;
        if (std::lexicographical_compare(k, k + d, key_in.begin(), key_in.end())) {
            lo = mid + 1;
        } else if (std::equal(k, k + d, key_in.begin())) {
            return mid;
        } else {
            hi = mid;
        }
    }
    return -1;
}

Vec CubatureLattice::node_position(int level, int index) const {
    const auto k = key(level, index);
    Vec out(dim);
    for (int i = 0; i < dim; ++i) out[i] = node_scale * k[i];
    return out;
}

CubatureLattice build_lattice(int dim, double h, int levels) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (levels < 0) throw std::invalid_argument("level count must be >= 0");
    CubatureLattice lat;
    lat.dim = dim;
    lat.step_size = h;
    lat.node_scale = std::sqrt(static_cast<double>(dim) * h);
    lat.levels.resize(levels + 1);
    lat.levels[0].keys.assign(dim, 0);
    lat.levels[0].count = 1;

    std::vector<std::vector<int>> scratch;
    for (int n = 0; n < levels; ++n) {
        const auto& cur = lat.levels[n];
        scratch.clear();
        scratch.reserve(static_cast<std::size_t>(cur.count) * 2 * dim);
        std::vector<int> child(dim);
        for (int i = 0; i < cur.count; ++i) {
            const int* k = cur.keys.data() + static_cast<std::size_t>(i) * dim;
            for (int l = 0; l < dim; ++l) {
                for (int sign : {+1, -1}) {
                    std::copy(k, k + dim, child.begin());
                    child[l] += sign;
                    scratch.push_back(child);
                }
            }
        }
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        auto& next = lat.levels[n + 1];
        next.count = static_cast<int>(scratch.size());
        next.keys.resize(scratch.size() * dim);
        for (std::size_t i = 0; i < scratch.size(); ++i) {
            std::copy(scratch[i].begin(), scratch[i].end(),
                      next.keys.begin() + i * static_cast<std::size_t>(dim));
        }
    }
    return lat;
}

double lattice_level_size(int dim, int level) {
    // ways[s] = #{k in Z^dim : sum |k_i| = s}
    std::vector<double> ways(level + 1, 0.0);
    ways[0] = 1.0;
    for (int added = 1; added <= dim; ++added) {
        std::vector<double> next(level + 1, 0.0);
        for (int s = 0; s <= level; ++s) {
            if (ways[s] == 0.0) continue;
            next[s] += ways[s]; // coordinate 0
            for (int a = 1; s + a <= level; ++a) next[s + a] += 2.0 * ways[s];
        }
        ways.swap(next);
    }
    double total = 0.0;
    for (int s = level % 2; s <= level; s += 2) total += ways[s];
    return total;
}

std::vector<ParticleCDF> diffusion_merge_step(const CubatureLattice& lattice, int level,
                                              const std::vector<ParticleCDF>& child_payloads) {
    const auto& cur = lattice.levels[level];
    const auto& next = lattice.levels[level + 1];
    if (static_cast<int>(child_payloads.size()) != next.count) {
        throw std::logic_error("diffusion merge: child payloads incomplete for this level");
    }
    const int d = lattice.dim;
    std::vector<ParticleCDF> out(cur.count);
    parallel_for(static_cast<std::size_t>(cur.count), [&](std::size_t i) {
        std::vector<const ParticleCDF*> kids;
        kids.reserve(2 * d);
        std::vector<int> child(d);
        const auto k = lattice.key(level, static_cast<int>(i));
        for (int l = 0; l < d; ++l) {
            for (int sign : {+1, -1}) {
                std::copy(k.begin(), k.end(), child.begin());
                child[l] += sign;
                const int j = lattice.find(level + 1, child);
                if (j < 0) throw std::logic_error("diffusion merge: missing lattice child");
                kids.push_back(&child_payloads[j]);
            }
        }
        out[i] = merge_particles(kids);
    });
    return out;
}

} // namespace fbsde
