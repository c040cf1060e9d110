#include "fbsde/grids.hpp"

#include "fbsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbsde {

EGrid::EGrid(int count_, double e_min_, double e_max_)
    : count(count_), e_min(e_min_), e_max(e_max_) {
    if (count < 3) throw std::invalid_argument("EGrid needs at least 3 nodes");
    if (!(e_min < e_max)) throw std::invalid_argument("EGrid requires e_min < e_max");
}

Vec EGrid::nodes() const {
    Vec out(count);
    for (int j = 0; j < count; ++j) out[j] = node(j);
    return out;
}

TimeGrid::TimeGrid(int steps_, double horizon_) : steps(steps_), horizon(horizon_) {
    if (steps < 1) throw std::invalid_argument("TimeGrid needs at least 1 step");
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid horizon must be positive");
}

SubGrid::SubGrid(int count_, double horizon_) : count(count_), horizon(horizon_) {
    if (count < 1) throw std::invalid_argument("SubGrid needs at least 1 sub-step");
    if (!(horizon > 0.0)) throw std::invalid_argument("SubGrid horizon must be positive");
}

bool is_monotone(const GridFunction& v) {
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        if (v[j] > v[j + 1]) return false;
    }
    return true;
}

bool in_unit_range(const GridFunction& v) {
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) return false;
    }
    return true;
}

void clamp01(GridFunction& v) {
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

PBox default_pbox(const ModelSpec& model) {
    const double sigma = model.params.sigma;
    const double root_t = std::sqrt(model.horizon);
    if (model.positive_state) {
        return PBox{std::exp(std::abs(model.params.gbm_drift) + 3.0 * sigma * root_t), true};
    }
    double start = 0.0;
    for (double x : model.initial_point) start = std::max(start, std::abs(x));
    return PBox{3.0 * sigma * root_t + start, false};
}

EGrid default_egrid(const ModelSpec& model, int count) {
    if (model.kind == ModelKind::Multiplicative) return EGrid(count, -1.0, 3.0);
    return EGrid(count, -2.0, 2.0);
}

PBounds box_bounds(const PBox& box, int dim) {
    return PBounds{Vec(dim, box.lo()), Vec(dim, box.hi())};
}

GridFunction discretize_terminal(const ModelSpec& model, const Vec& p, const EGrid& grid) {
    GridFunction out(grid.count);
    for (int j = 0; j < grid.count; ++j) out[j] = model.terminal(p, grid.node(j));
    return out;
}

namespace {

// Box corners dominate |mu| for the built-in families (mu monotone in each
// coordinate); interior samples cover everything else.
template <class F>
void for_each_probe(const ModelSpec& model, const PBox& box, F&& visit) {
    const int d = model.dim;
    const double lo = box.lo(), hi = box.hi();
    Vec p(d);
    if (d <= 12) {
        for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
            for (int k = 0; k < d; ++k) p[k] = (mask >> k) & 1 ? hi : lo;
            visit(p);
        }
    } else {
        Rng corner_rng(0xC0F1ULL);
        for (int s = 0; s < 4096; ++s) {
            for (int k = 0; k < d; ++k) p[k] = corner_rng.uniform() < 0.5 ? lo : hi;
            visit(p);
        }
    }
    for (int k = 0; k < d; ++k) p[k] = 0.5 * (lo + hi);
    visit(p);
    Rng rng(0xC0F2ULL);
    for (int s = 0; s < 256; ++s) {
        for (int k = 0; k < d; ++k) p[k] = rng.uniform(lo, hi);
        visit(p);
    }
}

} // namespace

double cfl_certificate(const ModelSpec& model, const PBox& box, const EGrid& grid,
                       const SubGrid& sub) {
    double worst = 0.0;
    for_each_probe(model, box, [&](const Vec& p) {
        for (int i = 0; i <= 20; ++i) {
            const double y = static_cast<double>(i) / 20.0;
            worst = std::max(worst, std::abs(model.emission_rate(p, y)));
        }
    });
    return worst * sub.step() / grid.spacing();
}

Vec project_p(const Vec& p, const PBox& box) {
    Vec out(p);
    const double lo = box.lo(), hi = box.hi();
    for (double& x : out) x = std::clamp(x, lo, hi);
    return out;
}

double min_emission_rate(const ModelSpec& model, const PBox& box) {
    double lowest = std::numeric_limits<double>::infinity();
    for_each_probe(model, box, [&](const Vec& p) {
        for (int i = 0; i <= 20; ++i) {
            const double y = static_cast<double>(i) / 20.0;
            lowest = std::min(lowest, model.emission_rate(p, y));
        }
    });
    return lowest;
}

} // namespace fbsde
