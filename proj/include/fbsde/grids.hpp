#pragma once

#include "fbsde/models.hpp"

namespace fbsde {

// Uniform grid for the cumulative-emission variable e.
struct EGrid {
    int count;
    double e_min, e_max;

    EGrid(int count, double e_min, double e_max);
    double spacing() const { return (e_max - e_min) / (count - 1); }
    double node(int j) const { return e_min + j * spacing(); } // j in [0, count)
    Vec nodes() const;
    bool operator==(const EGrid&) const = default;
};

// Uniform splitting grid 0 = t_0 < ... < t_N = horizon.
struct TimeGrid {
    int steps;
    double horizon;

    TimeGrid(int steps, double horizon);
    double step() const { return horizon / steps; }
    double node(int n) const { return horizon * n / steps; }
};

// Sub-grid of one transport step: K sub-steps over horizon h.
struct SubGrid {
    int count;
    double horizon;

    SubGrid(int count, double horizon);
    double step() const { return horizon / count; }
};

// Values of a candidate solution profile on an EGrid. Class membership
// (values in [0,1], non-decreasing) is asserted at scheme boundaries, not per
// mutation.
using GridFunction = Vec;

bool is_monotone(const GridFunction& v);
bool in_unit_range(const GridFunction& v);
void clamp01(GridFunction& v);

// Projection box for the state: [-bound, bound]^d, or [1/bound, bound]^d for
// models living in the positive orthant.
struct PBox {
    double bound;
    bool positive = false;

    double lo() const { return positive ? 1.0 / bound : -bound; }
    double hi() const { return bound; }
};

// Box covering at least three standard deviations of the driving paths.
PBox default_pbox(const ModelSpec& model);

// Grid range enclosing the transition layer of the built-in families.
EGrid default_egrid(const ModelSpec& model, int count);

PBounds box_bounds(const PBox& box, int dim);

// Terminal slice theta_j = phi(p, e_j).
GridFunction discretize_terminal(const ModelSpec& model, const Vec& p, const EGrid& grid);

// Empirical stability certificate sup |mu(p, y)| * substep / spacing over the
// box and y in [0,1]; grid transport requires a value < 1.
double cfl_certificate(const ModelSpec& model, const PBox& box, const EGrid& grid,
                       const SubGrid& sub);

// Componentwise clamp onto the box. Idempotent, 1-Lipschitz in sup norm.
Vec project_p(const Vec& p, const PBox& box);

// Smallest sampled emission rate over the box and y in [0,1]; the upwind
// transport direction is valid only when this is non-negative.
double min_emission_rate(const ModelSpec& model, const PBox& box);

} // namespace fbsde
