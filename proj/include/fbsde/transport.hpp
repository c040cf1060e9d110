#pragma once

#include "fbsde/grids.hpp"

#include <string>

namespace fbsde {

// Sorted particle positions representing the empirical CDF
// e -> #{m : positions[m] <= e} / M.
struct ParticleCDF {
    Vec positions;

    int size() const { return static_cast<int>(positions.size()); }
};

double cdf_eval(const ParticleCDF& particles, double e);

// Discrete transport operators for the backward conservation law
//
//   d_t w + d_e M(p, w) = 0,   w(h, .) = theta,   M(p, y) = int_0^y mu(p, u) du,
//
// run over K sub-steps of a SubGrid with the state p frozen. Outputs are
// clamped to [0, 1] after every sub-step. Stability requires the CFL
// certificate below 1 (caller-enforced through cfl_certificate).

// Two-sided stencil; valid for emission rates of either sign.
GridFunction lax_friedrichs(const ModelSpec& model, const Vec& p, const GridFunction& theta,
                            const EGrid& grid, const SubGrid& sub);

// One-sided stencil, less diffusive; requires mu(p, .) >= 0 on [0, 1].
GridFunction upwind(const ModelSpec& model, const Vec& p, const GridFunction& theta,
                    const EGrid& grid, const SubGrid& sub);

// Mass-averaged characteristic speeds
//   F_m(p) = -M * int_{(m-1)/M}^{m/M} mu(p, y) dy,
// non-decreasing in m for admissible (mu decreasing in y) coefficients.
Vec spd_velocities(const ModelSpec& model, const Vec& p, int particle_count);

// Sticky particle transport: positions move at the mass-averaged speeds for
// time h. Order is preserved, so no particle collides.
ParticleCDF spd_transport(const ModelSpec& model, const Vec& p, const ParticleCDF& particles,
                          double h);

enum class TransportKind { LaxFriedrichs, Upwind, Spd };

TransportKind transport_from_name(const std::string& name);
std::string transport_name(TransportKind kind);

} // namespace fbsde
