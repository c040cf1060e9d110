#pragma once

#include "fbsde/models.hpp"

#include <cmath>

namespace fbsde::testing {

// Emission rate frozen at a constant c: the transport equation degenerates to
// pure advection, whose exact solution is the shift e -> psi(e + c h).
inline ModelSpec constant_rate_model(double c) {
    ModelSpec m;
    m.dim = 1;
    m.kind = ModelKind::Custom;
    m.initial_point = {0.0};
    m.drift = [](const Vec&) { return Vec{0.0}; };
    m.vol_apply = [](const Vec&, const Vec& dw) { return Vec(dw.size(), 0.0); };
    m.emission_rate = [c](const Vec&, double) { return c; };
    m.terminal = [](const Vec&, double e) { return e >= 0.0 ? 1.0 : 0.0; };
    m.flux_primitive = [c](const Vec&, double y) { return c * y; };
    m.terminal_particle = 0.0;
    return m;
}

// mu(p, y) = 1 - y (state-independent), used for the hand-computed
// mass-averaged velocity checks.
inline ModelSpec decaying_rate_model() {
    ModelSpec m;
    m.dim = 1;
    m.kind = ModelKind::Custom;
    m.initial_point = {0.0};
    m.drift = [](const Vec&) { return Vec{0.0}; };
    m.vol_apply = [](const Vec&, const Vec& dw) { return Vec(dw.size(), 0.0); };
    m.emission_rate = [](const Vec&, double y) { return 1.0 - y; };
    m.terminal = [](const Vec&, double e) { return e >= 0.0 ? 1.0 : 0.0; };
    m.flux_primitive = [](const Vec&, double y) { return y - 0.5 * y * y; };
    m.terminal_particle = 0.0;
    return m;
}

// Degenerate variant of the bm-positive family with a switched-off driving
// noise: states never leave the initial point.
inline ModelSpec bm_positive_zero_vol(int dim) {
    ModelSpec m = make_bm_positive_model(dim, 1.0);
    m.kind = ModelKind::Custom;
    m.vol_apply = [](const Vec&, const Vec& dw) { return Vec(dw.size(), 0.0); };
    m.brownian_map = nullptr;
    return m;
}

// Coefficients violating the admissible class: the rate increases in y.
inline ModelSpec broken_rate_model() {
    ModelSpec m;
    m.dim = 1;
    m.kind = ModelKind::Custom;
    m.initial_point = {0.0};
    m.drift = [](const Vec&) { return Vec{0.0}; };
    m.vol_apply = [](const Vec&, const Vec& dw) { return dw; };
    m.emission_rate = [](const Vec&, double y) { return y; };
    m.terminal = [](const Vec&, double e) { return e >= 0.0 ? 1.0 : 0.0; };
    m.terminal_particle = 0.0;
    return m;
}

} // namespace fbsde::testing
