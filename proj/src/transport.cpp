#include "fbsde/transport.hpp"

#include "fbsde/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fbsde {

namespace {

// Grids must be wide enough that the transition layer stays interior; the
// boundary rows are frozen, so a visible edge step means truncation.
void warn_boundary_layer(const GridFunction& v) {
    static std::atomic<bool> warned{false};
    const std::size_t n = v.size();
    if (n < 2) return;
    const double left = std::abs(v[1] - v[0]);
    const double right = std::abs(v[n - 1] - v[n - 2]);
    if ((left > 1e-3 || right > 1e-3) && !warned.exchange(true)) {
        std::fprintf(stderr,
                     "transport: solution gradient reaches the e-grid boundary "
                     "(edge steps %.2e / %.2e); consider a wider grid\n",
                     left, right);
    }
}

void check_sizes(const GridFunction& theta, const EGrid& grid) {
    if (static_cast<int>(theta.size()) != grid.count) {
        throw std::invalid_argument("grid function length does not match the e-grid");
    }
}

} // namespace

double cdf_eval(const ParticleCDF& particles, double e) {
    const auto& pos = particles.positions;
    const auto it = std::upper_bound(pos.begin(), pos.end(), e);
    return static_cast<double>(it - pos.begin()) / static_cast<double>(pos.size());
}

GridFunction lax_friedrichs(const ModelSpec& model, const Vec& p, const GridFunction& theta,
                            const EGrid& grid, const SubGrid& sub) {
    check_sizes(theta, grid);
    const int J = grid.count;
    const double ratio2 = 0.5 * sub.step() / grid.spacing();

    GridFunction cur = theta;
    clamp01(cur);
    GridFunction next(J);
    Vec fval(J);
    for (int k = 0; k < sub.count; ++k) {
        for (int j = 0; j < J; ++j) fval[j] = flux(model, p, cur[j]);
        next[0] = cur[0];
        next[J - 1] = cur[J - 1];
        for (int j = 1; j + 1 < J; ++j) {
            next[j] = 0.5 * (cur[j + 1] + cur[j - 1]) + ratio2 * (fval[j + 1] - fval[j - 1]);
        }
        clamp01(next);
        std::swap(cur, next);
    }
    warn_boundary_layer(cur);
    return cur;
}

GridFunction upwind(const ModelSpec& model, const Vec& p, const GridFunction& theta,
                    const EGrid& grid, const SubGrid& sub) {
    check_sizes(theta, grid);
    for (int i = 0; i <= 20; ++i) {
        if (model.emission_rate(p, static_cast<double>(i) / 20.0) < 0.0) {
            throw std::invalid_argument(
                "upwind transport requires a non-negative emission rate at this state");
        }
    }
    const int J = grid.count;
    const double ratio = sub.step() / grid.spacing();

    GridFunction cur = theta;
    clamp01(cur);
    GridFunction next(J);
    Vec fval(J);
    for (int k = 0; k < sub.count; ++k) {
        for (int j = 0; j < J; ++j) fval[j] = flux(model, p, cur[j]);
        next[J - 1] = cur[J - 1];
        for (int j = 0; j + 1 < J; ++j) {
            next[j] = cur[j] + ratio * (fval[j + 1] - fval[j]);
        }
        clamp01(next);
        std::swap(cur, next);
    }
    warn_boundary_layer(cur);
    return cur;
}

Vec spd_velocities(const ModelSpec& model, const Vec& p, int particle_count) {
    if (particle_count < 1) throw std::invalid_argument("particle count must be >= 1");
    const double m_count = static_cast<double>(particle_count);
    Vec out(particle_count);
    double flux_lo = 0.0; // M(p, 0) = 0
    for (int m = 1; m <= particle_count; ++m) {
        const double flux_hi = flux(model, p, static_cast<double>(m) / m_count);
        out[m - 1] = -m_count * (flux_hi - flux_lo);
        flux_lo = flux_hi;
    }
    // Non-decreasing for admissible coefficients; guard against rounding of
    // nearly flat flux differences.
    for (int m = 1; m < particle_count; ++m) out[m] = std::max(out[m], out[m - 1]);
    return out;
}

ParticleCDF spd_transport(const ModelSpec& model, const Vec& p, const ParticleCDF& particles,
                          double h) {
    if (!std::is_sorted(particles.positions.begin(), particles.positions.end())) {
        throw std::invalid_argument("particle positions must be sorted");
    }
    const Vec speed = spd_velocities(model, p, particles.size());
    ParticleCDF out;
    out.positions.resize(particles.positions.size());
    for (std::size_t m = 0; m < out.positions.size(); ++m) {
        out.positions[m] = particles.positions[m] + speed[m] * h;
    }
    return out;
}

TransportKind transport_from_name(const std::string& name) {
    if (name == "lf") return TransportKind::LaxFriedrichs;
    if (name == "upwind") return TransportKind::Upwind;
    if (name == "spd") return TransportKind::Spd;
    throw ConfigError("unknown transport '" + name + "' (expected lf, upwind or spd)");
}

std::string transport_name(TransportKind kind) {
    switch (kind) {
        case TransportKind::LaxFriedrichs: return "lf";
        case TransportKind::Upwind: return "upwind";
        case TransportKind::Spd: return "spd";
    }
    return "?";
}

} // namespace fbsde
