#include "fbsde/models.hpp"

#include "fbsde/quadrature.hpp"
#include "fbsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

double scaled_sum(const Vec& p) {
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    return s / std::sqrt(static_cast<double>(p.size()));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// (prod_l p_l)^(1/sqrt(d)) for p in the positive orthant.
double scaled_product(const Vec& p) {
    double s = 0.0;
    for (double x : p) s += std::log(x);
    return std::exp(s / std::sqrt(static_cast<double>(p.size())));
}

void check_common(int dim, double sigma) {
    if (dim < 1) throw std::invalid_argument("model dimension must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("volatility must be positive");
}

} // namespace

ModelSpec make_linear_model(int dim, double sigma, double cap, double horizon) {
    check_common(dim, sigma);
    ModelSpec m;
    m.dim = dim;
    m.horizon = horizon;
    m.kind = ModelKind::Linear;
    m.initial_point.assign(dim, 0.0);
    m.params.sigma = sigma;
    m.params.cap = cap;
    m.drift = [dim](const Vec&) { return Vec(dim, 0.0); };
    m.vol_apply = [sigma](const Vec&, const Vec& dw) {
        Vec out(dw);
        for (double& x : out) x *= sigma;
        return out;
    };
    m.emission_rate = [](const Vec& p, double y) { return scaled_sum(p) - y; };
    m.terminal = [cap](const Vec&, double e) { return e > cap ? 1.0 : 0.0; };
    m.brownian_map = [sigma](double, const Vec& w) {
        Vec out(w);
        for (double& x : out) x *= sigma;
        return out;
    };
    m.flux_primitive = [](const Vec& p, double y) { return scaled_sum(p) * y - 0.5 * y * y; };
    m.terminal_particle = cap;
    return m;
}

ModelSpec make_bm_positive_model(int dim, double sigma, double horizon) {
    check_common(dim, sigma);
    ModelSpec m;
    m.dim = dim;
    m.horizon = horizon;
    m.kind = ModelKind::BmPositive;
    m.initial_point.assign(dim, 0.0);
    m.params.sigma = sigma;
    m.drift = [dim](const Vec&) { return Vec(dim, 0.0); };
    m.vol_apply = [sigma](const Vec&, const Vec& dw) {
        Vec out(dw);
        for (double& x : out) x *= sigma;
        return out;
    };
    m.emission_rate = [](const Vec& p, double y) { return 1.0 + logistic(scaled_sum(p)) - y; };
    m.terminal = [](const Vec&, double e) { return e >= 0.0 ? 1.0 : 0.0; };
    m.brownian_map = [sigma](double, const Vec& w) {
        Vec out(w);
        for (double& x : out) x *= sigma;
        return out;
    };
    m.flux_primitive = [](const Vec& p, double y) {
        return (1.0 + logistic(scaled_sum(p))) * y - 0.5 * y * y;
    };
    m.terminal_particle = 0.0;
    return m;
}

ModelSpec make_multiplicative_model(int dim, double gbm_drift, double sigma, double theta,
                                    double horizon) {
    check_common(dim, sigma);
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    ModelSpec m;
    m.dim = dim;
    m.horizon = horizon;
    m.kind = ModelKind::Multiplicative;
    m.positive_state = true;
    m.initial_point.assign(dim, 1.0);
    m.params.sigma = sigma;
    m.params.theta = theta;
    m.params.gbm_drift = gbm_drift;
    m.drift = [gbm_drift](const Vec& p) {
        Vec out(p);
        for (double& x : out) x *= gbm_drift;
        return out;
    };
    m.vol_apply = [sigma](const Vec& p, const Vec& dw) {
        Vec out(dw.size());
        for (std::size_t i = 0; i < dw.size(); ++i) out[i] = sigma * p[i] * dw[i];
        return out;
    };
    m.emission_rate = [theta](const Vec& p, double y) {
        return scaled_product(p) * std::exp(-theta * y);
    };
    m.terminal = [](const Vec&, double e) { return e >= 0.0 ? 1.0 : 0.0; };
    m.brownian_map = [gbm_drift, sigma](double t, const Vec& w) {
        Vec out(w.size());
        const double drift_term = (gbm_drift - 0.5 * sigma * sigma) * t;
        for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::exp(drift_term + sigma * w[i]);
        return out;
    };
    m.flux_primitive = [theta](const Vec& p, double y) {
        return scaled_product(p) * (1.0 - std::exp(-theta * y)) / theta;
    };
    m.terminal_particle = 0.0;
    return m;
}

double flux(const ModelSpec& model, const Vec& p, double y) {
    y = std::clamp(y, 0.0, 1.0);
    if (model.flux_primitive) return model.flux_primitive(p, y);
    if (y == 0.0) return 0.0;
    return integrate([&](double u) { return model.emission_rate(p, u); }, 0.0, y, 1e-12);
}

ModelSpec reduce_to_1d(const ModelSpec& model) {
    switch (model.kind) {
        case ModelKind::Linear:
            return make_linear_model(1, model.params.sigma, model.params.cap, model.horizon);
        case ModelKind::BmPositive:
            return make_bm_positive_model(1, model.params.sigma, model.horizon);
        case ModelKind::Multiplicative: {
            // The scaled product of d independent GBMs is itself a GBM:
            // exp(sqrt(d)(a - s^2/2) t + s B_t), i.e. geometric drift
            // sqrt(d)(a - s^2/2) + s^2/2 at unchanged volatility s.
            const double a = model.params.gbm_drift;
            const double s = model.params.sigma;
            const double root_d = std::sqrt(static_cast<double>(model.dim));
            const double reduced_drift = root_d * (a - 0.5 * s * s) + 0.5 * s * s;
            return make_multiplicative_model(1, reduced_drift, s, model.params.theta,
                                             model.horizon);
        }
        default:
            throw std::invalid_argument("model has no registered one-dimensional reduction");
    }
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "coercivity [" << coercivity_lower << ", " << coercivity_upper << "]"
       << (coercive() ? "" : "  VIOLATION: lower bound not positive") << "\n"
       << "mu strictly decreasing in y: " << (mu_strictly_decreasing ? "yes" : "NO") << "\n"
       << "mu range [" << mu_min << ", " << mu_max << "], Lipschitz(p) <= " << mu_lipschitz_p
       << "\n"
       << "phi non-decreasing in e: " << (phi_monotone ? "yes" : "NO")
       << ", in [0,1]: " << (phi_in_range ? "yes" : "NO")
       << ", Lipschitz(p) <= " << phi_lipschitz_p << "\n"
       << "class check: " << (passed() ? "PASS" : "FAIL");
    return os.str();
}

ValidationReport validate_class(const ModelSpec& model, const PBounds& box, int samples,
                                std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("validation needs at least 2 samples");
    if (static_cast<int>(box.lo.size()) != model.dim ||
        static_cast<int>(box.hi.size()) != model.dim) {
        throw std::invalid_argument("validation box dimension mismatch");
    }
    Rng rng(seed);
    auto draw_p = [&] {
        Vec p(model.dim);
        for (int k = 0; k < model.dim; ++k) p[k] = rng.uniform(box.lo[k], box.hi[k]);
        return p;
    };

    ValidationReport rep;
    rep.coercivity_lower = std::numeric_limits<double>::infinity();
    rep.coercivity_upper = -std::numeric_limits<double>::infinity();
    rep.mu_min = std::numeric_limits<double>::infinity();
    rep.mu_max = -std::numeric_limits<double>::infinity();

    const double e_lo = -4.0, e_hi = 4.0;
    for (int s = 0; s < samples; ++s) {
        const Vec p = draw_p();
        const Vec q = draw_p();
        double y = rng.uniform();
        double y2 = rng.uniform();
        if (y == y2) y2 = (y2 < 0.5) ? y2 + 0.25 : y2 - 0.25;

        const double mu_y = model.emission_rate(p, y);
        const double mu_y2 = model.emission_rate(p, y2);
        const double num = (y - y2) * (mu_y2 - mu_y);
        const double ratio = num / ((y - y2) * (y - y2));
        rep.coercivity_lower = std::min(rep.coercivity_lower, ratio);
        rep.coercivity_upper = std::max(rep.coercivity_upper, ratio);
        if (!(num > 0.0)) rep.mu_strictly_decreasing = false;

        rep.mu_min = std::min({rep.mu_min, mu_y, mu_y2});
        rep.mu_max = std::max({rep.mu_max, mu_y, mu_y2});

        double pq = 0.0;
        for (int k = 0; k < model.dim; ++k) {
            const double dk = p[k] - q[k];
            pq += dk * dk;
        }
        pq = std::sqrt(pq);
        if (pq > 1e-12) {
            rep.mu_lipschitz_p =
                std::max(rep.mu_lipschitz_p, std::abs(model.emission_rate(q, y) - mu_y) / pq);
        }

        double e = rng.uniform(e_lo, e_hi);
        double e2 = rng.uniform(e_lo, e_hi);
        if (e > e2) std::swap(e, e2);
        const double phi_a = model.terminal(p, e);
        const double phi_b = model.terminal(p, e2);
        if (phi_a > phi_b) rep.phi_monotone = false;
        if (phi_a < 0.0 || phi_a > 1.0 || phi_b < 0.0 || phi_b > 1.0) rep.phi_in_range = false;
        if (pq > 1e-12) {
            rep.phi_lipschitz_p =
                std::max(rep.phi_lipschitz_p, std::abs(model.terminal(q, e) - phi_a) / pq);
        }
    }
    return rep;
}

} // namespace fbsde
