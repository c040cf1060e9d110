#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fbsde {

using Vec = std::vector<double>;

enum class ModelKind { Linear, BmPositive, Multiplicative, Custom };

struct ModelParams {
    double sigma = 1.0;     // driving volatility
    double cap = 0.0;       // terminal indicator threshold (linear model)
    double theta = 1.0;     // exponential decay of the multiplicative rate
    double gbm_drift = 0.0; // geometric drift of the multiplicative state
};

// One coefficient family (b, sigma, mu, phi) of the forward-backward system
//
//   dP = b(P) dt + sigma(P) dW,   dE = mu(P, Y) dt,   dY = Z . dW,
//
// with terminal condition Y_T ~ phi(P_T, E_T). The emission rate mu is
// strictly decreasing in y on [0, 1] and phi maps into [0, 1], non-decreasing
// in e. Instances are immutable after construction; all members are pure.
struct ModelSpec {
    int dim = 1;
    double horizon = 1.0;
    ModelKind kind = ModelKind::Custom;
    bool positive_state = false; // state lives in the positive orthant
    Vec initial_point;
    ModelParams params;

    std::function<Vec(const Vec&)> drift;                    // b(p)
    std::function<Vec(const Vec&, const Vec&)> vol_apply;    // sigma(p) * dw
    std::function<double(const Vec&, double)> emission_rate; // mu(p, y)
    std::function<double(const Vec&, double)> terminal;      // phi(p, e)

    // Exact state map P_t = brownian_map(t, W_t), when one exists.
    std::function<Vec(double, const Vec&)> brownian_map;
    // Closed-form antiderivative y -> integral_0^y mu(p, u) du, when registered.
    std::function<double(const Vec&, double)> flux_primitive;
    // Particle position whose Heaviside CDF equals phi (indicator terminals).
    std::optional<double> terminal_particle;

    bool has_brownian_map() const { return static_cast<bool>(brownian_map); }
};

// dP = sigma dW, mu(p, y) = (1/sqrt(d)) sum_l p_l - y, phi = 1{e > cap}.
ModelSpec make_linear_model(int dim, double sigma, double cap, double horizon = 1.0);

// dP = sigma dW, mu(p, y) = 1 + logistic((1/sqrt(d)) sum_l p_l) - y >= 0,
// phi = 1{e >= 0}.
ModelSpec make_bm_positive_model(int dim, double sigma, double horizon = 1.0);

// dP_l = gbm_drift P_l dt + sigma P_l dW_l with P_0 = 1,
// mu(p, y) = (prod_l p_l)^(1/sqrt(d)) exp(-theta y), phi = 1{e >= 0}.
ModelSpec make_multiplicative_model(int dim, double gbm_drift, double sigma, double theta,
                                    double horizon = 1.0);

// Cumulative rate M(p, y) = integral_0^y mu(p, u) du with y clamped to [0, 1].
// Uses the registered antiderivative when present, else adaptive quadrature
// to 1e-12 absolute.
double flux(const ModelSpec& model, const Vec& p, double y);

// Equivalent one-dimensional model: the law of the solution profile at time 0
// is preserved. Only the built-in families have a registered reduction.
ModelSpec reduce_to_1d(const ModelSpec& model);

struct PBounds {
    Vec lo, hi;
};

struct ValidationReport {
    double coercivity_lower = 0.0; // min sampled (y-y')(mu(p,y')-mu(p,y)) / |y-y'|^2
    double coercivity_upper = 0.0; // max of the same ratio
    double mu_lipschitz_p = 0.0;
    double phi_lipschitz_p = 0.0;
    double mu_min = 0.0;
    double mu_max = 0.0;
    bool mu_strictly_decreasing = true;
    bool phi_monotone = true;
    bool phi_in_range = true;

    bool coercive() const { return coercivity_lower > 0.0; }
    bool passed() const {
        return coercive() && mu_strictly_decreasing && phi_monotone && phi_in_range;
    }
    std::string summary() const;
};

// Monte-Carlo estimates of the structural constants over a state box; flags
// violations instead of throwing.
ValidationReport validate_class(const ModelSpec& model, const PBounds& box, int samples,
                                std::uint64_t seed = 0x5eedULL);

} // namespace fbsde
