#pragma once

#include "fbsde/diffusion.hpp"
#include "fbsde/grids.hpp"
#include "fbsde/neuralreg.hpp"
#include "fbsde/transport.hpp"

#include <functional>
#include <optional>
#include <string>

namespace fbsde {

// Approximation of the time-zero solution profile e -> V(0, P_0, e) on an
// EGrid. Values are monotone in [0, 1]; for stochastic schemes the size of
// the isotonic correction is kept as a diagnostic.
struct SchemeResult {
    EGrid grid;
    GridFunction values;
    std::string scheme;
    std::string provenance;
    std::uint64_t seed = 0;
    int time_steps = 0;
    double runtime_seconds = 0.0;
    double monotonicity_defect = 0.0; // max adjacent inversion before projection
};

struct AltConfig {
    int time_steps = 20;
    int particles = 1000;
    double memory_budget_mb = 4096.0;
};

// Deterministic scheme: recombining cubature walk for the diffusion part,
// sticky particle transport at each node, backward from the indicator
// terminal. Requires a closed-form state map P_t = map(t, W_t).
SchemeResult run_alt_scheme(const ModelSpec& model, const AltConfig& cfg, const EGrid& grid);

struct NnConfig {
    int time_steps = 32;
    int sub_steps = 20; // K per transport application
    TransportKind transport = TransportKind::LaxFriedrichs;
    int paths = 5500;
    TrainConfig train;
    std::uint64_t seed = 1;
    std::optional<PBox> box; // default: 3-sigma box of the model
};

// Monte-Carlo + regression scheme: backward in time, each step fits the
// conditional expectation of the transported next-step profile with a
// feedforward net, Brownian-increment control variate included. The final
// profile is an average over a fresh ensemble, then isotonically projected.
SchemeResult run_nn_scheme(const ModelSpec& model, const EGrid& grid, const NnConfig& cfg);

// High-resolution reference: the deterministic scheme on the equivalent
// one-dimensional model, evaluated on the same grid.
SchemeResult run_proxy(const ModelSpec& model, const EGrid& grid, int time_steps = 64,
                       int particles = 3500, double memory_budget_mb = 4096.0);

// delta * sum_j |a_j - b_j| and max_j |a_j - b_j|; grids must match.
double l1_error(const SchemeResult& a, const SchemeResult& b);
double linf_error(const SchemeResult& a, const SchemeResult& b);
double l1_error(const EGrid& grid, const GridFunction& a, const GridFunction& b);
double linf_error(const GridFunction& a, const GridFunction& b);

struct RatePoint {
    int time_steps;
    double l1;
};

struct RateReport {
    std::vector<RatePoint> points;
    double slope = 0.0; // least squares slope of log(error) vs log(N)
    std::string reference;
};

// Least squares slope of log(err) against log(N); needs >= 3 positive points.
double fit_loglog_slope(const std::vector<RatePoint>& points);

// Runs `runner` for every N in Ns, measures the L1 distance to `reference`
// and fits the empirical convergence rate. Ns must be sorted with at least 3
// entries, the reference computed at a step count above max(Ns).
RateReport rate_experiment(const std::vector<int>& Ns, const SchemeResult& reference,
                           const std::function<SchemeResult(int)>& runner);

} // namespace fbsde
