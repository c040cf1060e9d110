#include "fbsde/splitting.hpp"

#include "fbsde/errors.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/pava.hpp"
#include "fbsde/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fresh-ensemble streams must not overlap the training pool streams.
constexpr std::uint64_t kFreshStreamOffset = 1ULL << 32;

} // namespace

SchemeResult run_alt_scheme(const ModelSpec& model, const AltConfig& cfg, const EGrid& grid) {
    const auto start = Clock::now();
    if (!model.has_brownian_map()) {
        throw std::invalid_argument(
            "alternative scheme needs a closed-form state map P_t = map(t, W_t)");
    }
    if (!model.terminal_particle.has_value()) {
        throw std::invalid_argument(
            "alternative scheme supports indicator terminal conditions only");
    }
    if (cfg.time_steps < 1 || cfg.particles < 1) {
        throw std::invalid_argument("alternative scheme needs positive step and particle counts");
    }

    const int N = cfg.time_steps;
    const int M = cfg.particles;
    const double level_bytes = lattice_level_size(model.dim, N) * static_cast<double>(M) * 8.0;
    if (level_bytes > cfg.memory_budget_mb * 1024.0 * 1024.0) {
        std::ostringstream os;
        os << "cubature sweep would need " << level_bytes / (1024.0 * 1024.0)
           << " MiB for the final level, budget is " << cfg.memory_budget_mb << " MiB";
        throw MemoryBudgetError(os.str());
    }

    const double h = model.horizon / N;
    const CubatureLattice lattice = build_lattice(model.dim, h, N);

    std::vector<ParticleCDF> payload(
        lattice.levels[N].count,
        ParticleCDF{Vec(static_cast<std::size_t>(M), *model.terminal_particle)});

    for (int n = N - 1; n >= 0; --n) {
        std::vector<ParticleCDF> merged = diffusion_merge_step(lattice, n, payload);
        const double t_n = n * h;
        parallel_for(static_cast<std::size_t>(merged.size()), [&](std::size_t i) {
            const Vec p = model.brownian_map(t_n, lattice.node_position(n, static_cast<int>(i)));
            merged[i] = spd_transport(model, p, merged[i], h);
        });
        payload = std::move(merged);
    }

    const ParticleCDF& root = payload.front();
    GridFunction values(grid.count);
    for (int j = 0; j < grid.count; ++j) values[j] = cdf_eval(root, grid.node(j));

    std::ostringstream prov;
    prov << "alt N=" << N << " M=" << M << " d=" << model.dim;
    return SchemeResult{grid,  values, "alt", prov.str(), 0, N, seconds_since(start), 0.0};
}

SchemeResult run_nn_scheme(const ModelSpec& model, const EGrid& grid, const NnConfig& cfg) {
    const auto start = Clock::now();
    if (cfg.transport == TransportKind::Spd) {
        throw std::invalid_argument("regression scheme uses a grid transport (lf or upwind)");
    }
    if (cfg.paths < cfg.train.val_size + cfg.train.batch_size) {
        throw std::invalid_argument("path pool too small for the train/validation split");
    }
    const PBox box = cfg.box.value_or(default_pbox(model));
    const TimeGrid timegrid(cfg.time_steps, model.horizon);
    const SubGrid sub(cfg.sub_steps, timegrid.step());

    const double certificate = cfl_certificate(model, box, grid, sub);
    if (!(certificate < 1.0)) {
        std::ostringstream os;
        os << "CFL certificate " << certificate << " >= 1 on the projection box; "
           << "refine the transport sub-grid or shrink the box";
        throw CflError(os.str());
    }
    const bool use_upwind = cfg.transport == TransportKind::Upwind;
    if (use_upwind && min_emission_rate(model, box) < 0.0) {
        throw std::invalid_argument(
            "upwind transport requested but the emission rate changes sign on the box");
    }

    const int N = timegrid.steps;
    const int d = model.dim;
    const int J = grid.count;
    const int pool = cfg.paths;
    const int val_count = cfg.train.val_size;
    const int train_count = pool - val_count;

    const EulerSampler sampler{&model, timegrid, cfg.seed, model.initial_point};
    const PathEnsemble ensemble = sample_paths(sampler, pool, 0);

    auto apply_transport = [&](const Vec& p, const GridFunction& theta) {
        return use_upwind ? upwind(model, p, theta, grid, sub)
                          : lax_friedrichs(model, p, theta, grid, sub);
    };

    RegressionNet net;
    bool have_net = false;

    // gamma-bar at step n+1: terminal slice before any training happened,
    // clamped y-head of the step-(n+1) net afterwards.
    auto next_profile = [&](std::span<const double> p, NetScratch& ws) {
        if (!have_net) {
            Vec pv(p.begin(), p.end());
            return discretize_terminal(model, pv, grid);
        }
        net_forward(net, p, ws);
        GridFunction theta(ws.out.begin(), ws.out.begin() + J);
        clamp01(theta);
        return theta;
    };

    Vec inputs(static_cast<std::size_t>(pool) * d);
    Vec noise(static_cast<std::size_t>(pool) * d);
    Vec targets(static_cast<std::size_t>(pool) * J);

    for (int n = N - 1; n >= 1; --n) {
        parallel_for(static_cast<std::size_t>(pool), [&](std::size_t i) {
            NetScratch ws;
            const auto p_next = ensemble.state(static_cast<int>(i), n + 1);
            const GridFunction theta = next_profile(p_next, ws);
            const Vec projected = project_p(Vec(p_next.begin(), p_next.end()), box);
            const GridFunction target = apply_transport(projected, theta);
            std::copy(target.begin(), target.end(),
                      targets.begin() + i * static_cast<std::size_t>(J));
            const auto p_now = ensemble.state(static_cast<int>(i), n);
            std::copy(p_now.begin(), p_now.end(), inputs.begin() + i * static_cast<std::size_t>(d));
            const auto dw = ensemble.increment(static_cast<int>(i), n);
            std::copy(dw.begin(), dw.end(), noise.begin() + i * static_cast<std::size_t>(d));
        });

        if (!have_net) {
            net = RegressionNet(d, J);
            xavier_init(net, stream_seed(cfg.train.seed, 0xA11ULL));
            have_net = true;
        }
        // warm start: keep the step-(n+1) weights, refresh the input statistics
        set_standardization(net, std::span<const double>(inputs.data(),
                                                         static_cast<std::size_t>(train_count) * d),
                            train_count);

        TrainConfig step_cfg = cfg.train;
        step_cfg.seed = stream_seed(cfg.train.seed, 1000 + static_cast<std::uint64_t>(n));
        const RegressionBatch train_batch{
            std::span<const double>(inputs.data(), static_cast<std::size_t>(train_count) * d),
            std::span<const double>(noise.data(), static_cast<std::size_t>(train_count) * d),
            std::span<const double>(targets.data(), static_cast<std::size_t>(train_count) * J),
            train_count, d, J};
        const RegressionBatch val_batch{
            std::span<const double>(inputs.data() + static_cast<std::size_t>(train_count) * d,
                                    static_cast<std::size_t>(val_count) * d),
            std::span<const double>(noise.data() + static_cast<std::size_t>(train_count) * d,
                                    static_cast<std::size_t>(val_count) * d),
            std::span<const double>(targets.data() + static_cast<std::size_t>(train_count) * J,
                                    static_cast<std::size_t>(val_count) * J),
            val_count, d, J};
        train_time_step(net, train_batch, val_batch, step_cfg);
    }

    // initial time: plain Monte-Carlo average over a fresh ensemble
    const PathEnsemble fresh = sample_paths(sampler, pool, kFreshStreamOffset);
    constexpr int kChunks = 8;
    const int chunks = std::min(kChunks, pool);
    std::vector<GridFunction> partial(chunks, GridFunction(J, 0.0));
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const int begin = static_cast<int>(c) * pool / chunks;
        const int end = static_cast<int>(c + 1) * pool / chunks;
        NetScratch ws;
        GridFunction& acc = partial[c];
        for (int i = begin; i < end; ++i) {
            const auto p1 = fresh.state(i, 1);
            const GridFunction theta = next_profile(p1, ws);
            const Vec projected = project_p(Vec(p1.begin(), p1.end()), box);
            const GridFunction transported = apply_transport(projected, theta);
            for (int j = 0; j < J; ++j) acc[j] += transported[j];
        }
    });
    GridFunction values(J, 0.0);
    for (int c = 0; c < chunks; ++c) {
        for (int j = 0; j < J; ++j) values[j] += partial[c][j];
    }
    for (double& v : values) v /= pool;

    const double defect = max_adjacent_inversion(values);
    clamp01(values);
    isotonic_increasing(values);

    std::ostringstream prov;
    prov << "nn N=" << N << " K=" << cfg.sub_steps << " J=" << J << " d=" << d << " "
         << transport_name(cfg.transport) << " paths=" << pool;
    return SchemeResult{grid,   values, "nn", prov.str(), cfg.seed, N,
                        seconds_since(start), defect};
}

SchemeResult run_proxy(const ModelSpec& model, const EGrid& grid, int time_steps, int particles,
                       double memory_budget_mb) {
    const ModelSpec reduced = reduce_to_1d(model);
    SchemeResult out =
        run_alt_scheme(reduced, AltConfig{time_steps, particles, memory_budget_mb}, grid);
    out.scheme = "proxy";
    out.provenance = "proxy(" + out.provenance + ")";
    return out;
}

namespace {

void check_grids(const EGrid& a, const EGrid& b) {
    if (!(a == b)) throw std::invalid_argument("results live on different e-grids");
}

} // namespace

double l1_error(const EGrid& grid, const GridFunction& a, const GridFunction& b) {
    if (a.size() != b.size()) throw std::invalid_argument("grid function size mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a[j] - b[j]);
    return grid.spacing() * sum;
}

double linf_error(const GridFunction& a, const GridFunction& b) {
    if (a.size() != b.size()) throw std::invalid_argument("grid function size mismatch");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    return worst;
}

double l1_error(const SchemeResult& a, const SchemeResult& b) {
    check_grids(a.grid, b.grid);
    return l1_error(a.grid, a.values, b.values);
}

double linf_error(const SchemeResult& a, const SchemeResult& b) {
    check_grids(a.grid, b.grid);
    return linf_error(a.values, b.values);
}

double fit_loglog_slope(const std::vector<RatePoint>& points) {
    if (points.size() < 3) throw std::invalid_argument("rate fit needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (const auto& pt : points) {
        if (!(pt.l1 > 0.0)) throw std::invalid_argument("rate fit needs positive errors");
        mx += std::log(static_cast<double>(pt.time_steps));
        my += std::log(pt.l1);
    }
    mx /= points.size();
    my /= points.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& pt : points) {
        const double dx = std::log(static_cast<double>(pt.time_steps)) - mx;
        const double dy = std::log(pt.l1) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    return sxy / sxx;
}

RateReport rate_experiment(const std::vector<int>& Ns, const SchemeResult& reference,
                           const std::function<SchemeResult(int)>& runner) {
    if (Ns.size() < 3) throw std::invalid_argument("rate experiment needs at least 3 step counts");
    if (!std::is_sorted(Ns.begin(), Ns.end())) {
        throw std::invalid_argument("rate experiment step counts must be sorted");
    }
    if (reference.time_steps <= Ns.back()) {
        throw std::invalid_argument("reference must be computed above the largest step count");
    }
    RateReport report;
    report.reference = reference.provenance;
    for (int n : Ns) {
        const SchemeResult run = runner(n);
        report.points.push_back(RatePoint{n, l1_error(run, reference)});
    }
    report.slope = fit_loglog_slope(report.points);
    return report;
}

} // namespace fbsde
