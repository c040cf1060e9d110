#include <doctest.h>

#include "fbsde/rng.hpp"
#include "fbsde/transport.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace fbsde;
using fbsde::testing::constant_rate_model;

namespace {

GridFunction random_monotone(Rng& rng, int count) {
    GridFunction v(count);
    for (double& x : v) x = rng.uniform();
    std::sort(v.begin(), v.end());
    return v;
}

double smooth_step(double e) { return 1.0 / (1.0 + std::exp(-8.0 * e)); }

} // namespace

TEST_CASE("grid transport consistency with constants") {
    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    const EGrid grid(21, -2.0, 2.0);
    const SubGrid sub(10, 0.1);
    const GridFunction flat(21, 0.37);
    CHECK(lax_friedrichs(lin, {0.8}, flat, grid, sub) == flat);

    const ModelSpec pos = make_bm_positive_model(1, 1.0);
    CHECK(upwind(pos, {0.8}, flat, grid, sub) == flat);
}

TEST_CASE("vanishing rate reduces the stencils") {
    const ModelSpec still = constant_rate_model(0.0);
    const EGrid grid(5, -1.0, 1.0);
    const GridFunction theta{0, 0, 1, 1, 1};

    // one two-sided sub-step is plain interior neighbor averaging
    CHECK(lax_friedrichs(still, {0.0}, theta, grid, SubGrid(1, 0.1)) ==
          GridFunction{0, 0.5, 0.5, 1, 1});
    // the one-sided stencil is the identity
    CHECK(upwind(still, {0.0}, theta, grid, SubGrid(7, 0.1)) == theta);
}

TEST_CASE("mismatched lengths are rejected") {
    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    const EGrid grid(5, -1.0, 1.0);
    CHECK_THROWS_AS(lax_friedrichs(lin, {0.0}, GridFunction(4, 0.0), grid, SubGrid(1, 0.1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(upwind(make_bm_positive_model(1, 1.0), {0.0}, GridFunction(9, 0.0), grid,
                           SubGrid(1, 0.1)),
                    std::invalid_argument);
}

TEST_CASE("upwind refuses rates of the wrong sign") {
    const ModelSpec neg = constant_rate_model(-0.5);
    const EGrid grid(11, -1.0, 1.0);
    CHECK_THROWS_AS(upwind(neg, {0.0}, GridFunction(11, 0.5), grid, SubGrid(2, 0.1)),
                    std::invalid_argument);
}

TEST_CASE("constant-rate advection converges to the exact shift") {
    // exact solution of the backward advection step: psi(e + c h)
    const double h = 0.5;
    auto error_for = [&](TransportKind kind, double c, int count) {
        const ModelSpec m = constant_rate_model(c);
        const EGrid grid(count, -2.0, 2.0);
        const int sub_count =
            static_cast<int>(std::ceil(std::abs(c) * h / (0.8 * grid.spacing())));
        const SubGrid sub(sub_count, h);
        GridFunction theta(count);
        for (int j = 0; j < count; ++j) theta[j] = smooth_step(grid.node(j));
        const GridFunction out = kind == TransportKind::Upwind
                                     ? upwind(m, {0.0}, theta, grid, sub)
                                     : lax_friedrichs(m, {0.0}, theta, grid, sub);
        double err = 0.0;
        for (int j = 0; j < count; ++j) {
            err = std::max(err, std::abs(out[j] - smooth_step(grid.node(j) + c * h)));
        }
        return err;
    };

    for (double c : {0.5, -0.5}) {
        const double e1 = error_for(TransportKind::LaxFriedrichs, c, 200);
        const double e2 = error_for(TransportKind::LaxFriedrichs, c, 400);
        const double e3 = error_for(TransportKind::LaxFriedrichs, c, 800);
        CHECK(e2 < e1);
        CHECK(e3 < e2);
        CHECK(std::log2(e1 / e3) / 2.0 >= 0.8);
    }
    const double u1 = error_for(TransportKind::Upwind, 0.5, 200);
    const double u3 = error_for(TransportKind::Upwind, 0.5, 800);
    CHECK(std::log2(u1 / u3) / 2.0 >= 0.8);
}

TEST_CASE("mass-averaged velocities") {
    SUBCASE("constant rate") {
        const ModelSpec m = constant_rate_model(0.7);
        const Vec v = spd_velocities(m, {0.0}, 5);
        for (double x : v) CHECK(x == doctest::Approx(-0.7).epsilon(1e-14));
    }
    SUBCASE("hand-computed two-particle case") {
        const Vec v = spd_velocities(fbsde::testing::decaying_rate_model(), {0.0}, 2);
        CHECK(v[0] == doctest::Approx(-0.75).epsilon(1e-14));
        CHECK(v[1] == doctest::Approx(-0.25).epsilon(1e-14));
    }
    SUBCASE("non-decreasing for admissible models") {
        Rng rng(37);
        const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
        for (int s = 0; s < 100; ++s) {
            const Vec v = spd_velocities(lin, {rng.uniform(-2.0, 2.0)}, 64);
            CHECK(std::is_sorted(v.begin(), v.end()));
        }
    }
    CHECK_THROWS_AS(spd_velocities(constant_rate_model(0.0), {0.0}, 0), std::invalid_argument);
}

TEST_CASE("sticky particle transport") {
    const ModelSpec decay = fbsde::testing::decaying_rate_model();
    const ParticleCDF start{{0.0, 0.0}};

    SUBCASE("zero horizon is the identity") {
        CHECK(spd_transport(decay, {0.0}, start, 0.0).positions == Vec{0.0, 0.0});
    }
    SUBCASE("constant rate moves everything rigidly") {
        const ModelSpec m = constant_rate_model(0.4);
        const ParticleCDF moved = spd_transport(m, {0.0}, ParticleCDF{{-1.0, 0.0, 2.0}}, 0.5);
        CHECK(moved.positions[0] == doctest::Approx(-1.2).epsilon(1e-14));
        CHECK(moved.positions[1] == doctest::Approx(-0.2).epsilon(1e-14));
        CHECK(moved.positions[2] == doctest::Approx(1.8).epsilon(1e-14));
    }
    SUBCASE("hand-computed spread") {
        const ParticleCDF moved = spd_transport(decay, {0.0}, start, 1.0);
        CHECK(moved.positions[0] == doctest::Approx(-0.75).epsilon(1e-14));
        CHECK(moved.positions[1] == doctest::Approx(-0.25).epsilon(1e-14));
    }
    SUBCASE("unsorted input is rejected") {
        CHECK_THROWS_AS(spd_transport(decay, {0.0}, ParticleCDF{{1.0, 0.0}}, 0.1),
                        std::invalid_argument);
    }
    SUBCASE("order is preserved") {
        Rng rng(41);
        const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
        for (int s = 0; s < 200; ++s) {
            ParticleCDF particles{random_monotone(rng, 32)};
            const ParticleCDF out =
                spd_transport(lin, {rng.uniform(-2.0, 2.0)}, particles, rng.uniform(0.0, 0.5));
            CHECK(std::is_sorted(out.positions.begin(), out.positions.end()));
        }
    }
}

TEST_CASE("empirical CDF evaluation") {
    const ParticleCDF p{{-1.0, 0.0, 0.0, 2.0}};
    CHECK(cdf_eval(p, -5.0) == 0.0);
    CHECK(cdf_eval(p, 5.0) == 1.0);
    CHECK(cdf_eval(p, 0.0) == doctest::Approx(0.75));
    CHECK(cdf_eval(p, -1.0) == doctest::Approx(0.25));
    CHECK(cdf_eval(p, -0.5) == doctest::Approx(0.25));
}

TEST_CASE("monotone scheme properties hold without tolerance") {
    Rng rng(43);
    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    const ModelSpec pos = make_bm_positive_model(1, 1.0);
    const EGrid grid(33, -2.0, 2.0);
    const SubGrid sub(8, 0.1);

    for (int s = 0; s < 300; ++s) {
        const GridFunction raw = random_monotone(rng, grid.count);
        // normalized profiles: class members share the pinned tails 0 and 1,
        // which the frozen-boundary stencils need for exact contraction
        GridFunction a = random_monotone(rng, grid.count);
        GridFunction b = random_monotone(rng, grid.count);
        a.front() = b.front() = 0.0;
        a.back() = b.back() = 1.0;
        const Vec p{rng.uniform(-2.0, 2.0)};

        for (int variant = 0; variant < 2; ++variant) {
            const ModelSpec& m = variant == 0 ? lin : pos;
            auto apply = [&](const GridFunction& theta) {
                return variant == 0 ? lax_friedrichs(m, p, theta, grid, sub)
                                    : upwind(m, p, theta, grid, sub);
            };
            const GridFunction out_raw = apply(raw);
            const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
            for (double x : out_raw) {
                CHECK(x >= *lo);
                CHECK(x <= *hi);
            }
            CHECK(is_monotone(out_raw));

            const GridFunction out_a = apply(a);
            const GridFunction out_b = apply(b);
            double in_dist = 0.0, out_dist = 0.0;
            for (int j = 0; j < grid.count; ++j) {
                in_dist += std::abs(a[j] - b[j]);
                out_dist += std::abs(out_a[j] - out_b[j]);
            }
            CHECK(out_dist <= in_dist);
        }
    }
}

TEST_CASE("particle and grid transport agree on one step") {
    // same initial profile, same frozen state: the empirical CDF of the
    // particle dynamics and the finite difference solutions stay close over
    // one splitting step
    const double h = 0.1;
    const int J = 2000, M = 4000;
    const EGrid grid(J, -2.0, 2.0);
    auto l1_between = [&](const GridFunction& fd, const ParticleCDF& cloud) {
        double l1 = 0.0;
        for (int j = 0; j < J; ++j) l1 += std::abs(fd[j] - cdf_eval(cloud, grid.node(j)));
        return l1 * grid.spacing();
    };

    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    const ParticleCDF particles{Vec(M, 0.0)};

    SUBCASE("two-sided stencil") {
        const Vec p{0.3};
        const int K = static_cast<int>(std::ceil(1.3 * h / (0.8 * grid.spacing())));
        const GridFunction theta = discretize_terminal(lin, p, grid);
        const GridFunction lf = lax_friedrichs(lin, p, theta, grid, SubGrid(K, h));
        const ParticleCDF moved = spd_transport(lin, p, particles, h);
        CHECK(l1_between(lf, moved) <= 0.01);
    }
    SUBCASE("one-sided stencil") {
        const Vec p{1.5}; // rate stays positive at this state
        const int K = static_cast<int>(std::ceil(1.5 * h / (0.8 * grid.spacing())));
        const GridFunction theta = discretize_terminal(lin, p, grid);
        const GridFunction up = upwind(lin, p, theta, grid, SubGrid(K, h));
        const ParticleCDF moved = spd_transport(lin, p, particles, h);
        CHECK(l1_between(up, moved) <= 0.01);
    }
}
