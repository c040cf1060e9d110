#include <doctest.h>

#include "fbsde/diffusion.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"
#include "helpers.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

using namespace fbsde;

TEST_CASE("euler step") {
    const ModelSpec frozen = fbsde::testing::bm_positive_zero_vol(2);
    CHECK(euler_step(frozen, {0.4, -0.2}, 0.5, {1.0, 1.0}) == Vec{0.4, -0.2});

    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    CHECK(euler_step(lin, {0.0}, 0.1, {0.3})[0] == doctest::Approx(0.3).epsilon(1e-14));

    const ModelSpec mult = make_multiplicative_model(1, 0.1, 0.2, 1.0);
    CHECK(euler_step(mult, {1.0}, 0.1, {0.0})[0] == doctest::Approx(1.01).epsilon(1e-14));

    CHECK_THROWS_AS(euler_step(lin, {0.0}, 0.0, {0.1}), std::invalid_argument);
}

TEST_CASE("path sampling") {
    const ModelSpec lin = make_linear_model(1, 1.0, 0.0);
    const EulerSampler sampler{&lin, TimeGrid(4, 1.0), 99, lin.initial_point};

    SUBCASE("zero volatility keeps paths constant") {
        const ModelSpec frozen = fbsde::testing::bm_positive_zero_vol(2);
        const EulerSampler s{&frozen, TimeGrid(3, 1.0), 5, {0.1, 0.2}};
        const PathEnsemble paths = sample_paths(s, 50);
        for (int i = 0; i < paths.paths; ++i) {
            for (int n = 0; n <= paths.steps; ++n) {
                CHECK(paths.state(i, n)[0] == 0.1);
                CHECK(paths.state(i, n)[1] == 0.2);
            }
        }
    }
    SUBCASE("terminal mean within the Monte-Carlo band") {
        const PathEnsemble paths = sample_paths(sampler, 20000);
        double mean = 0.0;
        for (int i = 0; i < paths.paths; ++i) mean += paths.state(i, 4)[0];
        mean /= paths.paths;
        CHECK(std::abs(mean) <= 4.0 / std::sqrt(20000.0));
    }
    SUBCASE("identical seeds give identical ensembles") {
        const PathEnsemble a = sample_paths(sampler, 100);
        const PathEnsemble b = sample_paths(sampler, 100);
        CHECK(a.states == b.states);
        CHECK(a.increments == b.increments);
    }
    SUBCASE("ensemble prefix is stable under the path count") {
        const PathEnsemble small = sample_paths(sampler, 32);
        const PathEnsemble large = sample_paths(sampler, 64);
        for (std::size_t i = 0; i < small.states.size(); ++i) {
            CHECK(small.states[i] == large.states[i]);
        }
    }
    SUBCASE("worker count does not change the draw") {
        set_max_threads(1);
        const PathEnsemble serial = sample_paths(sampler, 64);
        set_max_threads(4);
        const PathEnsemble threaded = sample_paths(sampler, 64);
        set_max_threads(0);
        CHECK(serial.states == threaded.states);
    }
    SUBCASE("stream offsets give fresh draws") {
        const PathEnsemble a = sample_paths(sampler, 16, 0);
        const PathEnsemble b = sample_paths(sampler, 16, 1ULL << 32);
        CHECK(a.states != b.states);
    }
}

TEST_CASE("euler weak consistency for the multiplicative family") {
    const double gbm = 0.05;
    const ModelSpec mult = make_multiplicative_model(1, gbm, 0.3, 1.0);
    const EulerSampler sampler{&mult, TimeGrid(32, 1.0), 7, mult.initial_point};
    const PathEnsemble paths = sample_paths(sampler, 20000);
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < paths.paths; ++i) {
        const double x = paths.state(i, 32)[0];
        mean += x;
        sq += x * x;
    }
    mean /= paths.paths;
    const double sd = std::sqrt(sq / paths.paths - mean * mean);
    CHECK(std::abs(mean - std::exp(gbm)) <= 4.0 * sd / std::sqrt(20000.0) + 2e-3);
}

TEST_CASE("cubature increments") {
    SUBCASE("one-dimensional pair") {
        const auto pts = cubature_increments(1, 0.25);
        REQUIRE(pts.size() == 2);
        CHECK(pts[0].point == Vec{0.5});
        CHECK(pts[1].point == Vec{-0.5});
        CHECK(pts[0].probability == 0.5);
    }
    SUBCASE("zero mean and exact covariance") {
        for (int d : {1, 2, 3, 5, 8, 16}) {
            const double h = 0.37;
            const auto pts = cubature_increments(d, h);
            REQUIRE(static_cast<int>(pts.size()) == 2 * d);
            Vec mean(d, 0.0);
            std::vector<Vec> cov(d, Vec(d, 0.0));
            for (const auto& pt : pts) {
                for (int a = 0; a < d; ++a) {
                    mean[a] += pt.probability * pt.point[a];
                    for (int b = 0; b < d; ++b) {
                        cov[a][b] += pt.probability * pt.point[a] * pt.point[b];
                    }
                }
            }
            for (int a = 0; a < d; ++a) {
                CHECK(std::abs(mean[a]) <= 1e-14);
                for (int b = 0; b < d; ++b) {
                    CHECK(std::abs(cov[a][b] - (a == b ? h : 0.0)) <= 1e-14);
                }
            }
        }
    }
    CHECK_THROWS_AS(cubature_increments(0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(cubature_increments(1, 0.0), std::invalid_argument);
}

TEST_CASE("particle merging") {
    const ParticleCDF a{{0.0, 2.0}};
    const ParticleCDF b{{1.0, 3.0}};
    const std::vector<const ParticleCDF*> clouds{&a, &b};
    // sorted union (0,1,2,3); block midpoints at ranks 1 and 3
    CHECK(merge_particles(clouds).positions == Vec{0.0, 2.0});

    SUBCASE("identical clouds are a fixed point") {
        const ParticleCDF c{{-1.0, 0.5, 2.0}};
        const std::vector<const ParticleCDF*> same{&c, &c, &c, &c};
        CHECK(merge_particles(same).positions == c.positions);
    }
    SUBCASE("size mismatch is rejected") {
        const ParticleCDF bad{{1.0}};
        const std::vector<const ParticleCDF*> mixed{&a, &bad};
        CHECK_THROWS_AS(merge_particles(mixed), std::invalid_argument);
    }
    SUBCASE("output is sorted inside the input range") {
        Rng rng(47);
        for (int s = 0; s < 100; ++s) {
            std::vector<ParticleCDF> clouds_v(4);
            double lo = 1e300, hi = -1e300;
            for (auto& c : clouds_v) {
                c.positions.resize(16);
                for (double& x : c.positions) x = rng.uniform(-3.0, 3.0);
                std::sort(c.positions.begin(), c.positions.end());
                lo = std::min(lo, c.positions.front());
                hi = std::max(hi, c.positions.back());
            }
            std::vector<const ParticleCDF*> ptrs;
            for (auto& c : clouds_v) ptrs.push_back(&c);
            const ParticleCDF merged = merge_particles(ptrs);
            CHECK(std::is_sorted(merged.positions.begin(), merged.positions.end()));
            CHECK(merged.positions.front() >= lo);
            CHECK(merged.positions.back() <= hi);
        }
    }
    SUBCASE("merging commutes with rigid shifts") {
        Rng rng(53);
        std::vector<ParticleCDF> clouds_v(4), shifted_v(4);
        const double shift = 0.8125; // exactly representable
        for (int c = 0; c < 4; ++c) {
            clouds_v[c].positions.resize(8);
            for (double& x : clouds_v[c].positions) x = rng.uniform(-2.0, 2.0);
            std::sort(clouds_v[c].positions.begin(), clouds_v[c].positions.end());
            shifted_v[c] = clouds_v[c];
            for (double& x : shifted_v[c].positions) x += shift;
        }
        std::vector<const ParticleCDF*> base, moved;
        for (int c = 0; c < 4; ++c) {
            base.push_back(&clouds_v[c]);
            moved.push_back(&shifted_v[c]);
        }
        const Vec merged = merge_particles(base).positions;
        const Vec merged_shifted = merge_particles(moved).positions;
        for (std::size_t m = 0; m < merged.size(); ++m) {
            CHECK(merged_shifted[m] == merged[m] + shift);
        }
    }
}

TEST_CASE("lattice structure") {
    SUBCASE("level sizes match brute-force enumeration") {
        for (int d : {1, 2, 3}) {
            const CubatureLattice lat = build_lattice(d, 0.25, 8);
            // walk all (2d)^n step sequences and collect distinct endpoints
            std::set<std::vector<int>> support;
            support.insert(std::vector<int>(d, 0));
            for (int n = 1; n <= 8; ++n) {
                std::set<std::vector<int>> next;
                for (const auto& k : support) {
                    for (int l = 0; l < d; ++l) {
                        for (int sign : {+1, -1}) {
                            std::vector<int> child = k;
                            child[l] += sign;
                            next.insert(std::move(child));
                        }
                    }
                }
                support.swap(next);
                CHECK(static_cast<int>(support.size()) == lat.levels[n].count);
                CHECK(lattice_level_size(d, n) == doctest::Approx(support.size()));
            }
        }
    }
    SUBCASE("keys satisfy the parity and norm constraints") {
        const CubatureLattice lat = build_lattice(2, 0.5, 6);
        for (int n = 0; n <= 6; ++n) {
            for (int i = 0; i < lat.levels[n].count; ++i) {
                const auto k = lat.key(n, i);
                int norm = 0;
                for (int v : k) norm += std::abs(v);
                CHECK(norm <= n);
                CHECK((norm - n) % 2 == 0);
            }
        }
    }
    SUBCASE("every node finds its 2d children") {
        const CubatureLattice lat = build_lattice(3, 0.1, 5);
        for (int n = 0; n < 5; ++n) {
            for (int i = 0; i < lat.levels[n].count; ++i) {
                const auto k = lat.key(n, i);
                for (int l = 0; l < 3; ++l) {
                    for (int sign : {+1, -1}) {
                        std::vector<int> child(k.begin(), k.end());
                        child[l] += sign;
                        CHECK(lat.find(n + 1, child) >= 0);
                    }
                }
            }
        }
    }
    SUBCASE("node positions scale with sqrt(d h)") {
        const CubatureLattice lat = build_lattice(1, 1.0, 1);
        CHECK(lat.levels[1].count == 2);
        const Vec w0 = lat.node_position(1, 0);
        const Vec w1 = lat.node_position(1, 1);
        CHECK(w0[0] == doctest::Approx(-1.0));
        CHECK(w1[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("diffusion merge step") {
    SUBCASE("hand-traced single level") {
        const CubatureLattice lat = build_lattice(1, 1.0, 1);
        // level-1 keys sorted: -1 then +1
        std::vector<ParticleCDF> children{ParticleCDF{{0.0, 2.0}}, ParticleCDF{{1.0, 3.0}}};
        const auto parents = diffusion_merge_step(lat, 0, children);
        REQUIRE(parents.size() == 1);
        CHECK(parents[0].positions == Vec{0.0, 2.0});
    }
    SUBCASE("equal children give an equal parent") {
        const CubatureLattice lat = build_lattice(2, 0.5, 3);
        std::vector<ParticleCDF> children(lat.levels[3].count, ParticleCDF{{-0.5, 0.25, 1.0}});
        const auto parents = diffusion_merge_step(lat, 2, children);
        for (const auto& p : parents) CHECK(p.positions == Vec{-0.5, 0.25, 1.0});
    }
    SUBCASE("missing payloads are a hard failure") {
        const CubatureLattice lat = build_lattice(1, 1.0, 2);
        std::vector<ParticleCDF> wrong(1, ParticleCDF{{0.0}});
        CHECK_THROWS_AS(diffusion_merge_step(lat, 1, wrong), std::logic_error);
    }
    SUBCASE("parent CDF tracks the child mixture within one rank gap") {
        Rng rng(59);
        const CubatureLattice lat = build_lattice(2, 0.5, 1);
        const int M = 64;
        std::vector<ParticleCDF> children(lat.levels[1].count);
        for (auto& c : children) {
            c.positions.resize(M);
            for (double& x : c.positions) x = rng.uniform(-2.0, 2.0);
            std::sort(c.positions.begin(), c.positions.end());
        }
        const auto parents = diffusion_merge_step(lat, 0, children);
        for (int probe = 0; probe < 50; ++probe) {
            const double e = rng.uniform(-2.5, 2.5);
            double mixture = 0.0;
            for (const auto& c : children) mixture += cdf_eval(c, e);
            mixture /= children.size();
            CHECK(std::abs(cdf_eval(parents[0], e) - mixture) <= 1.0 / M + 1e-12);
        }
    }
}
