#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdq/branching.hpp"
#include "sdq/lst.hpp"
#include "test_support.hpp"

using namespace sdq;
using testsupport::k1_spec;
using testsupport::k2_cross_spec;
using testsupport::k2_symmetric_spec;

TEST_CASE("geometric grid shape") {
    Vec g = geometric_grid(1e-3, 1e2, 64);
    REQUIRE(g.size() == 64);
    CHECK(g.front() == Catch::Approx(1e-3).margin(1e-15));
    CHECK(g.back() == Catch::Approx(1e2).margin(1e-10));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("no-offspring rows collapse to the service transform") {
    ModelSpec spec = k2_symmetric_spec();
    spec.lambda = Mat(2, 2);
    Vec thetas = geometric_grid(1e-2, 10.0, 16);
    LstGrid grid = solve_fixed_point(spec, thetas);
    for (std::size_t p = 0; p < thetas.size(); ++p) {
        CHECK(grid.g(0, p) == Catch::Approx(spec.service[0].lst(thetas[p])).margin(1e-12));
        CHECK(grid.g(1, p) == Catch::Approx(spec.service[1].lst(thetas[p])).margin(1e-12));
    }
}

TEST_CASE("classic single-class busy-period transform value") {
    // lambda = 1/2, mu = 1, theta = 1: g = (mu+theta+lambda - sqrt((...)^2 - 4 lambda mu))/(2 lambda)
    ModelSpec spec = k1_spec(0.5, 1.0);
    LstGrid grid = solve_fixed_point(spec, {1.0});
    CHECK(grid.g(0, 0) == Catch::Approx(0.4384471871911697).margin(1e-10));
    CHECK(grid.residual[0] <= grid.tol);
    CHECK(grid.iterations[0] >= 1);
}

TEST_CASE("closed form two-class oracle behaves") {
    // stable: theta -> 0 recovers certainty of a finite busy period
    auto at0 = closed_form_k2(2.0, 2.0, 1.0, 1.0, 0.0);
    CHECK(at0.first == Catch::Approx(1.0).margin(1e-10));
    CHECK(at0.second == Catch::Approx(1.0).margin(1e-10));
    // pinned interior point: mu = 2, lambda = 1, theta = 1 gives 2 - sqrt(2)
    auto at1 = closed_form_k2(2.0, 2.0, 1.0, 1.0, 1.0);
    CHECK(at1.first == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-12));
    CHECK(at1.second == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-12));
    // transform of a positive variable dies at large theta
    auto far = closed_form_k2(2.0, 2.0, 1.0, 1.0, 1e6);
    CHECK(far.first < 1e-4);
    CHECK(far.second < 1e-4);
}

TEST_CASE("fixed point matches the closed form across the grid") {
    sdq::Rng rng(11, 0);
    Vec thetas = geometric_grid(1e-3, 1e2, 64);
    for (int trial = 0; trial < 5; ++trial) {
        double mu1 = 0.5 + 3.0 * rng.u01(), mu2 = 0.5 + 3.0 * rng.u01();
        double l12 = 0.2 + 2.0 * rng.u01(), l21 = 0.2 + 2.0 * rng.u01();
        double rho = std::sqrt(l12 * l21 / (mu1 * mu2));
        double target = 0.3 + 0.6 * rng.u01();
        double scale = target / rho;
        l12 *= scale;
        l21 *= scale;
        ModelSpec spec = k2_cross_spec(mu1, mu2, l12, l21);
        LstGrid grid = solve_fixed_point(spec, thetas);
        double worst = 0.0;
        for (std::size_t p = 0; p < thetas.size(); ++p) {
            auto oracle = closed_form_k2(mu1, mu2, l12, l21, thetas[p]);
            worst = std::max(worst, std::fabs(grid.g(0, p) - oracle.first));
            worst = std::max(worst, std::fabs(grid.g(1, p) - oracle.second));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("grid values stay in (0,1], non-increasing in theta, residual within tol") {
    ModelSpec spec = testsupport::random_spec(31337, 0.8);
    Vec thetas = geometric_grid(1e-3, 50.0, 40);
    LstGrid grid = solve_fixed_point(spec, thetas);
    for (int i = 0; i < spec.k; ++i) {
        double prev = 1.0;
        for (std::size_t p = 0; p < thetas.size(); ++p) {
            double v = grid.g(i, p);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v <= prev + 1e-10);
            prev = v;
        }
    }
    for (double r : grid.residual) CHECK(r <= grid.tol);
}

TEST_CASE("theta = 0 is answered as the extinction limit") {
    LstGrid grid = solve_fixed_point(k2_symmetric_spec(), {0.0, 1.0});
    CHECK(grid.g(0, 0) == 1.0);
    CHECK(grid.g(1, 0) == 1.0);
    CHECK(grid.iterations[0] == 0);
}

TEST_CASE("supercritical specs are rejected, boundary ones accepted") {
    CHECK_THROWS_AS(solve_fixed_point(k2_cross_spec(2.0, 2.0, 3.0, 3.0), {1.0}),
                    StabilityViolation);
    ModelSpec boundary = k2_cross_spec(2.0, 2.0, 2.0, 2.0); // rho = 1
    CHECK_NOTHROW(solve_fixed_point(boundary, {0.5}));
}

TEST_CASE("iteration cap raises NonConvergence") {
    LstOptions opts;
    opts.max_iter = 3;
    ModelSpec spec = testsupport::random_spec(5, 0.95);
    CHECK_THROWS_AS(solve_fixed_point(spec, {1e-3}, opts), NonConvergence);
}

TEST_CASE("conditional transform: pinned cases") {
    ModelSpec spec = k1_spec(0.5, 1.0);
    LstGrid grid = solve_fixed_point(spec, {1.0});
    Vec at_zero = conditional_lst(spec, 0, 0.0, grid);
    CHECK(at_zero[0] == 1.0);

    // remaining service 2 at theta 1: exp(-2 (1 + 0.5 - 0.5 g)) with the
    // pinned g value above
    Vec at_two = conditional_lst(spec, 0, 2.0, grid);
    CHECK(at_two[0] == Catch::Approx(0.0771847938035969).margin(1e-9));

    // no arrivals: conditional transform is the point mass e^{-s theta}
    ModelSpec lone = k1_spec(0.0, 1.0);
    LstGrid lone_grid = solve_fixed_point(lone, {0.7});
    Vec v = conditional_lst(lone, 0, 1.5, lone_grid);
    CHECK(v[0] == Catch::Approx(std::exp(-1.5 * 0.7)).margin(1e-12));
}

TEST_CASE("conditional transform integrates back to the class transform") {
    // E[g_{i,S}] over S ~ F_i reproduces g_i; check by Monte Carlo over the
    // service distribution
    ModelSpec spec = k2_symmetric_spec();
    LstGrid grid = solve_fixed_point(spec, {0.8});
    Rng rng(5150, 0);
    const int n = 200000;
    double sum = 0.0;
    for (int r = 0; r < n; ++r) {
        double s = spec.service[0].sample(rng);
        sum += conditional_lst(spec, 0, s, grid)[0];
    }
    CHECK(std::fabs(sum / n - grid.g(0, 0)) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("initial-state transform is the power product") {
    ModelSpec spec = k2_symmetric_spec();
    Vec thetas = geometric_grid(1e-2, 10.0, 8);
    LstGrid grid = solve_fixed_point(spec, thetas);
    Vec empty = initial_state_lst(spec, {0, 0}, grid);
    Vec single = initial_state_lst(spec, {1, 0}, grid);
    Vec mixed = initial_state_lst(spec, {2, 1}, grid);
    for (std::size_t p = 0; p < thetas.size(); ++p) {
        CHECK(empty[p] == 1.0);
        CHECK(single[p] == grid.g(0, p));
        CHECK(mixed[p] ==
              Catch::Approx(grid.g(0, p) * grid.g(0, p) * grid.g(1, p)).margin(1e-12));
    }
}

TEST_CASE("moments from the transform: pinned values") {
    MomentEstimate scalar = moments_from_lst(k1_spec(0.5, 1.0));
    CHECK(std::fabs(scalar.mean_busy[0] - 2.0) < 1e-4 * 2.0);

    ModelSpec lone = k1_spec(0.0, 1.0);
    lone.service[0] = ServiceDistribution::erlang(3, 4.0);
    MomentEstimate solo = moments_from_lst(lone);
    CHECK(std::fabs(solo.mean_busy[0] - 0.75) < 1e-6);

    MomentEstimate sym = moments_from_lst(k2_symmetric_spec());
    CHECK(std::fabs(sym.mean_busy[0] - 1.0) < 1e-4);
    CHECK(std::fabs(sym.mean_busy[1] - 1.0) < 1e-4);

    CHECK_THROWS_AS(moments_from_lst(k2_cross_spec(2.0, 2.0, 3.0, 3.0)), StabilityViolation);
}

TEST_CASE("moments agree with the expectation table on random stable specs") {
    for (int trial = 0; trial < 6; ++trial) {
        ModelSpec spec = testsupport::random_spec(8800 + trial, 0.3 + 0.08 * trial);
        MomentEstimate mom = moments_from_lst(spec);
        ExpectationTable table = expectations(spec);
        for (int i = 0; i < spec.k; ++i)
            CHECK(std::fabs(mom.mean_busy[i] - table.mean_busy[i]) <=
                  1e-4 * std::max(1.0, table.mean_busy[i]));
    }
}

TEST_CASE("monte carlo transform of sampled trees matches the fixed point") {
    ModelSpec spec = k1_spec(0.5, 1.0);
    Vec thetas = {0.1, 0.5, 1.0, 2.0, 5.0};
    LstGrid grid = solve_fixed_point(spec, thetas);
    const int n = 100000;
    for (std::size_t p = 0; p < thetas.size(); ++p) {
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < n; ++r) {
            Rng rng(777, r);
            GwTreeSample t = sample_tree(spec, 0, {}, rng);
            double v = std::exp(-thetas[p] * t.total_lifetime);
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / n;
        double se = std::sqrt((sum2 / n - mean * mean) / n);
        CHECK(std::fabs(mean - grid.g(0, p)) < 3.0 * se);
    }
}
