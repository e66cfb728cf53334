#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gmfg/errors.hpp"
#include "gmfg/feynman_kac.hpp"
#include "gmfg/fixed_point.hpp"
#include "gmfg/parabolic.hpp"

using namespace gmfg;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
} // namespace

TEST_CASE("mc config validation") {
    McConfig cfg;
    cfg.n_paths = 10;
    CHECK_THROWS_AS(cfg.validate(0.0), InvalidInput);
    cfg.n_paths = 1000;
    cfg.dt_mc = 0.0;
    CHECK_THROWS_AS(cfg.validate(0.0), InvalidInput);
    cfg.dt_mc = 0.01;
    CHECK_THROWS_AS(cfg.validate(0.005), InvalidInput);  // dt_mc > solver dt
    CHECK_NOTHROW(cfg.validate(0.01));
}

TEST_CASE("mc_parabolic constant source integrates exactly") {
    McConfig cfg;
    cfg.n_paths = 500;
    cfg.dt_mc = 0.01;
    const auto zero = [](double, double) { return 0.0; };
    const auto one = [](double, double) { return 1.0; };

    const McEstimate est = mc_parabolic(zero, one, 0.2, 0.4, 1.0, cfg);
    CHECK(est.mean == doctest::Approx(0.8).epsilon(1e-13));
    CHECK(est.std_error == 0.0);

    // degenerate horizon
    const McEstimate none = mc_parabolic(zero, one, 1.0, 0.4, 1.0, cfg);
    CHECK(none.mean == 0.0);
    CHECK(none.std_error == 0.0);
}

TEST_CASE("mc_parabolic constant reaction has O(dt) bias only") {
    McConfig cfg;
    cfg.n_paths = 500;
    cfg.dt_mc = 1e-3;
    const auto one = [](double, double) { return 1.0; };
    const double T = 0.5;
    const McEstimate est = mc_parabolic(one, one, 0.0, 0.1, T, cfg);
    const double exact = 1.0 - std::exp(-T);
    CHECK(est.std_error == 0.0);  // the integrand does not depend on the path
    CHECK(std::abs(est.mean - exact) < 1.0 * cfg.dt_mc);
}

TEST_CASE("mc_parabolic agrees with the PDE solver on a spatial source") {
    McConfig cfg;
    cfg.n_paths = 400000;
    cfg.dt_mc = 5e-4;
    cfg.rng_seed = 99;
    const auto zero = [](double, double) { return 0.0; };
    const auto f = [](double, double x) { return std::sin(two_pi * x); };

    const TorusGrid grid(128);
    const TimeGrid tgrid(0.1, 200);
    ParabolicCoefficients coeffs;
    coeffs.c = TimeSpaceField(tgrid.n_levels(), grid.n);
    coeffs.f = TimeSpaceField(tgrid.n_levels(), grid.n);
    coeffs.psi.assign(128, 0.0);
    for (int k = 0; k < tgrid.n_levels(); ++k) {
        for (int i = 0; i < 128; ++i) {
            coeffs.f(k, i) = std::sin(two_pi * grid.nodes[static_cast<std::size_t>(i)]);
        }
    }
    const ParabolicSolution sol = solve(coeffs, grid, tgrid);

    // v(0, x) = u(T, x) for time-independent coefficients
    for (double x : {0.0, 0.25}) {
        const McEstimate est = mc_parabolic(zero, f, 0.0, x, tgrid.T, cfg, 2);
        const int node = static_cast<int>(std::round(x / grid.h));
        const double pde = sol.u(tgrid.n_t, node);
        CHECK(std::abs(est.mean - pde) <
              3.0 * est.std_error + 10.0 * (cfg.dt_mc + grid.h * grid.h));
    }
}

TEST_CASE("mc_parabolic is deterministic for a fixed seed") {
    McConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt_mc = 1e-2;
    cfg.rng_seed = 31337;
    const auto c = [](double, double x) { return 0.5 + 0.2 * std::sin(two_pi * x); };
    const auto f = [](double t, double x) { return std::cos(two_pi * x) + t; };
    const McEstimate a = mc_parabolic(c, f, 0.0, 0.3, 0.5, cfg, 2);
    const McEstimate b = mc_parabolic(c, f, 0.0, 0.3, 0.5, cfg, 1);
    CHECK(a.mean == b.mean);  // bit-identical for any thread count
    CHECK(a.std_error == b.std_error);
    // antithetic halves the pair count but reports total paths
    CHECK(a.n_paths == 2000);
}

TEST_CASE("particles from a uniform start stay uniform (chi-square)") {
    const TorusGrid grid(64);
    const TimeGrid tgrid(0.25, 50);
    McConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt_mc = tgrid.dt;
    cfg.rng_seed = 2718;
    TimeSpaceField drift(tgrid.n_levels(), 64);
    std::vector<double> weights(64, 1.0 / 64.0);
    const auto hist = simulate_particles(drift, weights, grid, tgrid, cfg, 2);

    const double expected = static_cast<double>(cfg.n_paths) / 64.0;
    double chi2 = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double observed = hist.back()[static_cast<std::size_t>(i)] * cfg.n_paths;
        chi2 += (observed - expected) * (observed - expected) / expected;
    }
    // Wilson-Hilferty 99% quantile of chi2 with 63 dof
    const double k = 63.0;
    const double q99 = k * std::pow(1.0 - 2.0 / (9.0 * k) + 2.326 * std::sqrt(2.0 / (9.0 * k)), 3);
    CHECK(chi2 < q99);
}

TEST_CASE("particle histograms are bit-identical across runs and thread counts") {
    const TorusGrid grid(32);
    const TimeGrid tgrid(0.1, 20);
    McConfig cfg;
    cfg.n_paths = 5000;
    cfg.dt_mc = tgrid.dt / 2;
    cfg.rng_seed = 11;
    TimeSpaceField drift(tgrid.n_levels(), 32);
    for (int k = 0; k < drift.levels; ++k) {
        for (int i = 0; i < 32; ++i) {
            drift(k, i) = 0.3 * std::sin(two_pi * grid.nodes[static_cast<std::size_t>(i)]);
        }
    }
    std::vector<double> weights(32, 1.0 / 32.0);
    const auto a = simulate_particles(drift, weights, grid, tgrid, cfg, 1);
    const auto b = simulate_particles(drift, weights, grid, tgrid, cfg, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i < a[k].size(); ++i) CHECK(a[k][i] == b[k][i]);
    }
}

TEST_CASE("cost functional closed forms") {
    const TorusGrid grid(32);
    const AlphaGrid agrid(2);
    const TimeGrid tgrid(0.5, 50);
    Field3 mu(tgrid.n_levels(), 2, 32);
    for (double& v : mu.data) v = 1.0;
    McConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt_mc = tgrid.dt;
    const TimeSpaceField zero_control(tgrid.n_levels(), 32);

    SUBCASE("zero control, zero coupling") {
        CostModel cost(grid, agrid, ell2_matrix_from_expression("cos(2*pi*(x-y))", grid),
                       Graphon::constant(0.0));
        const McEstimate est = cost_functional(zero_control, mu, cost, 0, DriftPotential::zero(),
                                               grid, agrid, tgrid, cfg);
        CHECK(est.mean == 0.0);
        CHECK(est.std_error == 0.0);
    }

    SUBCASE("constant coupling integrates to p T") {
        CostModel cost(grid, agrid, ell2_matrix_from_expression("1", grid),
                       Graphon::constant(0.7));
        const McEstimate est = cost_functional(zero_control, mu, cost, 1, DriftPotential::zero(),
                                               grid, agrid, tgrid, cfg);
        CHECK(est.mean == doctest::Approx(0.7 * tgrid.T).epsilon(1e-12));
        CHECK(est.std_error <= 1e-12);
    }
}
