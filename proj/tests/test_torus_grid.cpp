#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gmfg/errors.hpp"
#include "gmfg/torus_grid.hpp"

using namespace gmfg;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

GridFunction sample(const TorusGrid& grid, double (*f)(double)) {
    GridFunction u(static_cast<std::size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i) u[static_cast<std::size_t>(i)] = f(grid.nodes[i]);
    return u;
}

double max_err(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("wrap maps onto the fundamental domain") {
    CHECK(wrap(1.25) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(wrap(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(wrap(-0.1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(wrap(3.0) == 0.0);
    CHECK_THROWS_AS(wrap(std::nan("")), InvalidInput);
    CHECK_THROWS_AS(wrap(std::numeric_limits<double>::infinity()), InvalidInput);
}

TEST_CASE("torus distance takes the shorter arc") {
    CHECK(torus_distance(0.1, 0.9) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(torus_distance(0.3, 0.3) == 0.0);
    CHECK(torus_distance(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(torus_distance(std::nan(""), 0.0), InvalidInput);
}

TEST_CASE("grid construction invariants") {
    CHECK_THROWS_AS(TorusGrid(3), InvalidInput);
    const TorusGrid grid(64);
    CHECK(grid.h * grid.n == doctest::Approx(1.0).epsilon(1e-16));
    CHECK(grid.nodes[0] == 0.0);
    CHECK(grid.nodes[63] == doctest::Approx(63.0 / 64.0).epsilon(1e-15));
}

TEST_CASE("gradient against analytic derivatives") {
    const TorusGrid grid(64);
    const auto u = sample(grid, [](double x) { return std::sin(two_pi * x); });
    const auto expected = sample(grid, [](double x) { return two_pi * std::cos(two_pi * x); });
    const double h2 = grid.h * grid.h;
    CHECK(max_err(gradient(grid, u), expected) < 10.0 * two_pi * two_pi * h2);

    const auto v = sample(grid, [](double x) { return std::cos(two_pi * x); });
    const auto dv = sample(grid, [](double x) { return -two_pi * std::sin(two_pi * x); });
    CHECK(max_err(gradient(grid, v), dv) < 10.0 * two_pi * two_pi * h2);

    const GridFunction c(64, 3.7);
    for (double g : gradient(grid, c)) CHECK(g == 0.0);
}

TEST_CASE("laplacian against analytic derivatives and conservation") {
    const TorusGrid grid(64);
    const auto u = sample(grid, [](double x) { return std::sin(two_pi * x); });
    const auto expected =
        sample(grid, [](double x) { return -two_pi * two_pi * std::sin(two_pi * x); });
    CHECK(max_err(laplacian(grid, u), expected) < 0.1);

    const GridFunction c(64, -1.25);
    for (double g : laplacian(grid, c)) CHECK(g == 0.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridFunction random_u(64);
    for (double& v : random_u) v = unit(rng);
    double sum = 0.0;
    for (double v : laplacian(grid, random_u)) sum += v;
    CHECK(std::abs(grid.h * sum) < 1e-12);
}

TEST_CASE("divergence is conservative and second order") {
    const TorusGrid grid(64);
    const GridFunction c(64, 2.0);
    for (double g : divergence(grid, c)) CHECK(g == 0.0);

    const auto flux = sample(grid, [](double x) { return std::sin(two_pi * x); });
    const auto expected = sample(grid, [](double x) { return two_pi * std::cos(two_pi * x); });
    CHECK(max_err(divergence(grid, flux), expected) < 0.05);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridFunction random_f(64);
    for (double& v : random_f) v = unit(rng);
    double sum = 0.0;
    for (double v : divergence(grid, random_f)) sum += v;
    CHECK(std::abs(grid.h * sum) < 1e-12);
}

TEST_CASE("operators commute with cyclic shifts") {
    const TorusGrid grid(32);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridFunction u(32);
    for (double& v : u) v = unit(rng);

    const int shift = 9;
    GridFunction shifted(32);
    for (int i = 0; i < 32; ++i) shifted[(i + shift) % 32] = u[static_cast<std::size_t>(i)];

    for (auto op : {gradient, laplacian, divergence}) {
        const GridFunction direct = op(grid, u);
        const GridFunction of_shifted = op(grid, shifted);
        for (int i = 0; i < 32; ++i) {
            CHECK(of_shifted[(i + shift) % 32] == direct[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("convergence order of gradient and laplacian") {
    auto worst = [](int n, bool lap) {
        const TorusGrid grid(n);
        const auto u = sample(grid, [](double x) { return std::sin(two_pi * x); });
        const auto ref = lap ? sample(grid, [](double x) {
            return -two_pi * two_pi * std::sin(two_pi * x);
        })
                             : sample(grid, [](double x) { return two_pi * std::cos(two_pi * x); });
        return max_err(lap ? laplacian(grid, u) : gradient(grid, u), ref);
    };
    for (bool lap : {false, true}) {
        const double coarse = worst(64, lap);
        const double fine = worst(128, lap);
        CHECK(coarse / fine >= 3.5);
    }
}

TEST_CASE("shape mismatch is rejected") {
    const TorusGrid grid(16);
    GridFunction wrong(8, 0.0);
    CHECK_THROWS_AS(gradient(grid, wrong), InvalidInput);
    CHECK_THROWS_AS(laplacian(grid, wrong), InvalidInput);
    CHECK_THROWS_AS(divergence(grid, wrong), InvalidInput);
}
