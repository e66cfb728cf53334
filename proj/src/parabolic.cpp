#include "gmfg/parabolic.hpp"

#include <cmath>
#include <string>

#include "gmfg/errors.hpp"
#include "gmfg/tridiag.hpp"

namespace gmfg {

double max_abs(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const TimeSpaceField& field) {
    return max_abs(std::span<const double>(field.data));
}

GridFunction step_theta(const TorusGrid& grid, std::span<const double> u0,
                        std::span<const double> c0, std::span<const double> c1,
                        std::span<const double> f_theta, double dt, double theta) {
    const std::size_t n = static_cast<std::size_t>(grid.n);
    if (u0.size() != n || c0.size() != n || c1.size() != n || f_theta.size() != n) {
        throw InvalidInput("step_theta: field length does not match grid");
    }
    if (!(dt > 0.0)) throw InvalidInput("step_theta: dt must be positive");
    if (theta < 0.0 || theta > 1.0) throw InvalidInput("step_theta: theta must be in [0,1]");

    if (theta < 1.0) {
        const double cmax = std::max(max_abs(c0), max_abs(c1));
        if (dt * cmax >= 1.0) {
            throw NumericalFailure(
                "step_theta: dt*|c|_0 = " + std::to_string(dt * cmax) +
                " >= 1 with theta < 1; decrease dt below " + std::to_string(1.0 / cmax));
        }
    }

    const double s = dt * theta / (2.0 * grid.h * grid.h);
    std::vector<double> lower(n, -s), upper(n, -s), diag(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 1.0 + 2.0 * s + dt * theta * c1[i];
        if (diag[i] <= 0.0) {
            throw NumericalFailure("step_theta: implicit system lost positivity; decrease dt");
        }
    }

    const GridFunction lap0 = laplacian(grid, u0);
    const double w_expl = dt * (1.0 - theta);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = u0[i] + w_expl * (0.5 * lap0[i] - c0[i] * u0[i]) + dt * f_theta[i];
    }

    CyclicTridiagonal system(std::move(lower), std::move(diag), std::move(upper));
    return system.solve(rhs);
}

namespace {

void check_coeffs(const ParabolicCoefficients& coeffs, const TorusGrid& grid,
                  const TimeGrid& tgrid) {
    const int n = grid.n;
    const int levels = tgrid.n_levels();
    if (coeffs.c.levels != levels || coeffs.c.n != n || coeffs.f.levels != levels ||
        coeffs.f.n != n || static_cast<int>(coeffs.psi.size()) != n) {
        throw InvalidInput("parabolic solve: coefficient arrays do not conform to the grids");
    }
}

ParabolicSolution solve_theta(const ParabolicCoefficients& coeffs, const TorusGrid& grid,
                              const TimeGrid& tgrid, double theta) {
    const int n = grid.n;
    ParabolicSolution sol;
    sol.u = TimeSpaceField(tgrid.n_levels(), n);
    for (int i = 0; i < n; ++i) sol.u(0, i) = coeffs.psi[static_cast<std::size_t>(i)];

    GridFunction f_theta(static_cast<std::size_t>(n));
    for (int k = 0; k < tgrid.n_t; ++k) {
        const auto fk = coeffs.f.level(k);
        const auto fk1 = coeffs.f.level(k + 1);
        for (int i = 0; i < n; ++i) {
            f_theta[static_cast<std::size_t>(i)] = theta * fk1[i] + (1.0 - theta) * fk[i];
        }
        GridFunction next = step_theta(grid, sol.u.level(k), coeffs.c.level(k),
                                       coeffs.c.level(k + 1), f_theta, tgrid.dt, theta);
        auto dst = sol.u.level(k + 1);
        std::copy(next.begin(), next.end(), dst.begin());
    }
    return sol;
}

ParabolicSolution solve_strang(const ParabolicCoefficients& coeffs, const TorusGrid& grid,
                               const TimeGrid& tgrid) {
    if (max_abs(coeffs.f) != 0.0) {
        throw InvalidInput("parabolic solve: StrangExpReaction requires f == 0");
    }
    const int n = grid.n;
    const double dt = tgrid.dt;

    // Crank-Nicolson heat half of the splitting; the matrix is constant in time.
    const double s = dt / (4.0 * grid.h * grid.h);
    std::vector<double> lower(static_cast<std::size_t>(n), -s);
    std::vector<double> upper(static_cast<std::size_t>(n), -s);
    std::vector<double> diag(static_cast<std::size_t>(n), 1.0 + 2.0 * s);
    CyclicTridiagonal heat(std::move(lower), std::move(diag), std::move(upper));

    ParabolicSolution sol;
    sol.u = TimeSpaceField(tgrid.n_levels(), n);
    for (int i = 0; i < n; ++i) sol.u(0, i) = coeffs.psi[static_cast<std::size_t>(i)];

    GridFunction work(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n));
    for (int k = 0; k < tgrid.n_t; ++k) {
        const auto u0 = sol.u.level(k);
        const auto c0 = coeffs.c.level(k);
        const auto c1 = coeffs.c.level(k + 1);
        for (int i = 0; i < n; ++i) {
            work[static_cast<std::size_t>(i)] = std::exp(-0.5 * dt * c0[i]) * u0[i];
        }
        const GridFunction lap = laplacian(grid, work);
        for (int i = 0; i < n; ++i) {
            rhs[static_cast<std::size_t>(i)] =
                work[static_cast<std::size_t>(i)] + 0.25 * dt * lap[static_cast<std::size_t>(i)];
        }
        GridFunction mid = heat.solve(rhs);
        auto dst = sol.u.level(k + 1);
        for (int i = 0; i < n; ++i) {
            dst[i] = std::exp(-0.5 * dt * c1[i]) * mid[static_cast<std::size_t>(i)];
        }
    }
    return sol;
}

} // namespace

ParabolicSolution solve(const ParabolicCoefficients& coeffs, const TorusGrid& grid,
                        const TimeGrid& tgrid, const ParabolicOptions& options) {
    check_coeffs(coeffs, grid, tgrid);
    switch (options.scheme) {
        case ParabolicScheme::StrangExpReaction:
            return solve_strang(coeffs, grid, tgrid);
        case ParabolicScheme::Theta:
        default:
            return solve_theta(coeffs, grid, tgrid, options.theta);
    }
}

TimeSpaceField time_reflected(const TimeSpaceField& field) {
    TimeSpaceField out(field.levels, field.n);
    for (int k = 0; k < field.levels; ++k) {
        const auto src = field.level(field.levels - 1 - k);
        auto dst = out.level(k);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

ParabolicSolution solve_backward(const TimeSpaceField& c, const TimeSpaceField& f,
                                 const GridFunction& terminal, const TorusGrid& grid,
                                 const TimeGrid& tgrid, const ParabolicOptions& options) {
    ParabolicCoefficients reflected;
    reflected.c = time_reflected(c);
    reflected.f = time_reflected(f);
    reflected.psi = terminal;
    ParabolicSolution forward = solve(reflected, grid, tgrid, options);
    ParabolicSolution out;
    out.u = time_reflected(forward.u);
    return out;
}

BoundReport check_sup_bound(const ParabolicSolution& sol, const ParabolicCoefficients& coeffs,
                            const TimeGrid& tgrid) {
    if (max_abs(coeffs.psi) != 0.0) {
        throw InvalidInput("check_sup_bound: requires psi == 0");
    }
    const double c0 = max_abs(coeffs.c);
    const double f0 = max_abs(coeffs.f);
    const double lhs = max_abs(sol.u);
    const double rhs = std::exp(c0 * tgrid.T) * f0 * tgrid.T;
    return make_bound_report("parabolic_sup_bound", lhs, rhs, 1e-8 * (1.0 + rhs));
}

BoundReport check_sensitivity(const TimeSpaceField& c, const TimeSpaceField& f1,
                              const TimeSpaceField& f2, const TorusGrid& grid,
                              const TimeGrid& tgrid, const ParabolicOptions& options) {
    ParabolicCoefficients a{c, f1, GridFunction(static_cast<std::size_t>(grid.n), 0.0)};
    ParabolicCoefficients b{c, f2, GridFunction(static_cast<std::size_t>(grid.n), 0.0)};
    const ParabolicSolution ua = solve(a, grid, tgrid, options);
    const ParabolicSolution ub = solve(b, grid, tgrid, options);

    double lhs = 0.0;
    for (std::size_t i = 0; i < ua.u.data.size(); ++i) {
        lhs = std::max(lhs, std::abs(ua.u.data[i] - ub.u.data[i]));
    }
    double fdiff = 0.0;
    for (std::size_t i = 0; i < f1.data.size(); ++i) {
        fdiff = std::max(fdiff, std::abs(f1.data[i] - f2.data[i]));
    }
    const double rhs = tgrid.T * std::exp(tgrid.T * max_abs(c)) * fdiff;
    return make_bound_report("parabolic_sensitivity", lhs, rhs, 1e-8 * (1.0 + rhs));
}

} // namespace gmfg
