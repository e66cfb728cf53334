#include "gmfg/hopf_cole.hpp"

#include <cmath>
#include <random>

#include "gmfg/errors.hpp"
#include "gmfg/parabolic.hpp"
#include "gmfg/parallel.hpp"

namespace gmfg {

DriftPotential::DriftPotential(const std::string& text) : text_(text) {
    expr_ = Expression::parse(text, {Var::T, Var::Alpha, Var::X});
    d_t_ = expr_.deriv_t();
    d_x_ = expr_.deriv_x();
    d_xx_ = d_x_.deriv_x();
    validate_derivatives();
}

DriftPotential DriftPotential::zero() {
    DriftPotential b;
    b.text_ = "0";
    return b;
}

double DriftPotential::b(double t, double alpha, double x) const {
    return expr_.eval({t, alpha, 0.0, x, 0.0});
}
double DriftPotential::dt_b(double t, double alpha, double x) const {
    return d_t_.eval({t, alpha, 0.0, x, 0.0});
}
double DriftPotential::grad_b(double t, double alpha, double x) const {
    return d_x_.eval({t, alpha, 0.0, x, 0.0});
}
double DriftPotential::lap_b(double t, double alpha, double x) const {
    return d_xx_.eval({t, alpha, 0.0, x, 0.0});
}

void DriftPotential::validate_derivatives() const {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double step = 1e-4;
    const double scale = 1.0 + expr_.sup_bound(1.0);
    for (int probe = 0; probe < 24; ++probe) {
        const double t = unit(rng);
        const double a = unit(rng);
        const double x = unit(rng);
        const double fd_t = (b(t + step, a, x) - b(t - step, a, x)) / (2.0 * step);
        const double fd_x = (b(t, a, x + step) - b(t, a, x - step)) / (2.0 * step);
        const double fd_xx =
            (b(t, a, x + step) - 2.0 * b(t, a, x) + b(t, a, x - step)) / (step * step);
        const double tol = 1e-4 * scale;
        if (std::abs(fd_t - dt_b(t, a, x)) > tol || std::abs(fd_x - grad_b(t, a, x)) > tol ||
            std::abs(fd_xx - lap_b(t, a, x)) > 1e-2 * scale) {
            throw NumericalFailure("DriftPotential: analytic derivatives disagree with "
                                   "finite-difference probes");
        }
    }
}

Field3 ValueField::value(const DriftPotential& b, const TorusGrid& grid, const AlphaGrid& alpha,
                         const TimeGrid& tgrid) const {
    Field3 v(v_tilde.levels, v_tilde.M, v_tilde.n);
    for (int k = 0; k < v.levels; ++k) {
        const double t = tgrid.time(k);
        for (int j = 0; j < v.M; ++j) {
            const double a = alpha.nodes[static_cast<std::size_t>(j)];
            for (int i = 0; i < v.n; ++i) {
                v(k, j, i) =
                    v_tilde(k, j, i) + b.b(t, a, grid.nodes[static_cast<std::size_t>(i)]);
            }
        }
    }
    return v;
}

Field3 effective_cost(const Field3& ell1, const DriftPotential& b, const TorusGrid& grid,
                      const AlphaGrid& alpha, const TimeGrid& tgrid) {
    if (ell1.n != grid.n || ell1.M != alpha.M || ell1.levels != tgrid.n_levels()) {
        throw InvalidInput("effective_cost: ell1 does not conform to the grids");
    }
    Field3 out(ell1.levels, ell1.M, ell1.n);
    for (int k = 0; k < ell1.levels; ++k) {
        const double t = tgrid.time(k);
        for (int j = 0; j < ell1.M; ++j) {
            const double a = alpha.nodes[static_cast<std::size_t>(j)];
            for (int i = 0; i < ell1.n; ++i) {
                const double x = grid.nodes[static_cast<std::size_t>(i)];
                const double gb = b.grad_b(t, a, x);
                out(k, j, i) =
                    ell1(k, j, i) + b.dt_b(t, a, x) + 0.5 * gb * gb + 0.5 * b.lap_b(t, a, x);
            }
        }
    }
    return out;
}

TimeSpaceField solve_w(const TimeSpaceField& ell_tilde_slice, const DriftPotential& b,
                       double alpha, const TorusGrid& grid, const TimeGrid& tgrid) {
    if (ell_tilde_slice.n != grid.n || ell_tilde_slice.levels != tgrid.n_levels()) {
        throw InvalidInput("solve_w: slice does not conform to the grids");
    }
    GridFunction terminal(static_cast<std::size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i) {
        terminal[static_cast<std::size_t>(i)] =
            std::exp(b.b(tgrid.T, alpha, grid.nodes[static_cast<std::size_t>(i)]));
    }
    TimeSpaceField zero(tgrid.n_levels(), grid.n);
    ParabolicOptions options;
    options.scheme = ParabolicScheme::StrangExpReaction;
    const ParabolicSolution sol =
        solve_backward(ell_tilde_slice, zero, terminal, grid, tgrid, options);
    return sol.u;
}

std::pair<BoundReport, BoundReport> check_harnack(const TimeSpaceField& w_slice,
                                                  const TimeSpaceField& ell_tilde_slice,
                                                  const DriftPotential& b, double alpha,
                                                  const TorusGrid& grid, const TimeGrid& tgrid) {
    double b_sup = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        b_sup = std::max(b_sup,
                         std::abs(b.b(tgrid.T, alpha, grid.nodes[static_cast<std::size_t>(i)])));
    }
    const double c_sup = max_abs(ell_tilde_slice);
    const double hi = std::exp(b_sup + c_sup * tgrid.T);
    const double lo = std::exp(-(b_sup + c_sup * tgrid.T));

    double w_min = w_slice.data[0], w_max = w_slice.data[0];
    for (double v : w_slice.data) {
        w_min = std::min(w_min, v);
        w_max = std::max(w_max, v);
    }
    // Scale-aware machine slack; the bounds degenerate to equalities for
    // constant coefficients.
    BoundReport lower = make_bound_report("harnack_lower", lo, w_min, 1e-12 * (1.0 + lo));
    BoundReport upper = make_bound_report("harnack_upper", w_max, hi, 1e-12 * (1.0 + hi));
    return {lower, upper};
}

Phi1Result phi1(const Field3& mu, const CostModel& cost, const DriftPotential& b,
                const TorusGrid& grid, const AlphaGrid& alpha, const TimeGrid& tgrid,
                int threads) {
    const Field3 ell1 = assemble_ell1(mu, cost, grid);
    Field3 ell_tilde = effective_cost(ell1, b, grid, alpha, tgrid);

    Phi1Result result;
    result.fields.w = Field3(tgrid.n_levels(), alpha.M, grid.n);
    result.fields.v_tilde = Field3(tgrid.n_levels(), alpha.M, grid.n);
    result.fields.grad_v_tilde = Field3(tgrid.n_levels(), alpha.M, grid.n);
    result.harnack.resize(2 * static_cast<std::size_t>(alpha.M));

    Field3& w3 = result.fields.w;
    Field3& vt3 = result.fields.v_tilde;
    Field3& gvt3 = result.fields.grad_v_tilde;

    parallel_for(alpha.M, threads, [&](int j) {
        const double a = alpha.nodes[static_cast<std::size_t>(j)];
        TimeSpaceField slice(tgrid.n_levels(), grid.n);
        for (int k = 0; k < slice.levels; ++k) {
            const auto src = ell_tilde.slice(k, j);
            auto dst = slice.level(k);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        const TimeSpaceField w = solve_w(slice, b, a, grid, tgrid);

        for (int k = 0; k < w.levels; ++k) {
            const auto wk = w.level(k);
            for (int i = 0; i < grid.n; ++i) {
                if (!(wk[i] > 0.0)) {
                    throw PositivityLoss("phi1: Hopf-Cole variable w lost positivity at cluster " +
                                         std::to_string(j));
                }
            }
            const GridFunction grad_w = gradient(grid, wk);
            auto wdst = w3.slice(k, j);
            auto vdst = vt3.slice(k, j);
            auto gdst = gvt3.slice(k, j);
            for (int i = 0; i < grid.n; ++i) {
                wdst[i] = wk[i];
                vdst[i] = -std::log(wk[i]);
                gdst[i] = -grad_w[static_cast<std::size_t>(i)] / wk[i];
            }
        }
        const auto [lower, upper] = check_harnack(w, slice, b, a, grid, tgrid);
        result.harnack[2 * static_cast<std::size_t>(j)] = lower;
        result.harnack[2 * static_cast<std::size_t>(j) + 1] = upper;
    });

    result.ell_tilde = std::move(ell_tilde);
    return result;
}

} // namespace gmfg
