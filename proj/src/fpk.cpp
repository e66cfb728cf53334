#include "gmfg/fpk.hpp"

#include <cmath>
#include <string>

#include "gmfg/errors.hpp"
#include "gmfg/parallel.hpp"
#include "gmfg/tridiag.hpp"
#include "gmfg/wasserstein.hpp"

namespace gmfg {

InitialDensity InitialDensity::from_density(AlphaSpaceField raw, const TorusGrid& grid) {
    if (raw.n != grid.n) throw InvalidInput("InitialDensity: density does not match grid");
    for (int j = 0; j < raw.M; ++j) {
        auto row = raw.row(j);
        double mass = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) {
                throw InvalidInput("InitialDensity: negative density in cluster " +
                                   std::to_string(j));
            }
            mass += v;
        }
        mass *= grid.h;
        if (mass <= 0.0) {
            throw InvalidInput("InitialDensity: cluster " + std::to_string(j) + " has zero mass");
        }
        // The one renormalization this density ever gets.
        for (double& v : row) v /= mass;
    }
    InitialDensity out;
    out.density = std::move(raw);
    return out;
}

namespace {

double max_face_speed(const TorusGrid& grid, std::span<const double> drift) {
    double m = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const int ip = (i + 1) % grid.n;
        m = std::max(m, std::abs(0.5 * (drift[static_cast<std::size_t>(i)] +
                                        drift[static_cast<std::size_t>(ip)])));
    }
    return m;
}

} // namespace

GridFunction fpk_step(const TorusGrid& grid, std::span<const double> nu,
                      std::span<const double> drift, double dt) {
    const int n = grid.n;
    if (nu.size() != static_cast<std::size_t>(n) || drift.size() != static_cast<std::size_t>(n)) {
        throw InvalidInput("fpk_step: field length does not match grid");
    }
    const double h = grid.h;

    const double speed = max_face_speed(grid, drift);
    if (dt * speed > h * (1.0 + 1e-12)) {
        throw CflViolation("fpk_step: advection CFL violated; require dt <= " +
                               std::to_string(h / speed),
                           h / speed);
    }

    double mass_in = 0.0;
    for (double v : nu) mass_in += v;

    // Explicit upwind advection. The transport velocity is -drift; flux at
    // face i+1/2 takes nu from the side the wind comes from.
    std::vector<double> face_flux(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const double u = -0.5 * (drift[static_cast<std::size_t>(i)] +
                                 drift[static_cast<std::size_t>(ip)]);
        face_flux[static_cast<std::size_t>(i)] =
            u >= 0.0 ? u * nu[static_cast<std::size_t>(i)] : u * nu[static_cast<std::size_t>(ip)];
    }
    std::vector<double> advected(static_cast<std::size_t>(n), 0.0);
    const double lam = dt / h;
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        advected[static_cast<std::size_t>(i)] =
            nu[static_cast<std::size_t>(i)] -
            lam * (face_flux[static_cast<std::size_t>(i)] - face_flux[static_cast<std::size_t>(im)]);
    }

    // Implicit diffusion step (I - dt/2 Lap); M-matrix, so nonnegativity and
    // mass carry through the solve.
    const double s = dt / (2.0 * h * h);
    std::vector<double> lower(static_cast<std::size_t>(n), -s);
    std::vector<double> upper(static_cast<std::size_t>(n), -s);
    std::vector<double> diag(static_cast<std::size_t>(n), 1.0 + 2.0 * s);
    CyclicTridiagonal system(std::move(lower), std::move(diag), std::move(upper));
    GridFunction next = system.solve(advected);

    double mass_out = 0.0, min_v = 0.0;
    for (double v : next) {
        mass_out += v;
        min_v = std::min(min_v, v);
    }
    if (std::abs(mass_out - mass_in) * h > 1e-12) {
        throw NumericalFailure("fpk_step: mass drifted by more than 1e-12 in one step");
    }
    if (min_v < -1e-12) {
        throw NumericalFailure("fpk_step: density went below -1e-12");
    }
    return next;
}

Phi2Result phi2(const Field3& grad_v_tilde, const InitialDensity& m0, const TorusGrid& grid,
                const TimeGrid& tgrid, int threads) {
    const int M = m0.density.M;
    if (grad_v_tilde.n != grid.n || grad_v_tilde.M != M ||
        grad_v_tilde.levels != tgrid.n_levels() || m0.density.n != grid.n) {
        throw InvalidInput("phi2: drift field does not conform to the grids");
    }

    double max_drift = 0.0;
    for (int k = 0; k < grad_v_tilde.levels; ++k) {
        for (int j = 0; j < M; ++j) {
            max_drift = std::max(max_drift, max_face_speed(grid, grad_v_tilde.slice(k, j)));
        }
    }
    if (max_drift > 0.0 && tgrid.dt * max_drift > grid.h * (1.0 + 1e-12)) {
        throw CflViolation("phi2: advection CFL violated for this drift; require dt <= " +
                               std::to_string(grid.h / max_drift),
                           grid.h / max_drift);
    }

    Phi2Result result;
    result.mu = Field3(tgrid.n_levels(), M, grid.n);
    result.max_drift = max_drift;

    std::vector<double> mass_dev(static_cast<std::size_t>(M), 0.0);
    std::vector<double> min_val(static_cast<std::size_t>(M), 0.0);

    Field3& mu = result.mu;
    parallel_for(M, threads, [&](int j) {
        GridFunction current(m0.density.row(j).begin(), m0.density.row(j).end());
        {
            auto dst = mu.slice(0, j);
            std::copy(current.begin(), current.end(), dst.begin());
        }
        double dev = 0.0, mn = 0.0;
        for (int k = 0; k < tgrid.n_t; ++k) {
            current = fpk_step(grid, current, grad_v_tilde.slice(k, j), tgrid.dt);
            auto dst = mu.slice(k + 1, j);
            std::copy(current.begin(), current.end(), dst.begin());
            double mass = 0.0;
            for (double v : current) {
                mass += v;
                mn = std::min(mn, v);
            }
            dev = std::max(dev, std::abs(mass * grid.h - 1.0));
        }
        mass_dev[static_cast<std::size_t>(j)] = dev;
        min_val[static_cast<std::size_t>(j)] = mn;
    });

    for (int j = 0; j < M; ++j) {
        result.worst_mass_deviation =
            std::max(result.worst_mass_deviation, mass_dev[static_cast<std::size_t>(j)]);
        result.min_value = std::min(result.min_value, min_val[static_cast<std::size_t>(j)]);
    }
    return result;
}

BoundReport check_holder_half(const Field3& mu, double drift_bound, const TorusGrid& grid,
                              const TimeGrid& tgrid) {
    if (mu.n != grid.n || mu.levels != tgrid.n_levels()) {
        throw InvalidInput("check_holder_half: field does not match grids");
    }
    const double coeff = 1.0 + std::sqrt(tgrid.T) * drift_bound;
    double worst_excess = -1.0;

    for (int j = 0; j < mu.M; ++j) {
        // Prefix sums of consecutive distances: a cheap upper bound via the
        // triangle inequality that skips pairs which provably satisfy the
        // bound; d1 <= 0.5 caps the useful gap range.
        std::vector<double> prefix(static_cast<std::size_t>(mu.levels), 0.0);
        for (int k = 0; k + 1 < mu.levels; ++k) {
            const DiscreteMeasure a = measure_from_density(grid, mu.slice(k, j));
            const DiscreteMeasure b = measure_from_density(grid, mu.slice(k + 1, j));
            prefix[static_cast<std::size_t>(k) + 1] =
                prefix[static_cast<std::size_t>(k)] + w1_circle(a, b);
        }
        for (int k1 = 0; k1 < mu.levels; ++k1) {
            for (int k2 = k1 + 1; k2 < mu.levels; ++k2) {
                const double bound = coeff * std::sqrt((k2 - k1) * tgrid.dt);
                if (bound >= 0.5) break;  // d1 can never exceed the torus diameter
                const double cheap =
                    prefix[static_cast<std::size_t>(k2)] - prefix[static_cast<std::size_t>(k1)];
                if (cheap <= bound + worst_excess) continue;
                const DiscreteMeasure a = measure_from_density(grid, mu.slice(k1, j));
                const DiscreteMeasure b = measure_from_density(grid, mu.slice(k2, j));
                worst_excess = std::max(worst_excess, w1_circle(a, b) - bound);
            }
        }
    }
    return make_bound_report("holder_half", worst_excess, 0.0, 1e-9);
}

BoundReport check_first_moment(const Field3& mu, const InitialDensity& m0, double drift_bound,
                               const TorusGrid& grid, const TimeGrid& tgrid) {
    if (mu.n != grid.n || mu.M != m0.density.M) {
        throw InvalidInput("check_first_moment: shapes do not match");
    }
    double worst_excess = -1.0;
    for (int j = 0; j < mu.M; ++j) {
        const double allowance =
            first_moment(grid, m0.density.row(j)) + drift_bound * tgrid.T + std::sqrt(tgrid.T);
        for (int k = 0; k < mu.levels; ++k) {
            worst_excess =
                std::max(worst_excess, first_moment(grid, mu.slice(k, j)) - allowance);
        }
    }
    return make_bound_report("first_moment", worst_excess, 0.0, 1e-9);
}

} // namespace gmfg
