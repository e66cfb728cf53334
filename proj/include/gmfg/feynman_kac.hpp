#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gmfg/fields.hpp"
#include "gmfg/graphon.hpp"
#include "gmfg/hopf_cole.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"
#include "gmfg/wasserstein.hpp"

namespace gmfg {

struct McConfig {
    int n_paths = 20000;
    double dt_mc = 1e-3;
    std::uint64_t rng_seed = 12345;
    bool antithetic = true;

    void validate(double solver_dt) const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
};

using ScalarField2D = std::function<double(double t, double x)>;

/// Probabilistic representation of the backward problem
///   d_t v + 1/2 lap v - c v + f = 0, v(T) = 0:
///   v(t,x) = E[ int_t^T exp(-int_t^s c(r, X_r) dr) f(s, X_s) ds ],
/// with X_s = wrap(x + W_s - W_t). Left-endpoint Riemann sums on dt_mc
/// (snapped so the horizon divides evenly); antithetic pairing optional.
McEstimate mc_parabolic(const ScalarField2D& c, const ScalarField2D& f, double t, double x,
                        double T, const McConfig& cfg, int threads = 1);

/// Euler-Maruyama particles on the torus under a grid drift field; initial
/// positions by inverse CDF of m0 with within-cell jitter. Returns cell-mass
/// histograms at every solver time level.
std::vector<std::vector<double>> simulate_particles(const TimeSpaceField& drift,
                                                    std::span<const double> m0_weights,
                                                    const TorusGrid& grid, const TimeGrid& tgrid,
                                                    const McConfig& cfg, int threads = 1);

/// Control cost J^alpha(a, mu) = E[ int_0^T (1/2 |a|^2 + ell1[mu])(t, alpha, X_t) dt ]
/// along paths with drift grad b + a.
McEstimate cost_functional(const TimeSpaceField& control, const Field3& mu,
                           const CostModel& cost, int alpha_index, const DriftPotential& b,
                           const TorusGrid& grid, const AlphaGrid& alpha, const TimeGrid& tgrid,
                           const McConfig& cfg, int threads = 1);

/// Nonparametric bootstrap standard error of the W1 distance between an
/// empirical histogram (given as counts / n) and a fixed reference density.
double bootstrap_w1_std_error(std::span<const double> histogram_masses,
                              std::span<const double> reference_density, const TorusGrid& grid,
                              int n_paths, int n_resamples, std::uint64_t seed);

/// Periodic linear interpolation of node values at position x in [0,1).
double interp_periodic(const TorusGrid& grid, std::span<const double> values, double x);

} // namespace gmfg
