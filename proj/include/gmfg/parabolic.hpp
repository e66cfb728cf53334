#pragma once

#include <span>

#include "gmfg/bounds.hpp"
#include "gmfg/fields.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Coefficients of d_t u = 1/2 Lap u - c u + f with initial datum psi.
/// c and f are sampled on all n_t + 1 time levels.
struct ParabolicCoefficients {
    TimeSpaceField c;
    TimeSpaceField f;
    GridFunction psi;
};

struct ParabolicSolution {
    TimeSpaceField u;
};

enum class ParabolicScheme {
    /// theta-weighted implicit scheme; diffusion and reaction both inside the
    /// theta average, source at the theta-weighted time.
    Theta,
    /// Strang splitting with exact pointwise exponential for the reaction and
    /// Crank-Nicolson for the diffusion. Requires f == 0. Reproduces the
    /// exponential discount factor exactly for spatially constant reaction,
    /// which the Harnack check relies on.
    StrangExpReaction,
};

struct ParabolicOptions {
    ParabolicScheme scheme = ParabolicScheme::Theta;
    double theta = 0.5;
};

/// One theta-scheme step:
///   (u1 - u0)/dt = theta (1/2 Lap u1 - c1 u1) + (1-theta) (1/2 Lap u0 - c0 u0) + f_theta
/// The cyclic tridiagonal system is solved to max-norm residual <= 1e-12.
/// Refuses dt*|c|_0 >= 1 when theta < 1 (explicit reaction part would lose
/// its sign structure).
GridFunction step_theta(const TorusGrid& grid, std::span<const double> u0,
                        std::span<const double> c0, std::span<const double> c1,
                        std::span<const double> f_theta, double dt, double theta);

ParabolicSolution solve(const ParabolicCoefficients& coeffs, const TorusGrid& grid,
                        const TimeGrid& tgrid, const ParabolicOptions& options = {});

/// Backward problem d_t v + 1/2 Lap v - c v + f = 0 with v(T) = phi, solved by
/// the substitution v(t) = u(T - t) against time-reflected coefficients.
/// Output is indexed by the original (forward) time levels.
ParabolicSolution solve_backward(const TimeSpaceField& c, const TimeSpaceField& f,
                                 const GridFunction& terminal, const TorusGrid& grid,
                                 const TimeGrid& tgrid, const ParabolicOptions& options = {});

TimeSpaceField time_reflected(const TimeSpaceField& field);

/// Comparison-principle bound |u|_0 <= e^{|c|_0 T} |f|_0 T for psi = 0.
BoundReport check_sup_bound(const ParabolicSolution& sol, const ParabolicCoefficients& coeffs,
                            const TimeGrid& tgrid);

/// Solution-map sensitivity |u[c,f1] - u[c,f2]|_0 <= T e^{T |c|_0} |f1 - f2|_0
/// for two zero-datum solves sharing c.
BoundReport check_sensitivity(const TimeSpaceField& c, const TimeSpaceField& f1,
                              const TimeSpaceField& f2, const TorusGrid& grid,
                              const TimeGrid& tgrid, const ParabolicOptions& options = {});

double max_abs(std::span<const double> values);
double max_abs(const TimeSpaceField& field);

} // namespace gmfg
