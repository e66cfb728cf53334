#pragma once

#include <span>

#include "gmfg/bounds.hpp"
#include "gmfg/fields.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Per-cluster initial density, one unit-mass row per alpha node.
struct InitialDensity {
    AlphaSpaceField density;

    /// Validates nonnegativity and renormalizes each row once to h*sum = 1.
    static InitialDensity from_density(AlphaSpaceField raw, const TorusGrid& grid);
};

/// One conservative step of d_t nu = div(drift * nu) + 1/2 lap nu: mass is
/// transported against `drift` (explicit upwind fluxes) and diffused
/// implicitly. Mass is preserved to 1e-12 and the output stays nonnegative
/// under the CFL guard dt <= h / max |drift at faces|.
GridFunction fpk_step(const TorusGrid& grid, std::span<const double> nu,
                      std::span<const double> drift, double dt);

struct Phi2Result {
    Field3 mu;
    double worst_mass_deviation = 0.0;  // max over (t, alpha) of |h sum mu - 1|
    double min_value = 0.0;             // most negative density value seen
    double max_drift = 0.0;             // max face speed, for CFL reporting
};

/// The operator Phi_2: forward FPK trajectory per cluster from m0 under the
/// drift field grad v_tilde. Checks the CFL guard against the whole drift
/// field up front and refuses with the required dt.
Phi2Result phi2(const Field3& grad_v_tilde, const InitialDensity& m0, const TorusGrid& grid,
                const TimeGrid& tgrid, int threads = 1);

/// Half-Hoelder time regularity: d1(mu(t), mu(s)) <= (1 + sqrt(T) B) |t-s|^{1/2}
/// for every cluster and time pair. Reports the worst excess over the bound.
BoundReport check_holder_half(const Field3& mu, double drift_bound, const TorusGrid& grid,
                              const TimeGrid& tgrid);

/// First-moment growth: sup_t int |x| mu(t, alpha) <= int |x| m0(alpha) +
/// B T + sqrt(T), with the representative of x in [0, 1).
BoundReport check_first_moment(const Field3& mu, const InitialDensity& m0, double drift_bound,
                               const TorusGrid& grid, const TimeGrid& tgrid);

} // namespace gmfg
