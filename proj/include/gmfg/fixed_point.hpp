#pragma once

#include <vector>

#include "gmfg/bounds.hpp"
#include "gmfg/fields.hpp"
#include "gmfg/fpk.hpp"
#include "gmfg/graphon.hpp"
#include "gmfg/hopf_cole.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Everything a solve needs, immutable once assembled.
struct Scenario {
    TorusGrid grid;
    AlphaGrid alpha;
    TimeGrid time;
    DriftPotential b;
    CostModel cost;
    InitialDensity m0;
};

enum class SeedKind { FromM0, Uniform, Custom };

struct PicardConfig {
    double lambda = 0.5;
    double eps_rho = 1e-6;
    int max_iter = 100;
    SeedKind seed = SeedKind::FromM0;
    Field3 custom_seed;

    void validate() const;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> rho_history;

    /// rho between the last damped iterate mu* and Phi(mu*); bounded by
    /// eps_rho / lambda at convergence.
    double fixed_point_residual = 0.0;

    double alpha_variation_mu = 0.0;
    double alpha_variation_v = 0.0;
    double max_drift = 0.0;

    // Aggregated over every Picard iteration (including the final pass).
    BoundReport mass_check;
    BoundReport positivity_check;
    bool harnack_all_passed = true;
    double harnack_worst_margin = 0.0;
    std::vector<BoundReport> final_harnack;

    // On the emitted density.
    BoundReport holder_check;
    BoundReport moment_check;

    bool residual_tail_monotone = true;

    double seconds_total = 0.0;

    bool all_bounds_passed() const {
        return mass_check.passed && positivity_check.passed && harnack_all_passed &&
               holder_check.passed && moment_check.passed;
    }
};

struct GmfgSolution {
    Field3 v;       // value function v = v_tilde + b
    Field3 a_star;  // optimal control a* = -grad v
    Field3 mu;      // equilibrium density (last operator output)
    ValueField fields;
    SolveReport report;
};

Field3 seed_from_m0(const InitialDensity& m0, const TimeGrid& tgrid);
Field3 seed_uniform(int n_levels, int M, int n);

/// Damped Picard iteration mu <- (1 - lambda) mu + lambda Phi2(Phi1(mu)) until
/// rho drops below eps_rho or max_iter is reached. The returned density is the
/// final operator output, so it satisfies the discrete FPK for the returned
/// drift exactly; the damped iterate differs from it by at most
/// fixed_point_residual in rho.
GmfgSolution picard_solve(const Scenario& scenario, const PicardConfig& config, int threads = 1);

struct ProbeReport {
    bool conclusive = false;
    bool pass = false;
    std::vector<bool> branch_converged;
    std::vector<double> pairwise_rho;
    double worst_pairwise = 0.0;
};

/// Runs picard_solve from each seed and compares the limits pairwise;
/// passes when every pair is within 10 * eps_rho.
ProbeReport uniqueness_probe(const Scenario& scenario, const PicardConfig& config,
                             const std::vector<Field3>& seeds, int threads = 1);

struct AuditReport {
    double hjb = 0.0;       // first line of the equilibrium system
    double argmin = 0.0;    // |a* + grad v|
    double fpk = 0.0;       // third line
    double terminal = 0.0;  // |v(T)|
    double initial = 0.0;   // |mu(0) - m0|
};

/// Discrete residuals of the equilibrium system evaluated on the emitted
/// solution with central differences; diagnostics only.
AuditReport residual_audit(const GmfgSolution& solution, const Scenario& scenario);

} // namespace gmfg
