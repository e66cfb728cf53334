#include "gmfg/fixed_point.hpp"

#include <chrono>
#include <cmath>

#include "gmfg/errors.hpp"
#include "gmfg/parabolic.hpp"
#include "gmfg/wasserstein.hpp"

namespace gmfg {

void PicardConfig::validate() const {
    if (!(lambda > 0.0) || lambda > 1.0) {
        throw InvalidInput("PicardConfig: damping lambda must lie in (0, 1]");
    }
    if (!(eps_rho > 0.0)) throw InvalidInput("PicardConfig: eps_rho must be positive");
    if (max_iter < 1) throw InvalidInput("PicardConfig: max_iter must be at least 1");
}

Field3 seed_from_m0(const InitialDensity& m0, const TimeGrid& tgrid) {
    Field3 out(tgrid.n_levels(), m0.density.M, m0.density.n);
    for (int k = 0; k < out.levels; ++k) {
        for (int j = 0; j < out.M; ++j) {
            const auto src = m0.density.row(j);
            auto dst = out.slice(k, j);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return out;
}

Field3 seed_uniform(int n_levels, int M, int n) {
    Field3 out(n_levels, M, n);
    for (double& v : out.data) v = 1.0;
    return out;
}

namespace {

struct HarnackAggregate {
    bool all_passed = true;
    double worst_margin = 0.0;
    bool seen = false;

    void absorb(const std::vector<BoundReport>& reports) {
        for (const auto& r : reports) {
            const double margin = r.margin();
            if (!seen || margin < worst_margin) worst_margin = margin;
            seen = true;
            all_passed = all_passed && r.passed;
        }
    }
};

double sup_alpha_variation(const Field3& field) {
    double worst = 0.0;
    for (int k = 0; k < field.levels; ++k) {
        for (int j = 0; j < field.M; ++j) {
            const auto a = field.slice(k, j);
            for (int j2 = j + 1; j2 < field.M; ++j2) {
                const auto b = field.slice(k, j2);
                for (int i = 0; i < field.n; ++i) {
                    worst = std::max(worst, std::abs(a[i] - b[i]));
                }
            }
        }
    }
    return worst;
}

double w1_alpha_variation(const Field3& mu, const TorusGrid& grid) {
    double worst = 0.0;
    for (int k = 0; k < mu.levels; ++k) {
        for (int j = 0; j < mu.M; ++j) {
            const DiscreteMeasure a = measure_from_density(grid, mu.slice(k, j));
            for (int j2 = j + 1; j2 < mu.M; ++j2) {
                const DiscreteMeasure b = measure_from_density(grid, mu.slice(k, j2));
                worst = std::max(worst, w1_circle(a, b));
            }
        }
    }
    return worst;
}

} // namespace

GmfgSolution picard_solve(const Scenario& scenario, const PicardConfig& config, int threads) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const TorusGrid& grid = scenario.grid;
    const AlphaGrid& alpha = scenario.alpha;
    const TimeGrid& tgrid = scenario.time;

    Field3 mu;
    switch (config.seed) {
        case SeedKind::FromM0: mu = seed_from_m0(scenario.m0, tgrid); break;
        case SeedKind::Uniform: mu = seed_uniform(tgrid.n_levels(), alpha.M, grid.n); break;
        case SeedKind::Custom:
            if (config.custom_seed.levels != tgrid.n_levels() ||
                config.custom_seed.M != alpha.M || config.custom_seed.n != grid.n) {
                throw InvalidInput("picard_solve: custom seed does not conform to the grids");
            }
            mu = config.custom_seed;
            break;
    }

    GmfgSolution sol;
    SolveReport& report = sol.report;
    HarnackAggregate harnack;
    double worst_mass = 0.0;
    double min_density = 0.0;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        Phi1Result p1 = phi1(mu, scenario.cost, scenario.b, grid, alpha, tgrid, threads);
        harnack.absorb(p1.harnack);
        Phi2Result p2 = phi2(p1.fields.grad_v_tilde, scenario.m0, grid, tgrid, threads);
        worst_mass = std::max(worst_mass, p2.worst_mass_deviation);
        min_density = std::min(min_density, p2.min_value);

        Field3 next(tgrid.n_levels(), alpha.M, grid.n);
        const double lam = config.lambda;
        for (std::size_t idx = 0; idx < next.data.size(); ++idx) {
            next.data[idx] = (1.0 - lam) * mu.data[idx] + lam * p2.mu.data[idx];
        }
        const double r = rho(next, mu, grid);
        report.rho_history.push_back(r);
        report.iterations = iter;
        mu = std::move(next);
        if (r < config.eps_rho) {
            report.converged = true;
            break;
        }
    }

    // Final operator pass on the converged (or best) iterate: the emitted
    // fields solve their respective discrete equations for each other, and
    // rho(mu*, Phi(mu*)) becomes the reported fixed-point residual.
    Phi1Result p1 = phi1(mu, scenario.cost, scenario.b, grid, alpha, tgrid, threads);
    harnack.absorb(p1.harnack);
    Phi2Result p2 = phi2(p1.fields.grad_v_tilde, scenario.m0, grid, tgrid, threads);
    worst_mass = std::max(worst_mass, p2.worst_mass_deviation);
    min_density = std::min(min_density, p2.min_value);

    report.fixed_point_residual = rho(mu, p2.mu, grid);
    report.max_drift = max_abs(std::span<const double>(p1.fields.grad_v_tilde.data));

    sol.mu = std::move(p2.mu);
    sol.fields = std::move(p1.fields);
    sol.v = sol.fields.value(scenario.b, grid, alpha, tgrid);

    sol.a_star = Field3(tgrid.n_levels(), alpha.M, grid.n);
    for (int k = 0; k < sol.a_star.levels; ++k) {
        const double t = tgrid.time(k);
        for (int j = 0; j < alpha.M; ++j) {
            const double a = alpha.nodes[static_cast<std::size_t>(j)];
            for (int i = 0; i < grid.n; ++i) {
                sol.a_star(k, j, i) =
                    -(sol.fields.grad_v_tilde(k, j, i) +
                      scenario.b.grad_b(t, a, grid.nodes[static_cast<std::size_t>(i)]));
            }
        }
    }

    report.final_harnack = std::move(p1.harnack);
    report.harnack_all_passed = harnack.all_passed;
    report.harnack_worst_margin = harnack.worst_margin;
    report.mass_check = make_bound_report("fpk_mass", worst_mass, 1e-10, 0.0);
    report.positivity_check = make_bound_report("fpk_positivity", -min_density, 1e-12, 0.0);
    report.holder_check = check_holder_half(sol.mu, report.max_drift, grid, tgrid);
    report.moment_check = check_first_moment(sol.mu, scenario.m0, report.max_drift, grid, tgrid);

    report.alpha_variation_mu = w1_alpha_variation(sol.mu, grid);
    report.alpha_variation_v = sup_alpha_variation(sol.v);

    const std::size_t hist = report.rho_history.size();
    if (hist >= 3) {
        const double r0 = report.rho_history[hist - 3];
        const double r1 = report.rho_history[hist - 2];
        const double r2 = report.rho_history[hist - 1];
        report.residual_tail_monotone = r1 <= r0 * (1.0 + 1e-12) && r2 <= r1 * (1.0 + 1e-12);
    }

    report.seconds_total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
}

ProbeReport uniqueness_probe(const Scenario& scenario, const PicardConfig& config,
                             const std::vector<Field3>& seeds, int threads) {
    if (seeds.empty()) throw InvalidInput("uniqueness_probe: need at least one seed");
    ProbeReport probe;
    std::vector<Field3> limits;
    limits.reserve(seeds.size());
    probe.conclusive = true;
    for (const Field3& seed : seeds) {
        PicardConfig branch = config;
        branch.seed = SeedKind::Custom;
        branch.custom_seed = seed;
        GmfgSolution sol = picard_solve(scenario, branch, threads);
        probe.branch_converged.push_back(sol.report.converged);
        probe.conclusive = probe.conclusive && sol.report.converged;
        limits.push_back(std::move(sol.mu));
    }
    for (std::size_t a = 0; a < limits.size(); ++a) {
        for (std::size_t b = a + 1; b < limits.size(); ++b) {
            const double r = rho(limits[a], limits[b], scenario.grid);
            probe.pairwise_rho.push_back(r);
            probe.worst_pairwise = std::max(probe.worst_pairwise, r);
        }
    }
    probe.pass = probe.conclusive && probe.worst_pairwise <= 10.0 * config.eps_rho;
    return probe;
}

AuditReport residual_audit(const GmfgSolution& solution, const Scenario& scenario) {
    const TorusGrid& grid = scenario.grid;
    const AlphaGrid& alpha = scenario.alpha;
    const TimeGrid& tgrid = scenario.time;
    const Field3& v = solution.v;
    const Field3& a_star = solution.a_star;
    const Field3& mu = solution.mu;

    const Field3 ell1 = assemble_ell1(mu, scenario.cost, grid);
    AuditReport audit;
    const double inv2dt = 1.0 / (2.0 * tgrid.dt);

    GridFunction total_drift(static_cast<std::size_t>(grid.n));
    GridFunction flux(static_cast<std::size_t>(grid.n));
    for (int k = 1; k + 1 < v.levels; ++k) {
        const double t = tgrid.time(k);
        for (int j = 0; j < alpha.M; ++j) {
            const double a = alpha.nodes[static_cast<std::size_t>(j)];
            const auto vk = v.slice(k, j);
            const auto vkp = v.slice(k + 1, j);
            const auto vkm = v.slice(k - 1, j);
            const auto ak = a_star.slice(k, j);
            const auto muk = mu.slice(k, j);
            const auto mukp = mu.slice(k + 1, j);
            const auto mukm = mu.slice(k - 1, j);
            const GridFunction grad_v = gradient(grid, vk);
            const GridFunction lap_v = laplacian(grid, vk);
            const GridFunction lap_mu = laplacian(grid, muk);

            for (int i = 0; i < grid.n; ++i) {
                const double x = grid.nodes[static_cast<std::size_t>(i)];
                const double gb = scenario.b.grad_b(t, a, x);
                total_drift[static_cast<std::size_t>(i)] = gb + ak[i];
                flux[static_cast<std::size_t>(i)] = (gb + ak[i]) * muk[i];
            }
            const GridFunction div_flux = divergence(grid, flux);

            for (int i = 0; i < grid.n; ++i) {
                const double dvdt = (vkp[i] - vkm[i]) * inv2dt;
                const double hjb = dvdt +
                                   total_drift[static_cast<std::size_t>(i)] *
                                       grad_v[static_cast<std::size_t>(i)] +
                                   0.5 * lap_v[static_cast<std::size_t>(i)] +
                                   0.5 * ak[i] * ak[i] + ell1(k, j, i);
                audit.hjb = std::max(audit.hjb, std::abs(hjb));

                const double dmdt = (mukp[i] - mukm[i]) * inv2dt;
                const double fpk = dmdt + div_flux[static_cast<std::size_t>(i)] -
                                   0.5 * lap_mu[static_cast<std::size_t>(i)];
                audit.fpk = std::max(audit.fpk, std::abs(fpk));
            }
        }
    }

    // argmin identity across all time levels.
    for (int k = 0; k < v.levels; ++k) {
        for (int j = 0; j < alpha.M; ++j) {
            const GridFunction grad_v = gradient(grid, v.slice(k, j));
            const auto ak = a_star.slice(k, j);
            for (int i = 0; i < grid.n; ++i) {
                audit.argmin =
                    std::max(audit.argmin, std::abs(ak[i] + grad_v[static_cast<std::size_t>(i)]));
            }
        }
    }

    for (int j = 0; j < alpha.M; ++j) {
        const auto vT = v.slice(v.levels - 1, j);
        for (int i = 0; i < grid.n; ++i) {
            audit.terminal = std::max(audit.terminal, std::abs(vT[i]));
        }
        const auto mu0 = mu.slice(0, j);
        const auto m0 = scenario.m0.density.row(j);
        for (int i = 0; i < grid.n; ++i) {
            audit.initial = std::max(audit.initial, std::abs(mu0[i] - m0[i]));
        }
    }
    return audit;
}

} // namespace gmfg
