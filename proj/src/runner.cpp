#include "gmfg/runner.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "gmfg/errors.hpp"
#include "gmfg/parabolic.hpp"
#include "gmfg/report.hpp"
#include "gmfg/wasserstein.hpp"

namespace gmfg {

namespace {

using nlohmann::json;

int resolve_threads(const RunOptions& options) {
    if (options.threads > 0) return options.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::filesystem::path output_dir(const ScenarioConfig& cfg, const RunOptions& options) {
    return options.output_override.empty() ? std::filesystem::path(cfg.output_dir)
                                           : std::filesystem::path(options.output_override);
}

json config_json(const ScenarioConfig& cfg) {
    json j;
    j["grid"]["n"] = cfg.n;
    j["time"]["T"] = cfg.T;
    j["time"]["n_t"] = cfg.n_t;
    j["clusters"]["M"] = cfg.M;
    j["graphon"]["kind"] = cfg.graphon_kind;
    j["graphon"]["p"] = cfg.graphon_p;
    j["graphon"]["file"] = cfg.graphon_file;
    j["graphon"]["expr"] = cfg.graphon_expr;
    j["graphon"]["bound"] = cfg.graphon_bound;
    j["cost"]["ell2"] = cfg.ell2_expr;
    j["cost"]["ell2_file"] = cfg.ell2_file;
    j["cost"]["smoothness_bound"] = cfg.smoothness_bound;
    j["drift"]["b"] = cfg.drift_b;
    j["m0"]["density"] = cfg.m0_density;
    j["m0"]["file"] = cfg.m0_file;
    j["picard"]["lambda"] = cfg.lambda;
    j["picard"]["eps_rho"] = cfg.eps_rho;
    j["picard"]["max_iter"] = cfg.max_iter;
    j["picard"]["seed"] = cfg.seed;
    j["picard"]["seed_file"] = cfg.seed_file;
    j["mc"]["n_paths"] = cfg.mc_n_paths;
    j["mc"]["dt_mc"] = cfg.mc_dt;
    j["mc"]["rng_seed"] = cfg.mc_seed;
    j["mc"]["antithetic"] = cfg.mc_antithetic;
    j["output"]["dir"] = cfg.output_dir;
    return j;
}

json bound_json(const BoundReport& r) {
    json j;
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["slack"] = r.slack;
    j["margin"] = r.margin();
    j["passed"] = r.passed;
    return j;
}

json null_bound() {
    return json{{"name", nullptr}, {"lhs", nullptr},    {"rhs", nullptr},
                {"slack", nullptr}, {"margin", nullptr}, {"passed", nullptr}};
}

/// One fixed schema for every outcome, filled as far as the run got. Nested
/// objects keep their full shape with null leaves so the key set never
/// depends on how the run ended.
json blank_report(const ScenarioConfig& cfg) {
    json j;
    j["config"] = config_json(cfg);
    j["status"] = "bound_violation";
    j["exit_code"] = kExitBoundViolation;
    j["converged"] = false;
    j["iterations"] = 0;
    j["rho_history"] = json::array();
    j["fixed_point_residual"] = nullptr;
    j["alpha_variation"] = nullptr;
    j["alpha_variation_mu"] = nullptr;
    j["alpha_variation_v"] = nullptr;
    j["max_drift"] = nullptr;
    j["residual_tail_monotone"] = nullptr;
    j["bound_checks"] = {{"harnack", {{"passed", nullptr}, {"worst_margin", nullptr}}},
                         {"mass", null_bound()},
                         {"positivity", null_bound()},
                         {"holder_half", null_bound()},
                         {"first_moment", null_bound()}};
    j["cfl"] = {{"violated", false}, {"required_dt", nullptr}, {"message", ""}};
    j["norms"] = {{"moment_part", nullptr},
                  {"holder_part", nullptr},
                  {"v_sup", nullptr},
                  {"grad_v_sup", nullptr}};
    j["timings"] = {{"total_seconds", nullptr}};
    j["outputs"] = {{"mu_csv", ""}, {"v_csv", ""}, {"grad_v_csv", ""}};
    j["error"] = "";
    return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

void fill_report(json& j, const GmfgSolution& sol) {
    const SolveReport& rep = sol.report;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["rho_history"] = rep.rho_history;
    j["fixed_point_residual"] = rep.fixed_point_residual;
    j["alpha_variation_mu"] = rep.alpha_variation_mu;
    j["alpha_variation_v"] = rep.alpha_variation_v;
    j["alpha_variation"] = std::max(rep.alpha_variation_mu, rep.alpha_variation_v);
    j["max_drift"] = rep.max_drift;
    j["residual_tail_monotone"] = rep.residual_tail_monotone;
    j["bound_checks"]["harnack"] = {{"passed", rep.harnack_all_passed},
                                    {"worst_margin", rep.harnack_worst_margin}};
    j["bound_checks"]["mass"] = bound_json(rep.mass_check);
    j["bound_checks"]["positivity"] = bound_json(rep.positivity_check);
    j["bound_checks"]["holder_half"] = bound_json(rep.holder_check);
    j["bound_checks"]["first_moment"] = bound_json(rep.moment_check);
    j["timings"]["total_seconds"] = rep.seconds_total;
}

Field3 grad_v_field(const GmfgSolution& sol) {
    Field3 grad_v = sol.a_star;
    for (double& v : grad_v.data) v = -v;  // grad v = -a*
    return grad_v;
}

} // namespace

int run_solve(const ScenarioConfig& cfg, const RunOptions& options) {
    const int threads = resolve_threads(options);
    const std::filesystem::path dir = output_dir(cfg, options);
    std::filesystem::create_directories(dir);

    json report = blank_report(cfg);
    const Scenario scenario = build_scenario(cfg);
    PicardConfig picard = build_picard_config(cfg);
    if (picard.seed == SeedKind::Custom) picard.custom_seed = build_seed(cfg, scenario);

    GmfgSolution sol;
    try {
        sol = picard_solve(scenario, picard, threads);
    } catch (const CflViolation& cfl) {
        report["cfl"] = {{"violated", true},
                         {"required_dt", cfl.required_dt},
                         {"message", cfl.what()}};
        report["error"] = cfl.what();
        report["status"] = "bound_violation";
        report["exit_code"] = kExitBoundViolation;
        write_json(dir / "report.json", report);
        if (!options.quiet) {
            std::cerr << "CFL violation: " << cfl.what() << "\n";
        }
        return kExitBoundViolation;
    }

    fill_report(report, sol);

    write_csv_field3((dir / "mu.csv").string(), sol.mu, scenario.grid, scenario.alpha,
                     scenario.time);
    write_csv_field3((dir / "v.csv").string(), sol.v, scenario.grid, scenario.alpha,
                     scenario.time);
    const Field3 grad_v = grad_v_field(sol);
    write_csv_field3((dir / "grad_v.csv").string(), grad_v, scenario.grid, scenario.alpha,
                     scenario.time);
    report["outputs"] = {{"mu_csv", (dir / "mu.csv").string()},
                         {"v_csv", (dir / "v.csv").string()},
                         {"grad_v_csv", (dir / "grad_v.csv").string()}};

    const SHalfNorm norms = s_half_norm(sol.mu, scenario.grid, scenario.time);
    report["norms"]["moment_part"] = norms.moment_part;
    report["norms"]["holder_part"] = norms.holder_part;
    report["norms"]["v_sup"] = max_abs(std::span<const double>(sol.v.data));
    report["norms"]["grad_v_sup"] = max_abs(std::span<const double>(grad_v.data));

    int exit_code = kExitOk;
    std::string status = "converged";
    if (!sol.report.converged) {
        exit_code = kExitNotConverged;
        status = "max_iter";
    } else if (!sol.report.all_bounds_passed()) {
        exit_code = kExitBoundViolation;
        status = "bound_violation";
    }
    report["status"] = status;
    report["exit_code"] = exit_code;
    write_json(dir / "report.json", report);

    if (!options.quiet) {
        std::cout << "solve: " << status << " after " << sol.report.iterations
                  << " iterations; rho = "
                  << (sol.report.rho_history.empty() ? 0.0 : sol.report.rho_history.back())
                  << "; outputs in " << dir.string() << "\n";
    }
    return exit_code;
}

int run_validate(const ScenarioConfig& cfg, const RunOptions& options) {
    const int threads = resolve_threads(options);
    const std::filesystem::path dir = output_dir(cfg, options);
    std::filesystem::create_directories(dir);

    const Scenario scenario = build_scenario(cfg);
    PicardConfig picard = build_picard_config(cfg);
    if (picard.seed == SeedKind::Custom) picard.custom_seed = build_seed(cfg, scenario);
    const McConfig mc = build_mc_config(cfg);

    json report;
    report["config"] = config_json(cfg);
    report["checks"] = json::array();
    bool all_ok = true;

    GmfgSolution sol;
    try {
        sol = picard_solve(scenario, picard, threads);
    } catch (const CflViolation& cfl) {
        report["error"] = cfl.what();
        report["exit_code"] = kExitBoundViolation;
        write_json(dir / "validate_report.json", report);
        return kExitBoundViolation;
    }
    if (!sol.report.converged) {
        report["error"] = "solve did not converge; oracles not meaningful";
        report["exit_code"] = kExitNotConverged;
        write_json(dir / "validate_report.json", report);
        return kExitNotConverged;
    }

    const TorusGrid& grid = scenario.grid;
    const TimeGrid& tgrid = scenario.time;
    const int M = scenario.alpha.M;
    std::vector<int> alphas = {0, M / 2, M - 1};
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    // Particle oracle against the FPK slices.
    for (int j : alphas) {
        TimeSpaceField drift(tgrid.n_levels(), grid.n);
        for (int k = 0; k < drift.levels; ++k) {
            const auto g = sol.fields.grad_v_tilde.slice(k, j);
            auto dst = drift.level(k);
            for (int i = 0; i < grid.n; ++i) dst[i] = -g[i];
        }
        std::vector<double> m0w(static_cast<std::size_t>(grid.n));
        for (int i = 0; i < grid.n; ++i) m0w[static_cast<std::size_t>(i)] =
            scenario.m0.density(j, i) * grid.h;
        const auto hist = simulate_particles(drift, m0w, grid, tgrid, mc, threads);

        const double allowance_scale = 2.0 * (1.0 + sol.report.max_drift);
        for (int frac = 1; frac <= 5; ++frac) {
            const int k = tgrid.n_t * frac / 5;
            DiscreteMeasure emp;
            emp.grid = &grid;
            emp.weights = hist[static_cast<std::size_t>(k)];
            const DiscreteMeasure ref = measure_from_density(grid, sol.mu.slice(k, j));
            const double dist = w1_circle(emp, ref);
            const double se = bootstrap_w1_std_error(hist[static_cast<std::size_t>(k)],
                                                     sol.mu.slice(k, j), grid, mc.n_paths, 100,
                                                     mc.rng_seed + 7777 + k);
            const double tol = 3.0 * se + allowance_scale * (grid.h + mc.dt_mc);
            const bool ok = dist <= tol;
            all_ok = all_ok && ok;
            report["checks"].push_back({{"check", "particle_vs_fpk"},
                                        {"alpha_index", j},
                                        {"time_level", k},
                                        {"w1", dist},
                                        {"tolerance", tol},
                                        {"passed", ok}});
        }
    }

    // Feynman-Kac value oracle on the w equation at x = 0.
    const Field3 ell1 = assemble_ell1(sol.mu, scenario.cost, grid);
    const Field3 ell_tilde = effective_cost(ell1, scenario.b, grid, scenario.alpha, tgrid);
    for (int j : alphas) {
        const double a = scenario.alpha.nodes[static_cast<std::size_t>(j)];

        auto c_reflected = [&](double s, double x) {
            // time-reflected effective cost, linearly interpolated
            const double tau = std::clamp(tgrid.T - s, 0.0, tgrid.T);
            const int k = std::min(tgrid.n_t - 1, static_cast<int>(tau / tgrid.dt));
            return interp_periodic(grid, ell_tilde.slice(k, j), x);
        };
        auto psi = [&](double x) { return std::exp(scenario.b.b(tgrid.T, a, x)); };
        auto lap_psi = [&](double x) {
            const double gb = scenario.b.grad_b(tgrid.T, a, x);
            return psi(x) * (scenario.b.lap_b(tgrid.T, a, x) + gb * gb);
        };
        auto f_shift = [&](double s, double x) {
            return 0.5 * lap_psi(x) - c_reflected(s, x) * psi(x);
        };

        const double x0 = 0.0;
        const McEstimate est = mc_parabolic(c_reflected, f_shift, 0.0, x0, tgrid.T, mc, threads);
        const double mc_value = psi(x0) + est.mean;
        const double pde_value = sol.fields.w(0, j, 0);
        const double c_sup = max_abs(std::span<const double>(ell_tilde.data));
        const double scale = std::exp(c_sup * tgrid.T) * (1.0 + tgrid.T);
        const double tol = 3.0 * est.std_error +
                           5.0 * scale * (mc.dt_mc + grid.h * grid.h) * (1.0 + c_sup);
        const bool ok = std::abs(mc_value - pde_value) <= tol;
        all_ok = all_ok && ok;
        report["checks"].push_back({{"check", "feynman_kac_value"},
                                    {"alpha_index", j},
                                    {"mc", mc_value},
                                    {"pde", pde_value},
                                    {"std_error", est.std_error},
                                    {"tolerance", tol},
                                    {"passed", ok}});
    }

    // Nash spot check: the equilibrium control should not be improvable.
    for (int j : alphas) {
        McConfig nash_cfg = mc;
        TimeSpaceField a_star(tgrid.n_levels(), grid.n);
        for (int k = 0; k < a_star.levels; ++k) {
            const auto src = sol.a_star.slice(k, j);
            auto dst = a_star.level(k);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        const McEstimate base = cost_functional(a_star, sol.mu, scenario.cost, j, scenario.b,
                                                grid, scenario.alpha, tgrid, nash_cfg, threads);
        for (double eps : {-0.2, 0.2, 0.5}) {
            TimeSpaceField perturbed = a_star;
            for (int k = 0; k < perturbed.levels; ++k) {
                auto dst = perturbed.level(k);
                for (int i = 0; i < grid.n; ++i) {
                    dst[i] += eps * std::sin(2.0 * std::numbers::pi *
                                             grid.nodes[static_cast<std::size_t>(i)]);
                }
            }
            const McEstimate other =
                cost_functional(perturbed, sol.mu, scenario.cost, j, scenario.b, grid,
                                scenario.alpha, tgrid, nash_cfg, threads);
            const double combined =
                std::sqrt(base.std_error * base.std_error + other.std_error * other.std_error);
            const bool ok = base.mean <= other.mean + 3.0 * combined;
            all_ok = all_ok && ok;
            report["checks"].push_back({{"check", "nash_spot"},
                                        {"alpha_index", j},
                                        {"epsilon", eps},
                                        {"j_star", base.mean},
                                        {"j_perturbed", other.mean},
                                        {"combined_se", combined},
                                        {"passed", ok}});
        }
    }

    report["all_passed"] = all_ok;
    report["exit_code"] = all_ok ? kExitOk : kExitBoundViolation;
    write_json(dir / "validate_report.json", report);
    if (!options.quiet) {
        std::cout << "validate: " << (all_ok ? "all oracles agree" : "ORACLE MISMATCH") << "\n";
    }
    return all_ok ? kExitOk : kExitBoundViolation;
}

int run_probe(const ScenarioConfig& cfg, int n_seeds, const RunOptions& options) {
    if (n_seeds < 1) throw InvalidInput("probe: need at least one seed");
    const int threads = resolve_threads(options);
    const std::filesystem::path dir = output_dir(cfg, options);
    std::filesystem::create_directories(dir);

    const Scenario scenario = build_scenario(cfg);
    const PicardConfig picard = build_picard_config(cfg);

    std::vector<Field3> seeds;
    seeds.push_back(seed_from_m0(scenario.m0, scenario.time));
    if (n_seeds >= 2) {
        seeds.push_back(
            seed_uniform(scenario.time.n_levels(), scenario.alpha.M, scenario.grid.n));
    }
    for (int s = 2; s < n_seeds; ++s) {
        // Cosine-modulated m0 variants, renormalized.
        AlphaSpaceField raw = scenario.m0.density;
        const double phase = 2.0 * std::numbers::pi * (s - 1) / n_seeds;
        for (int j = 0; j < raw.M; ++j) {
            auto row = raw.row(j);
            for (int i = 0; i < raw.n; ++i) {
                const double x = scenario.grid.nodes[static_cast<std::size_t>(i)];
                row[i] *= 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * x + phase);
            }
        }
        InitialDensity seed0 = InitialDensity::from_density(std::move(raw), scenario.grid);
        seeds.push_back(seed_from_m0(seed0, scenario.time));
    }

    const ProbeReport probe = uniqueness_probe(scenario, picard, seeds, threads);

    json report;
    report["config"] = config_json(cfg);
    report["n_seeds"] = n_seeds;
    report["branch_converged"] = probe.branch_converged;
    report["pairwise_rho"] = probe.pairwise_rho;
    report["worst_pairwise"] = probe.worst_pairwise;
    report["threshold"] = 10.0 * picard.eps_rho;
    report["conclusive"] = probe.conclusive;
    report["pass"] = probe.pass;
    report["exit_code"] =
        probe.pass ? kExitOk : (probe.conclusive ? kExitBoundViolation : kExitNotConverged);
    write_json(dir / "probe_report.json", report);

    if (!options.quiet) {
        std::cout << "probe: " << (probe.pass ? "limits coincide" : "limits differ or inconclusive")
                  << " (worst pairwise rho = " << probe.worst_pairwise << ")\n";
    }
    return report["exit_code"].get<int>();
}

int run_norms(const ScenarioConfig& cfg, const RunOptions& options) {
    const std::filesystem::path dir = output_dir(cfg, options);
    const Scenario scenario = build_scenario(cfg);
    const TimeGrid& tgrid = scenario.time;

    const Field3 mu = read_csv_field3((dir / "mu.csv").string(), tgrid.n_levels(),
                                      scenario.alpha.M, scenario.grid.n);
    const Field3 v = read_csv_field3((dir / "v.csv").string(), tgrid.n_levels(),
                                     scenario.alpha.M, scenario.grid.n);
    const Field3 grad_v = read_csv_field3((dir / "grad_v.csv").string(), tgrid.n_levels(),
                                          scenario.alpha.M, scenario.grid.n);

    const SHalfNorm norms = s_half_norm(mu, scenario.grid, tgrid);
    json report;
    report["config"] = config_json(cfg);
    report["norms"]["moment_part"] = norms.moment_part;
    report["norms"]["holder_part"] = norms.holder_part;
    report["norms"]["s_half"] = norms.moment_part + norms.holder_part;
    report["norms"]["v_sup"] = max_abs(std::span<const double>(v.data));
    report["norms"]["grad_v_sup"] = max_abs(std::span<const double>(grad_v.data));
    write_json(dir / "norms.json", report);

    if (!options.quiet) {
        std::cout << "norms: |mu|_0 = " << norms.moment_part
                  << ", [mu]_1/2 = " << norms.holder_part
                  << ", |v|_0 = " << report["norms"]["v_sup"].get<double>()
                  << ", |grad v|_0 = " << report["norms"]["grad_v_sup"].get<double>() << "\n";
    }
    return kExitOk;
}

} // namespace gmfg
