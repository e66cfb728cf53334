#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "gmfg/errors.hpp"
#include "gmfg/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gmfg: graphon mean field game solver on the 1-torus"};
    app.require_subcommand(1);

    std::string config_path;
    gmfg::RunOptions options;
    int n_seeds = 3;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "scenario config file")->required();
        sub->add_option("--threads", options.threads, "cap on worker threads (0 = hardware)");
        sub->add_option("--output", options.output_override, "override the output directory");
        sub->add_flag("--quiet", options.quiet, "suppress progress output");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the scenario and emit fields");
    add_common(solve);
    CLI::App* validate =
        app.add_subcommand("validate", "solve, then cross-check against the Monte Carlo oracles");
    add_common(validate);
    CLI::App* probe = app.add_subcommand("probe", "uniqueness probe from several seeds");
    add_common(probe);
    probe->add_option("--seeds", n_seeds, "number of distinct seed densities")
        ->check(CLI::PositiveNumber);
    CLI::App* norms = app.add_subcommand("norms", "seminorm diagnostics of a saved solution");
    add_common(norms);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gmfg::kExitUsage;
    }

    try {
        const gmfg::ScenarioConfig cfg = gmfg::load_scenario(config_path);
        if (solve->parsed()) return gmfg::run_solve(cfg, options);
        if (validate->parsed()) return gmfg::run_validate(cfg, options);
        if (probe->parsed()) return gmfg::run_probe(cfg, n_seeds, options);
        if (norms->parsed()) return gmfg::run_norms(cfg, options);
    } catch (const gmfg::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gmfg::kExitUsage;
    } catch (const gmfg::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return gmfg::kExitBoundViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gmfg::kExitUsage;
    }
    return gmfg::kExitUsage;
}
