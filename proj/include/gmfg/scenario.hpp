#pragma once

#include <cstdint>
#include <string>

#include "gmfg/feynman_kac.hpp"
#include "gmfg/fixed_point.hpp"

namespace gmfg {

/// Raw, validated configuration: every field resolved to a concrete value
/// with defaults applied. Paths are resolved relative to the config file.
struct ScenarioConfig {
    int n = 64;
    double T = 0.5;
    int n_t = 200;
    int M = 16;

    std::string graphon_kind = "constant";
    double graphon_p = 0.5;
    std::string graphon_file;
    std::string graphon_expr;
    double graphon_bound = 10.0;

    std::string ell2_expr = "cos(2*pi*(x - y))";
    std::string ell2_file;
    double smoothness_bound = 1e5;

    std::string drift_b = "0";

    std::string m0_density = "1";
    std::string m0_file;

    double lambda = 0.5;
    double eps_rho = 1e-6;
    int max_iter = 100;
    std::string seed = "from_m0";
    std::string seed_file;

    int mc_n_paths = 20000;
    double mc_dt = 0.0;  // 0 resolves to the solver dt
    std::uint64_t mc_seed = 12345;
    bool mc_antithetic = true;

    std::string output_dir = "out";

    std::string source_path;  // where this config was loaded from
};

/// Parses and validates a key = value config with [section] headers.
/// Parse errors carry line numbers; validation errors name the offending key.
ScenarioConfig load_scenario(const std::string& path);

/// Assembles the solver inputs from a validated config (evaluates the
/// expression catalog, loads matrix files, normalizes m0, validates the
/// graphon).
Scenario build_scenario(const ScenarioConfig& cfg);

PicardConfig build_picard_config(const ScenarioConfig& cfg);
McConfig build_mc_config(const ScenarioConfig& cfg);

/// Initial iterate per the config's seed selector.
Field3 build_seed(const ScenarioConfig& cfg, const Scenario& scenario);

/// Dense matrix text file: first line "rows cols", then row-major values.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
};
DenseMatrix load_matrix(const std::string& path);

} // namespace gmfg
