#pragma once

#include <string>

#include "gmfg/scenario.hpp"

namespace gmfg {

struct RunOptions {
    int threads = 0;  // 0 resolves to the hardware concurrency
    std::string output_override;
    bool quiet = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitBoundViolation = 3;

/// Solve the scenario, emit mu.csv / v.csv / grad_v.csv and report.json.
int run_solve(const ScenarioConfig& cfg, const RunOptions& options);

/// Solve, then cross-check against the Monte Carlo oracles (Feynman-Kac value
/// check, particle-vs-FPK, Nash spot check). Emits validate_report.json.
int run_validate(const ScenarioConfig& cfg, const RunOptions& options);

/// Uniqueness probe from several seeds. Emits probe_report.json.
int run_probe(const ScenarioConfig& cfg, int n_seeds, const RunOptions& options);

/// Seminorm diagnostics of a previously saved solution. Emits norms.json.
int run_norms(const ScenarioConfig& cfg, const RunOptions& options);

} // namespace gmfg
