#pragma once

#include <string>

#include "gmfg/errors.hpp"

namespace gmfg {

/// Uniform partition of [0, T] into n_t steps; fields live on the n_t + 1 nodes.
struct TimeGrid {
    TimeGrid(double horizon, int steps) : T(horizon), n_t(steps) {
        if (!(horizon > 0.0)) {
            throw InvalidInput("TimeGrid: horizon must be positive");
        }
        if (steps < 1) {
            throw InvalidInput("TimeGrid: need at least 1 step, got " + std::to_string(steps));
        }
        dt = T / static_cast<double>(n_t);
    }

    double time(int k) const { return static_cast<double>(k) * dt; }
    int n_levels() const { return n_t + 1; }

    double T = 0.0;
    int n_t = 0;
    double dt = 0.0;
};

} // namespace gmfg
