#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gmfg/fields.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Probability measure supported on the grid nodes; weights are cell masses
/// (h * density values) and sum to 1.
struct DiscreteMeasure {
    const TorusGrid* grid = nullptr;
    std::vector<double> weights;
};

DiscreteMeasure measure_from_density(const TorusGrid& grid, std::span<const double> density);

/// Exact 1-Wasserstein distance on the circle with the torus ground metric:
/// with D = cumulative sums of the weight difference, the optimal-cut formula
/// gives h * sum_i |D_i - median(D)|.
double w1_circle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Ground-truth oracle: solves the optimal transport LP with cost
/// torus_distance(x_i, x_j) by successive-shortest-path min-cost flow.
/// Refuses grids with more than 64 nodes.
double w1_lp_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Picard convergence metric: sup over (time level, cluster) of the slice
/// distances. Reduction order is fixed (time outer, cluster inner).
double rho(const Field3& mu1, const Field3& mu2, const TorusGrid& grid);

struct SHalfNorm {
    double moment_part = 0.0;  // sup_{t,alpha} of the first moment, representative in [0,1)
    double holder_part = 0.0;  // sup over time pairs of d1 / sqrt(|t1 - t2|)
};

SHalfNorm s_half_norm(const Field3& mu, const TorusGrid& grid, const TimeGrid& tgrid);

/// Kantorovich duality certificate: returns the pairing of f against mu - nu
/// after checking that f is 1-Lipschitz on the discrete torus, and verifies it
/// does not exceed w1_circle.
double duality_gap_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         std::span<const double> f);

/// First moment h * sum x_i * density_i with the representative in [0,1).
double first_moment(const TorusGrid& grid, std::span<const double> density);

} // namespace gmfg
