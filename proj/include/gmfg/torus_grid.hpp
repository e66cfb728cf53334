#pragma once

#include <span>
#include <vector>

namespace gmfg {

using GridFunction = std::vector<double>;

/// Uniform periodic grid on the unit 1-torus, nodes x_i = i/n.
struct TorusGrid {
    explicit TorusGrid(int n_nodes);

    int n = 0;
    double h = 0.0;
    std::vector<double> nodes;
};

/// Quotient map R -> [0, 1).
double wrap(double x);

/// Geodesic distance on the torus; result in [0, 0.5].
double torus_distance(double x, double y);

// Second-order periodic finite-difference operators. All of them check the
// input length against the grid.
GridFunction gradient(const TorusGrid& grid, std::span<const double> u);
GridFunction laplacian(const TorusGrid& grid, std::span<const double> u);

/// Conservative divergence: node fluxes are averaged to faces, then
/// differenced, so h * sum(divergence) telescopes to zero.
GridFunction divergence(const TorusGrid& grid, std::span<const double> flux);

} // namespace gmfg
