#include "gmfg/torus_grid.hpp"

#include <cmath>
#include <string>

#include "gmfg/errors.hpp"

namespace gmfg {

TorusGrid::TorusGrid(int n_nodes) : n(n_nodes) {
    if (n < 4) {
        throw InvalidInput("TorusGrid: need at least 4 nodes, got " + std::to_string(n));
    }
    h = 1.0 / static_cast<double>(n);
    nodes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nodes[static_cast<std::size_t>(i)] = static_cast<double>(i) * h;
    }
}

double wrap(double x) {
    if (!std::isfinite(x)) {
        throw InvalidInput("wrap: non-finite input");
    }
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // floor rounding at the seam
    return r;
}

double torus_distance(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw InvalidInput("torus_distance: non-finite input");
    }
    const double d = wrap(x - y);
    return std::min(d, 1.0 - d);
}

namespace {

void check_size(const TorusGrid& grid, std::span<const double> u, const char* op) {
    if (u.size() != static_cast<std::size_t>(grid.n)) {
        throw InvalidInput(std::string(op) + ": field length does not match grid");
    }
}

} // namespace

GridFunction gradient(const TorusGrid& grid, std::span<const double> u) {
    check_size(grid, u, "gradient");
    const int n = grid.n;
    const double inv2h = 1.0 / (2.0 * grid.h);
    GridFunction out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const int im = (i + n - 1) % n;
        out[i] = (u[ip] - u[im]) * inv2h;
    }
    return out;
}

GridFunction laplacian(const TorusGrid& grid, std::span<const double> u) {
    check_size(grid, u, "laplacian");
    const int n = grid.n;
    const double invh2 = 1.0 / (grid.h * grid.h);
    GridFunction out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const int im = (i + n - 1) % n;
        out[i] = (u[ip] - 2.0 * u[i] + u[im]) * invh2;
    }
    return out;
}

GridFunction divergence(const TorusGrid& grid, std::span<const double> flux) {
    check_size(grid, flux, "divergence");
    const int n = grid.n;
    const double invh = 1.0 / grid.h;
    GridFunction out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const int im = (i + n - 1) % n;
        const double face_right = 0.5 * (flux[i] + flux[ip]);
        const double face_left = 0.5 * (flux[im] + flux[i]);
        out[i] = (face_right - face_left) * invh;
    }
    return out;
}

} // namespace gmfg
