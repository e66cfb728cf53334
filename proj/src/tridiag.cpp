#include "gmfg/tridiag.hpp"

#include <algorithm>
#include <cmath>

#include "gmfg/errors.hpp"

namespace gmfg {

CyclicTridiagonal::CyclicTridiagonal(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
    n_ = diag_.size();
    if (n_ < 3 || lower_.size() != n_ || upper_.size() != n_) {
        throw InvalidInput("CyclicTridiagonal: bands must have equal length >= 3");
    }

    // A = A' + u v^T with u = (gamma, 0, ..., 0, lower[0])^T and
    // v = (1, 0, ..., 0, upper[n-1]/gamma)^T.
    gamma_ = -diag_[0];
    if (gamma_ == 0.0) gamma_ = 1.0;
    mod_diag_ = diag_;
    mod_diag_[0] -= gamma_;
    mod_diag_[n_ - 1] -= upper_[n_ - 1] * lower_[0] / gamma_;

    for (double d : mod_diag_) {
        if (d == 0.0) {
            throw NumericalFailure("CyclicTridiagonal: singular pivot");
        }
    }

    std::vector<double> corner(n_, 0.0);
    corner[0] = gamma_;
    corner[n_ - 1] = lower_[0];
    z_ = thomas(corner);
    denom_ = 1.0 + z_[0] + upper_[n_ - 1] * z_[n_ - 1] / gamma_;
    if (std::abs(denom_) < 1e-300) {
        throw NumericalFailure("CyclicTridiagonal: singular rank-one correction");
    }
}

std::vector<double> CyclicTridiagonal::thomas(std::span<const double> rhs) const {
    const std::size_t n = n_;
    std::vector<double> c_prime(n, 0.0), d_prime(n, 0.0), u(n, 0.0);
    double beta = mod_diag_[0];
    c_prime[0] = upper_[0] / beta;
    d_prime[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = mod_diag_[i] - lower_[i] * c_prime[i - 1];
        if (beta == 0.0) {
            throw NumericalFailure("CyclicTridiagonal: zero pivot in elimination");
        }
        c_prime[i] = upper_[i] / beta;
        d_prime[i] = (rhs[i] - lower_[i] * d_prime[i - 1]) / beta;
    }
    u[n - 1] = d_prime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        u[i] = d_prime[i] - c_prime[i] * u[i + 1];
    }
    return u;
}

std::vector<double> CyclicTridiagonal::solve_once(std::span<const double> rhs) const {
    std::vector<double> y = thomas(rhs);
    const double factor = (y[0] + upper_[n_ - 1] * y[n_ - 1] / gamma_) / denom_;
    for (std::size_t i = 0; i < n_; ++i) {
        y[i] -= factor * z_[i];
    }
    return y;
}

std::vector<double> CyclicTridiagonal::residual(std::span<const double> u,
                                                std::span<const double> rhs) const {
    const std::size_t n = n_;
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1) % n;
        const std::size_t im = (i + n - 1) % n;
        r[i] = rhs[i] - (lower_[i] * u[im] + diag_[i] * u[i] + upper_[i] * u[ip]);
    }
    return r;
}

std::vector<double> CyclicTridiagonal::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) {
        throw InvalidInput("CyclicTridiagonal: rhs length mismatch");
    }
    std::vector<double> u = solve_once(rhs);

    double scale = 1.0;
    for (double v : rhs) scale = std::max(scale, std::abs(v));
    const double tol = 1e-13 * scale;

    for (int round = 0; round < 3; ++round) {
        std::vector<double> r = residual(u, rhs);
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        if (rmax <= tol) break;
        std::vector<double> delta = solve_once(r);
        for (std::size_t i = 0; i < n_; ++i) u[i] += delta[i];
    }
    return u;
}

} // namespace gmfg
