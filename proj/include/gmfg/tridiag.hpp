#pragma once

#include <span>
#include <vector>

namespace gmfg {

/// Cyclic tridiagonal system
///
///   lower[i] * u[i-1] + diag[i] * u[i] + upper[i] * u[i+1] = rhs[i]
///
/// with periodic index arithmetic (lower[0] couples to u[n-1], upper[n-1] to
/// u[0]). Solved by the Sherman-Morrison corrected Thomas algorithm, followed
/// by iterative refinement until the max-norm residual is at or below
/// 1e-13 * max(1, |rhs|_inf).
class CyclicTridiagonal {
public:
    CyclicTridiagonal(std::vector<double> lower, std::vector<double> diag,
                      std::vector<double> upper);

    std::vector<double> solve(std::span<const double> rhs) const;

    /// rhs - A*u, for residual checks.
    std::vector<double> residual(std::span<const double> u, std::span<const double> rhs) const;

private:
    std::vector<double> solve_once(std::span<const double> rhs) const;
    std::vector<double> thomas(std::span<const double> rhs) const;

    std::vector<double> lower_, diag_, upper_;
    // Rank-one correction data for the periodic corners.
    double gamma_ = 0.0;
    std::vector<double> mod_diag_;
    std::vector<double> z_;      // solution of the modified system against the corner vector
    double denom_ = 0.0;
    std::size_t n_ = 0;
};

} // namespace gmfg
