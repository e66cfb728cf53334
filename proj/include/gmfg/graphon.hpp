#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmfg/bounds.hpp"
#include "gmfg/expressions.hpp"
#include "gmfg/fields.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Midpoint quadrature nodes on the cluster interval [0,1]:
/// alpha_j = (j + 1/2)/M, each with weight 1/M.
struct AlphaGrid {
    explicit AlphaGrid(int n_clusters);

    int M = 0;
    std::vector<double> nodes;
    double weight = 0.0;
};

enum class GraphonKind { Constant, UniformAttachment, PiecewiseConstant, Expr };

/// Symmetric bounded coupling kernel g(alpha, alpha'). The piecewise-constant
/// table covers [0,1]^2 with K x K equal cells; the expression kind uses the
/// catalog with variables alpha and beta.
class Graphon {
public:
    static Graphon constant(double p);
    static Graphon uniform_attachment();
    static Graphon piecewise_constant(std::vector<double> table, int K);
    static Graphon expression(const std::string& text);

    /// Pointwise evaluation for alpha, alpha' in [0,1].
    double operator()(double alpha, double alpha_prime) const;

    /// G_{jk} = g(alpha_j, alpha_k) with symmetry and boundedness validated.
    std::vector<double> evaluate(const AlphaGrid& grid, double bound = 0.0) const;

    GraphonKind kind() const { return kind_; }
    std::string describe() const;

private:
    GraphonKind kind_ = GraphonKind::Constant;
    double p_ = 0.0;
    std::vector<double> table_;
    int table_K_ = 0;
    Expression expr_;
};

/// Running-cost data: the kernel ell2 on the spatial grid, the graphon on the
/// cluster grid, and the discrete Lipschitz constants the coupling bounds use.
/// A custom ell1 operator may replace the integral form; it is subject to the
/// same boundedness check.
struct CostModel {
    CostModel(const TorusGrid& grid, const AlphaGrid& alpha, std::vector<double> ell2_matrix,
              const Graphon& graphon, double graphon_bound = 0.0);

    double ell2(int i, int m) const {
        return ell2_values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                           static_cast<std::size_t>(m)];
    }
    double graphon(int j, int k) const {
        return graphon_values[static_cast<std::size_t>(j) * static_cast<std::size_t>(M) +
                              static_cast<std::size_t>(k)];
    }

    int n = 0;
    int M = 0;
    std::vector<double> ell2_values;     // n x n, row = x index, col = y index
    std::vector<double> graphon_values;  // M x M, symmetric

    double ell2_sup = 0.0;        // max |ell2| on the grid
    double ell2_lip_y = 0.0;      // discrete Lipschitz constant in y (all grid pairs)
    double ell2_lip_xquot_y = 0.0;  // same for the forward x-difference quotient
    double ell2_dx_sup = 0.0;     // max forward x-difference quotient
    double graphon_sup = 0.0;

    // Optional replacement for the integral coupling (general bounded-Lipschitz
    // cost operators). Subject to the same |.|_{0,0,1} boundedness check,
    // against custom_ell1_bound when one is configured.
    std::function<Field3(const Field3&)> custom_ell1;
    double custom_ell1_bound = 0.0;
};

/// Matrix of ell2(x_i, y_m) from a catalog expression in x and y.
std::vector<double> ell2_matrix_from_expression(const std::string& text, const TorusGrid& grid);

/// ell1(t, alpha_j, x_i) = sum_k (1/M) G_jk * h * sum_m ell2(x_i, y_m) mu(t, alpha_k, y_m).
/// Midpoint rule in alpha', exact discrete integral in y, fixed summation
/// order (k outer, m inner). The Assumption-2 style uniform bound
/// |ell1|_{0,0,1} <= |ell2|_{1,0} |g|_0 is asserted on every assembly.
Field3 assemble_ell1(const Field3& mu, const CostModel& cost, const TorusGrid& grid);

/// Lipschitz estimate of the assembly map:
/// |ell1[mu1] - ell1[mu2]|_{0,0,1} <= M_L rho(mu1, mu2) with the discrete
/// M_L = (Lip_y + Lip_y of x-quotients) * |g|_0.
BoundReport check_ell1_lipschitz(const CostModel& cost, const Field3& mu1, const Field3& mu2,
                                 const TorusGrid& grid);

} // namespace gmfg
