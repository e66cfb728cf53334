#pragma once

#include <string>
#include <vector>

#include "gmfg/bounds.hpp"
#include "gmfg/expressions.hpp"
#include "gmfg/fields.hpp"
#include "gmfg/graphon.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Smooth drift potential b(t, alpha, x) from the analytic catalog, with
/// exact time derivative, spatial gradient and Laplacian. Derivative
/// consistency against finite differences is validated at construction.
class DriftPotential {
public:
    explicit DriftPotential(const std::string& text);
    static DriftPotential zero();

    double b(double t, double alpha, double x) const;
    double dt_b(double t, double alpha, double x) const;
    double grad_b(double t, double alpha, double x) const;
    double lap_b(double t, double alpha, double x) const;

    bool is_zero() const { return expr_.is_zero(); }
    const std::string& text() const { return text_; }

private:
    DriftPotential() = default;
    void validate_derivatives() const;

    std::string text_ = "0";
    Expression expr_;
    Expression d_t_;
    Expression d_x_;
    Expression d_xx_;
};

/// Hopf-Cole fields for every (time level, cluster, node): the positive
/// variable w, the transformed value v_tilde = -log w, and grad v_tilde
/// = -grad w / w. The untransformed value v = v_tilde + b is assembled on
/// demand.
struct ValueField {
    Field3 w;
    Field3 v_tilde;
    Field3 grad_v_tilde;

    Field3 value(const DriftPotential& b, const TorusGrid& grid, const AlphaGrid& alpha,
                 const TimeGrid& tgrid) const;
};

struct Phi1Result {
    ValueField fields;
    Field3 ell_tilde;
    std::vector<BoundReport> harnack;  // lower and upper per cluster
};

/// Effective running cost ell_tilde = ell1 + d_t b + 1/2 |grad b|^2 + 1/2 lap b.
Field3 effective_cost(const Field3& ell1, const DriftPotential& b, const TorusGrid& grid,
                      const AlphaGrid& alpha, const TimeGrid& tgrid);

/// Backward linear solve for one cluster: d_t w + 1/2 lap w - w ell_tilde = 0
/// from the terminal datum exp(b(T, alpha, .)), by time reversal into the
/// forward parabolic solver with an exact-exponential reaction splitting.
TimeSpaceField solve_w(const TimeSpaceField& ell_tilde_slice, const DriftPotential& b,
                       double alpha, const TorusGrid& grid, const TimeGrid& tgrid);

/// Two-sided Harnack bound for a w slice:
///   exp(-(|b(T)|_0 + |ell_tilde|_0 T)) <= w <= exp(|b(T)|_0 + |ell_tilde|_0 T)
/// with per-cluster sup norms over the grid.
std::pair<BoundReport, BoundReport> check_harnack(const TimeSpaceField& w_slice,
                                                  const TimeSpaceField& ell_tilde_slice,
                                                  const DriftPotential& b, double alpha,
                                                  const TorusGrid& grid, const TimeGrid& tgrid);

/// The operator Phi_1: assembles ell1[mu], forms the effective cost, solves w
/// independently per cluster (parallel over clusters), and returns
/// grad v_tilde together with the cached transform fields.
Phi1Result phi1(const Field3& mu, const CostModel& cost, const DriftPotential& b,
                const TorusGrid& grid, const AlphaGrid& alpha, const TimeGrid& tgrid,
                int threads = 1);

} // namespace gmfg
