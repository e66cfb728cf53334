#pragma once

#include <string>
#include <vector>

namespace gmfg {

/// Variables an expression may mention. Spatial variables only ever appear
/// inside sin/cos arguments with integer wave numbers, which keeps every
/// catalog function smooth and 1-periodic in x and y.
enum class Var { T, Alpha, Beta, X, Y };

struct VarValues {
    double t = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// sin or cos of 2*pi*(kx*x + ky*y) + phase.
struct TrigFactor {
    bool is_sin = false;
    int kx = 0;
    int ky = 0;
    double phase = 0.0;
};

/// coef * t^pt * alpha^pa * beta^pb * product of trig factors.
struct ExprTerm {
    double coef = 0.0;
    int pow_t = 0;
    int pow_alpha = 0;
    int pow_beta = 0;
    std::vector<TrigFactor> trigs;
};

/// Sum-of-products form of a catalog expression: polynomials in t, alpha,
/// beta times trigonometric polynomials in x, y. Closed under the exact
/// derivatives the solver needs.
class Expression {
public:
    Expression() = default;

    /// Parses the textual form. `allowed` restricts which variables may
    /// appear; anything else is rejected with a descriptive error.
    static Expression parse(const std::string& text, const std::vector<Var>& allowed);

    double eval(const VarValues& v) const;

    Expression deriv_t() const;
    Expression deriv_x() const;
    Expression deriv_y() const;

    bool uses(Var v) const;
    bool is_zero() const { return terms_.empty(); }

    /// Cheap upper bound on sup over [0,T] x [0,1]^2 x torus^2 of |expr|
    /// (trig factors bounded by 1, alpha and beta by 1).
    double sup_bound(double horizon) const;

    const std::vector<ExprTerm>& terms() const { return terms_; }

    static Expression constant(double value);

private:
    Expression deriv_spatial(bool wrt_x) const;

    std::vector<ExprTerm> terms_;
};

} // namespace gmfg
