#include "gmfg/graphon.hpp"

#include <algorithm>
#include <cmath>

#include "gmfg/errors.hpp"
#include "gmfg/wasserstein.hpp"

namespace gmfg {

AlphaGrid::AlphaGrid(int n_clusters) : M(n_clusters) {
    if (M < 1) throw InvalidInput("AlphaGrid: need at least one cluster");
    nodes.resize(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        nodes[static_cast<std::size_t>(j)] = (static_cast<double>(j) + 0.5) / M;
    }
    weight = 1.0 / M;
}

Graphon Graphon::constant(double p) {
    Graphon g;
    g.kind_ = GraphonKind::Constant;
    g.p_ = p;
    return g;
}

Graphon Graphon::uniform_attachment() {
    Graphon g;
    g.kind_ = GraphonKind::UniformAttachment;
    return g;
}

Graphon Graphon::piecewise_constant(std::vector<double> table, int K) {
    if (K < 1 || table.size() != static_cast<std::size_t>(K) * static_cast<std::size_t>(K)) {
        throw InvalidInput("Graphon: piecewise table must be K x K");
    }
    for (int a = 0; a < K; ++a) {
        for (int b = a + 1; b < K; ++b) {
            if (table[static_cast<std::size_t>(a) * K + b] !=
                table[static_cast<std::size_t>(b) * K + a]) {
                throw InvalidInput("Graphon: piecewise table is not symmetric");
            }
        }
    }
    Graphon g;
    g.kind_ = GraphonKind::PiecewiseConstant;
    g.table_ = std::move(table);
    g.table_K_ = K;
    return g;
}

Graphon Graphon::expression(const std::string& text) {
    Graphon g;
    g.kind_ = GraphonKind::Expr;
    g.expr_ = Expression::parse(text, {Var::Alpha, Var::Beta});
    return g;
}

double Graphon::operator()(double alpha, double alpha_prime) const {
    if (alpha < 0.0 || alpha > 1.0 || alpha_prime < 0.0 || alpha_prime > 1.0) {
        throw InvalidInput("Graphon: cluster coordinates must lie in [0,1]");
    }
    switch (kind_) {
        case GraphonKind::Constant:
            return p_;
        case GraphonKind::UniformAttachment:
            return 1.0 - std::max(alpha, alpha_prime);
        case GraphonKind::PiecewiseConstant: {
            const int a = std::min(table_K_ - 1, static_cast<int>(alpha * table_K_));
            const int b = std::min(table_K_ - 1, static_cast<int>(alpha_prime * table_K_));
            return table_[static_cast<std::size_t>(a) * table_K_ + b];
        }
        case GraphonKind::Expr: {
            VarValues v;
            v.alpha = alpha;
            v.beta = alpha_prime;
            return expr_.eval(v);
        }
    }
    return 0.0;
}

std::vector<double> Graphon::evaluate(const AlphaGrid& grid, double bound) const {
    const int M = grid.M;
    std::vector<double> G(static_cast<std::size_t>(M) * static_cast<std::size_t>(M), 0.0);
    for (int j = 0; j < M; ++j) {
        for (int k = j; k < M; ++k) {
            const double value = (*this)(grid.nodes[static_cast<std::size_t>(j)],
                                         grid.nodes[static_cast<std::size_t>(k)]);
            if (!std::isfinite(value)) throw InvalidInput("Graphon: non-finite value");
            if (bound > 0.0 && std::abs(value) > bound) {
                throw InvalidInput("Graphon: value exceeds configured bound");
            }
            G[static_cast<std::size_t>(j) * M + k] = value;
            G[static_cast<std::size_t>(k) * M + j] = value;  // symmetry by construction
        }
    }
    // Expression graphons must also be symmetric as functions.
    if (kind_ == GraphonKind::Expr) {
        for (int j = 0; j < M; ++j) {
            for (int k = 0; k < M; ++k) {
                const double gjk = (*this)(grid.nodes[static_cast<std::size_t>(j)],
                                           grid.nodes[static_cast<std::size_t>(k)]);
                const double gkj = (*this)(grid.nodes[static_cast<std::size_t>(k)],
                                           grid.nodes[static_cast<std::size_t>(j)]);
                if (std::abs(gjk - gkj) > 1e-12) {
                    throw InvalidInput("Graphon: expression is not symmetric");
                }
            }
        }
    }
    return G;
}

std::string Graphon::describe() const {
    switch (kind_) {
        case GraphonKind::Constant: return "constant(" + std::to_string(p_) + ")";
        case GraphonKind::UniformAttachment: return "uniform_attachment";
        case GraphonKind::PiecewiseConstant: return "piecewise_constant";
        case GraphonKind::Expr: return "expression";
    }
    return "?";
}

std::vector<double> ell2_matrix_from_expression(const std::string& text, const TorusGrid& grid) {
    const Expression expr = Expression::parse(text, {Var::X, Var::Y});
    const int n = grid.n;
    std::vector<double> values(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < n; ++m) {
            VarValues v;
            v.x = grid.nodes[static_cast<std::size_t>(i)];
            v.y = grid.nodes[static_cast<std::size_t>(m)];
            values[static_cast<std::size_t>(i) * n + m] = expr.eval(v);
        }
    }
    return values;
}

namespace {

// Exact discrete Lipschitz constant of the rows f(i, .) over all grid pairs
// with the torus metric. O(n^3) but computed once per model.
double grid_pair_lipschitz(const std::vector<double>& values, const TorusGrid& grid) {
    const int n = grid.n;
    double lip = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = values.data() + static_cast<std::size_t>(i) * n;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                const double dist = torus_distance(grid.nodes[static_cast<std::size_t>(a)],
                                                   grid.nodes[static_cast<std::size_t>(b)]);
                if (dist <= 0.0) continue;
                lip = std::max(lip, std::abs(row[a] - row[b]) / dist);
            }
        }
    }
    return lip;
}

} // namespace

CostModel::CostModel(const TorusGrid& grid, const AlphaGrid& alpha,
                     std::vector<double> ell2_matrix, const Graphon& graphon,
                     double graphon_bound)
    : n(grid.n), M(alpha.M), ell2_values(std::move(ell2_matrix)) {
    if (ell2_values.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        throw InvalidInput("CostModel: ell2 matrix must be n x n");
    }
    for (double v : ell2_values) {
        if (!std::isfinite(v)) throw InvalidInput("CostModel: ell2 has non-finite entries");
    }
    graphon_values = graphon.evaluate(alpha, graphon_bound);

    for (double v : ell2_values) ell2_sup = std::max(ell2_sup, std::abs(v));
    for (double v : graphon_values) graphon_sup = std::max(graphon_sup, std::abs(v));

    ell2_lip_y = grid_pair_lipschitz(ell2_values, grid);

    // Forward x-difference quotient rows and their y-Lipschitz constant.
    std::vector<double> quot(ell2_values.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        for (int m = 0; m < n; ++m) {
            quot[static_cast<std::size_t>(i) * n + m] =
                (ell2(ip, m) - ell2(i, m)) / grid.h;
        }
    }
    for (double v : quot) ell2_dx_sup = std::max(ell2_dx_sup, std::abs(v));
    ell2_lip_xquot_y = grid_pair_lipschitz(quot, grid);
}

namespace {

// sup of values plus sup of forward difference quotients, the |.|_{0,0,1}
// surrogate all coupling bounds are stated in.
void sup_and_quotient(const Field3& field, const TorusGrid& grid, double& sup, double& quot) {
    sup = 0.0;
    quot = 0.0;
    for (int level = 0; level < field.levels; ++level) {
        for (int j = 0; j < field.M; ++j) {
            const auto s = field.slice(level, j);
            for (int i = 0; i < field.n; ++i) {
                sup = std::max(sup, std::abs(s[i]));
                quot = std::max(quot, std::abs(s[(i + 1) % field.n] - s[i]) / grid.h);
            }
        }
    }
}

} // namespace

Field3 assemble_ell1(const Field3& mu, const CostModel& cost, const TorusGrid& grid) {
    if (mu.n != cost.n || mu.M != cost.M || mu.n != grid.n) {
        throw InvalidInput("assemble_ell1: shape mismatch");
    }
    if (cost.custom_ell1) {
        Field3 out = cost.custom_ell1(mu);
        require_same_shape(out, mu, "assemble_ell1(custom)");
        for (double v : out.data) {
            if (!std::isfinite(v)) {
                throw NumericalFailure("assemble_ell1: custom operator produced non-finite values");
            }
        }
        if (cost.custom_ell1_bound > 0.0) {
            double sup = 0.0, quot = 0.0;
            sup_and_quotient(out, grid, sup, quot);
            if (sup + quot > cost.custom_ell1_bound * (1.0 + 1e-9)) {
                throw NumericalFailure("assemble_ell1: custom operator exceeds its bound");
            }
        }
        return out;
    }

    const int n = mu.n;
    const int M = mu.M;
    const double alpha_w = 1.0 / M;
    Field3 out(mu.levels, M, n);

    // inner(k-cluster, x) = h * sum_m ell2(x, y_m) mu(t, alpha_k, y_m), reused
    // across the j-loop of each time level.
    std::vector<double> inner(static_cast<std::size_t>(M) * static_cast<std::size_t>(n), 0.0);
    for (int level = 0; level < mu.levels; ++level) {
        for (int k = 0; k < M; ++k) {
            const auto slice = mu.slice(level, k);
            for (int i = 0; i < n; ++i) {
                const double* row = cost.ell2_values.data() + static_cast<std::size_t>(i) * n;
                double acc = 0.0;
                for (int m = 0; m < n; ++m) acc += row[m] * slice[m];
                inner[static_cast<std::size_t>(k) * n + i] = grid.h * acc;
            }
        }
        for (int j = 0; j < M; ++j) {
            auto dst = out.slice(level, j);
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int k = 0; k < M; ++k) {
                    acc += cost.graphon(j, k) * inner[static_cast<std::size_t>(k) * n + i];
                }
                dst[i] = alpha_w * acc;
            }
        }
    }

    // Uniform boundedness |ell1|_{0,0,1} <= |ell2|_{1,0} |g|_0, valid for any
    // unit-mass density; a breach means the assembly itself is wrong.
    double sup = 0.0, quot = 0.0;
    sup_and_quotient(out, grid, sup, quot);
    const double bound = (cost.ell2_sup + cost.ell2_dx_sup) * cost.graphon_sup;
    if (sup + quot > bound + 1e-9 * (1.0 + bound)) {
        throw NumericalFailure("assemble_ell1: uniform boundedness check failed");
    }
    return out;
}

BoundReport check_ell1_lipschitz(const CostModel& cost, const Field3& mu1, const Field3& mu2,
                                 const TorusGrid& grid) {
    require_same_shape(mu1, mu2, "check_ell1_lipschitz");
    const Field3 a = assemble_ell1(mu1, cost, grid);
    const Field3 b = assemble_ell1(mu2, cost, grid);

    double sup = 0.0, quot = 0.0;
    const int n = grid.n;
    for (int level = 0; level < a.levels; ++level) {
        for (int j = 0; j < a.M; ++j) {
            const auto sa = a.slice(level, j);
            const auto sb = b.slice(level, j);
            for (int i = 0; i < n; ++i) {
                const double d = sa[i] - sb[i];
                sup = std::max(sup, std::abs(d));
                const int ip = (i + 1) % n;
                quot = std::max(quot, std::abs((sa[ip] - sb[ip]) - (sa[i] - sb[i])) / grid.h);
            }
        }
    }
    const double lhs = sup + quot;
    const double lip_const = (cost.ell2_lip_y + cost.ell2_lip_xquot_y) * cost.graphon_sup;
    const double rhs = lip_const * rho(mu1, mu2, grid);
    return make_bound_report("ell1_lipschitz", lhs, rhs, 1e-9 * (1.0 + rhs));
}

} // namespace gmfg
