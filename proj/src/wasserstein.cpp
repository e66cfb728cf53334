#include "gmfg/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmfg/errors.hpp"

namespace gmfg {

DiscreteMeasure measure_from_density(const TorusGrid& grid, std::span<const double> density) {
    if (density.size() != static_cast<std::size_t>(grid.n)) {
        throw InvalidInput("measure_from_density: density length does not match grid");
    }
    DiscreteMeasure m;
    m.grid = &grid;
    m.weights.resize(density.size());
    for (std::size_t i = 0; i < density.size(); ++i) m.weights[i] = grid.h * density[i];
    return m;
}

namespace {

void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.grid == nullptr || nu.grid == nullptr || mu.grid->n != nu.grid->n ||
        mu.weights.size() != nu.weights.size() ||
        mu.weights.size() != static_cast<std::size_t>(mu.grid->n)) {
        throw InvalidInput("w1: measures live on different grids");
    }
}

// Median of a scratch copy; for even sizes the lower median, which also
// minimizes the L1 objective.
double median_of(std::vector<double> values) {
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    return values[mid];
}

} // namespace

double w1_circle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    check_pair(mu, nu);
    const std::size_t n = mu.weights.size();
    std::vector<double> cdf_diff(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += mu.weights[i] - nu.weights[i];
        cdf_diff[i] = running;
    }
    const double shift = median_of(cdf_diff);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::abs(cdf_diff[i] - shift);
    return mu.grid->h * total;
}

// ---------------------------------------------------------------------------
// LP oracle: successive shortest paths on the bipartite transport network.
// Sources are mu-nodes with remaining supply, sinks nu-nodes with remaining
// demand; Bellman-Ford handles the negative reduced costs of residual arcs.
// ---------------------------------------------------------------------------

double w1_lp_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    check_pair(mu, nu);
    const int n = mu.grid->n;
    if (n > 64) {
        throw InvalidInput("w1_lp_oracle: refusing n > 64 (cost grows like n^3)");
    }

    std::vector<double> supply(mu.weights.begin(), mu.weights.end());
    std::vector<double> demand(nu.weights.begin(), nu.weights.end());
    std::vector<std::vector<double>> flow(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cost[i][j] = torus_distance(mu.grid->nodes[static_cast<std::size_t>(i)],
                                        nu.grid->nodes[static_cast<std::size_t>(j)]);
        }
    }

    const double mass_eps = 1e-15;
    auto total_supply = [&]() {
        double s = 0.0;
        for (double v : supply) s += std::max(v, 0.0);
        return s;
    };

    double objective = 0.0;
    while (total_supply() > mass_eps) {
        // Bellman-Ford over 2n nodes: 0..n-1 are mu-side, n..2n-1 nu-side.
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(static_cast<std::size_t>(2 * n), inf);
        std::vector<int> parent(static_cast<std::size_t>(2 * n), -1);
        for (int i = 0; i < n; ++i) {
            if (supply[i] > mass_eps) dist[i] = 0.0;
        }
        bool changed = true;
        for (int round = 0; changed && round < 2 * n + 2; ++round) {
            changed = false;
            for (int i = 0; i < n; ++i) {
                if (dist[i] == inf) continue;
                for (int j = 0; j < n; ++j) {
                    const double d = dist[i] + cost[i][j];
                    if (d < dist[n + j] - 1e-18) {
                        dist[n + j] = d;
                        parent[n + j] = i;
                        changed = true;
                    }
                }
            }
            for (int j = 0; j < n; ++j) {
                if (dist[n + j] == inf) continue;
                for (int i = 0; i < n; ++i) {
                    if (flow[i][j] <= mass_eps) continue;  // residual arc needs flow
                    const double d = dist[n + j] - cost[i][j];
                    if (d < dist[i] - 1e-18) {
                        dist[i] = d;
                        parent[i] = n + j;
                        changed = true;
                    }
                }
            }
        }

        // Cheapest reachable sink with remaining demand.
        int best = -1;
        for (int j = 0; j < n; ++j) {
            if (demand[j] > mass_eps && dist[n + j] < inf) {
                if (best < 0 || dist[n + j] < dist[n + best]) best = j;
            }
        }
        if (best < 0) {
            throw NumericalFailure("w1_lp_oracle: no augmenting path (unbalanced masses?)");
        }

        // Trace the path back, find bottleneck. Forward arcs are uncapacitated;
        // residual arcs are limited by the flow they undo.
        double bottleneck = demand[best];
        int node = n + best;
        for (int hops = 0;; ++hops) {
            if (hops > 2 * n + 2) {
                throw NumericalFailure("w1_lp_oracle: parent chain does not terminate");
            }
            const int prev = parent[node];
            if (node < n && prev >= 0) {
                bottleneck = std::min(bottleneck, flow[node][prev - n]);
            }
            if (prev < 0) {
                bottleneck = std::min(bottleneck, supply[node]);
                break;
            }
            node = prev;
        }

        // Apply the augmentation.
        node = n + best;
        while (true) {
            const int prev = parent[node];
            if (prev < 0) break;
            if (node >= n) {
                flow[prev][node - n] += bottleneck;
                objective += bottleneck * cost[prev][node - n];
            } else {
                flow[node][prev - n] -= bottleneck;
                objective -= bottleneck * cost[node][prev - n];
            }
            node = prev;
        }
        supply[node] -= bottleneck;
        demand[best] -= bottleneck;
    }
    return objective;
}

double rho(const Field3& mu1, const Field3& mu2, const TorusGrid& grid) {
    require_same_shape(mu1, mu2, "rho");
    if (mu1.n != grid.n) throw InvalidInput("rho: fields do not match grid");
    double worst = 0.0;
    for (int k = 0; k < mu1.levels; ++k) {
        for (int j = 0; j < mu1.M; ++j) {
            const DiscreteMeasure a = measure_from_density(grid, mu1.slice(k, j));
            const DiscreteMeasure b = measure_from_density(grid, mu2.slice(k, j));
            worst = std::max(worst, w1_circle(a, b));
        }
    }
    return worst;
}

double first_moment(const TorusGrid& grid, std::span<const double> density) {
    double moment = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        moment += grid.nodes[static_cast<std::size_t>(i)] * density[static_cast<std::size_t>(i)];
    }
    return moment * grid.h;
}

SHalfNorm s_half_norm(const Field3& mu, const TorusGrid& grid, const TimeGrid& tgrid) {
    if (mu.n != grid.n || mu.levels != tgrid.n_levels()) {
        throw InvalidInput("s_half_norm: field does not match grids");
    }
    SHalfNorm out;
    for (int k = 0; k < mu.levels; ++k) {
        for (int j = 0; j < mu.M; ++j) {
            out.moment_part = std::max(out.moment_part, first_moment(grid, mu.slice(k, j)));
        }
    }
    if (mu.levels < 2) return out;  // single slice: empty sup, zero by convention

    // Consecutive-slice distances give a triangle-inequality upper bound that
    // prunes pairs which cannot move the maximum ratio.
    for (int j = 0; j < mu.M; ++j) {
        std::vector<double> prefix(static_cast<std::size_t>(mu.levels), 0.0);
        for (int k = 0; k + 1 < mu.levels; ++k) {
            const DiscreteMeasure a = measure_from_density(grid, mu.slice(k, j));
            const DiscreteMeasure b = measure_from_density(grid, mu.slice(k + 1, j));
            prefix[static_cast<std::size_t>(k) + 1] =
                prefix[static_cast<std::size_t>(k)] + w1_circle(a, b);
        }
        for (int k1 = 0; k1 < mu.levels; ++k1) {
            for (int k2 = k1 + 1; k2 < mu.levels; ++k2) {
                const double gap = std::sqrt((k2 - k1) * tgrid.dt);
                const double upper =
                    prefix[static_cast<std::size_t>(k2)] - prefix[static_cast<std::size_t>(k1)];
                if (upper <= out.holder_part * gap) continue;
                const DiscreteMeasure a = measure_from_density(grid, mu.slice(k1, j));
                const DiscreteMeasure b = measure_from_density(grid, mu.slice(k2, j));
                out.holder_part = std::max(out.holder_part, w1_circle(a, b) / gap);
            }
        }
    }
    return out;
}

double duality_gap_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         std::span<const double> f) {
    check_pair(mu, nu);
    const std::size_t n = mu.weights.size();
    if (f.size() != n) throw InvalidInput("duality_gap_probe: f length mismatch");
    const double h = mu.grid->h;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1) % n;
        if (std::abs(f[ip] - f[i]) > h + 1e-12) {
            throw InvalidInput("duality_gap_probe: f is not 1-Lipschitz on the discrete torus");
        }
    }
    double pairing = 0.0;
    for (std::size_t i = 0; i < n; ++i) pairing += f[i] * (mu.weights[i] - nu.weights[i]);
    const double d1 = w1_circle(mu, nu);
    if (pairing > d1 + 1e-10) {
        throw NumericalFailure("duality_gap_probe: pairing exceeds d1; duality violated");
    }
    return pairing;
}

} // namespace gmfg
