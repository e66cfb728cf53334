#include "gmfg/feynman_kac.hpp"

#include <algorithm>
#include <cmath>

#include "gmfg/errors.hpp"
#include "gmfg/parallel.hpp"
#include "gmfg/rng.hpp"

namespace gmfg {

void McConfig::validate(double solver_dt) const {
    if (n_paths < 100) throw InvalidInput("McConfig: n_paths must be at least 100");
    if (!(dt_mc > 0.0)) throw InvalidInput("McConfig: dt_mc must be positive");
    if (solver_dt > 0.0 && dt_mc > solver_dt * (1.0 + 1e-12)) {
        throw InvalidInput("McConfig: dt_mc must not exceed the solver dt");
    }
}

double interp_periodic(const TorusGrid& grid, std::span<const double> values, double x) {
    const double u = wrap(x) / grid.h;
    int i0 = static_cast<int>(u);
    if (i0 >= grid.n) i0 = grid.n - 1;
    const double frac = u - i0;
    const int i1 = (i0 + 1) % grid.n;
    return values[static_cast<std::size_t>(i0)] * (1.0 - frac) +
           values[static_cast<std::size_t>(i1)] * frac;
}

namespace {

constexpr int kBlock = 4096;

struct MomentAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;
};

McEstimate reduce_moments(const std::vector<MomentAccumulator>& blocks) {
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (const auto& b : blocks) {
        sum += b.sum;
        sum_sq += b.sum_sq;
        count += b.count;
    }
    McEstimate est;
    est.n_paths = static_cast<int>(count);
    est.mean = sum / static_cast<double>(count);
    if (count > 1) {
        const double var =
            std::max(0.0, (sum_sq - static_cast<double>(count) * est.mean * est.mean) /
                              static_cast<double>(count - 1));
        est.std_error = std::sqrt(var / static_cast<double>(count));
    }
    return est;
}

} // namespace

McEstimate mc_parabolic(const ScalarField2D& c, const ScalarField2D& f, double t, double x,
                        double T, const McConfig& cfg, int threads) {
    cfg.validate(0.0);
    if (t >= T) return McEstimate{0.0, 0.0, cfg.n_paths};

    const double span = T - t;
    const int n_steps = std::max(1, static_cast<int>(std::ceil(span / cfg.dt_mc - 1e-12)));
    const double dt = span / n_steps;
    const double sqrt_dt = std::sqrt(dt);

    const int samples = cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
    const int n_blocks = (samples + kBlock - 1) / kBlock;
    std::vector<MomentAccumulator> blocks(static_cast<std::size_t>(n_blocks));

    parallel_for(n_blocks, threads, [&](int blk) {
        MomentAccumulator acc;
        const int begin = blk * kBlock;
        const int end = std::min(samples, begin + kBlock);
        for (int s = begin; s < end; ++s) {
            GaussianStream gauss(path_stream(cfg.rng_seed, static_cast<std::uint64_t>(s)));
            double xp = x, xm = x;       // antithetic pair of positions
            double dp = 0.0, dm = 0.0;   // accumulated discount integrals
            double vp = 0.0, vm = 0.0;   // accumulated value integrals
            for (int j = 0; j < n_steps; ++j) {
                const double s_time = t + j * dt;
                vp += std::exp(-dp) * f(s_time, xp) * dt;
                dp += c(s_time, xp) * dt;
                const double xi = gauss.next();
                xp = wrap(xp + sqrt_dt * xi);
                if (cfg.antithetic) {
                    vm += std::exp(-dm) * f(s_time, xm) * dt;
                    dm += c(s_time, xm) * dt;
                    xm = wrap(xm - sqrt_dt * xi);
                }
            }
            const double sample = cfg.antithetic ? 0.5 * (vp + vm) : vp;
            acc.sum += sample;
            acc.sum_sq += sample * sample;
            acc.count += 1;
        }
        blocks[static_cast<std::size_t>(blk)] = acc;
    });
    McEstimate est = reduce_moments(blocks);
    if (cfg.antithetic) est.n_paths *= 2;
    return est;
}

std::vector<std::vector<double>> simulate_particles(const TimeSpaceField& drift,
                                                    std::span<const double> m0_weights,
                                                    const TorusGrid& grid, const TimeGrid& tgrid,
                                                    const McConfig& cfg, int threads) {
    cfg.validate(tgrid.dt);
    if (drift.n != grid.n || drift.levels != tgrid.n_levels() ||
        m0_weights.size() != static_cast<std::size_t>(grid.n)) {
        throw InvalidInput("simulate_particles: shapes do not match the grids");
    }

    const int n = grid.n;
    const int levels = tgrid.n_levels();
    std::vector<double> cumulative(static_cast<std::size_t>(n), 0.0);
    double running = 0.0;
    for (int i = 0; i < n; ++i) {
        running += m0_weights[static_cast<std::size_t>(i)];
        cumulative[static_cast<std::size_t>(i)] = running;
    }
    const double total = running;

    const int sub_steps = std::max(1, static_cast<int>(std::ceil(tgrid.dt / cfg.dt_mc - 1e-12)));
    const double dt_s = tgrid.dt / sub_steps;
    const double sqrt_dt = std::sqrt(dt_s);

    const int n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;
    std::vector<std::vector<long>> counts(
        static_cast<std::size_t>(n_blocks),
        std::vector<long>(static_cast<std::size_t>(levels) * static_cast<std::size_t>(n), 0));

    auto bin_of = [&](double pos) {
        int b = static_cast<int>(std::floor(pos / grid.h + 0.5));
        return ((b % n) + n) % n;
    };

    parallel_for(n_blocks, threads, [&](int blk) {
        auto& local = counts[static_cast<std::size_t>(blk)];
        const int begin = blk * kBlock;
        const int end = std::min(cfg.n_paths, begin + kBlock);
        for (int p = begin; p < end; ++p) {
            SplitMix64 rng = path_stream(cfg.rng_seed, static_cast<std::uint64_t>(p));
            GaussianStream gauss(path_stream(cfg.rng_seed ^ 0xA5A5A5A5A5A5A5A5ULL,
                                             static_cast<std::uint64_t>(p)));
            // Inverse CDF with within-cell uniform jitter.
            const double u = rng.uniform01() * total;
            int cell = static_cast<int>(
                std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            if (cell >= n) cell = n - 1;
            const double prev = cell > 0 ? cumulative[static_cast<std::size_t>(cell) - 1] : 0.0;
            const double w = m0_weights[static_cast<std::size_t>(cell)];
            const double r = w > 0.0 ? std::clamp((u - prev) / w, 0.0, 1.0) : 0.5;
            double pos = wrap(grid.nodes[static_cast<std::size_t>(cell)] + (r - 0.5) * grid.h);

            local[static_cast<std::size_t>(bin_of(pos))] += 1;
            for (int k = 0; k < tgrid.n_t; ++k) {
                const auto level_drift = drift.level(k);
                for (int sub = 0; sub < sub_steps; ++sub) {
                    const double v = interp_periodic(grid, level_drift, pos);
                    pos = wrap(pos + v * dt_s + sqrt_dt * gauss.next());
                }
                local[static_cast<std::size_t>(k + 1) * n + bin_of(pos)] += 1;
            }
        }
    });

    std::vector<std::vector<double>> histograms(
        static_cast<std::size_t>(levels), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int k = 0; k < levels; ++k) {
        for (int i = 0; i < n; ++i) {
            long c = 0;
            for (int blk = 0; blk < n_blocks; ++blk) {
                c += counts[static_cast<std::size_t>(blk)][static_cast<std::size_t>(k) * n + i];
            }
            histograms[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                static_cast<double>(c) / cfg.n_paths;
        }
    }
    return histograms;
}

McEstimate cost_functional(const TimeSpaceField& control, const Field3& mu,
                           const CostModel& cost, int alpha_index, const DriftPotential& b,
                           const TorusGrid& grid, const AlphaGrid& alpha, const TimeGrid& tgrid,
                           const McConfig& cfg, int threads) {
    cfg.validate(tgrid.dt);
    if (control.n != grid.n || control.levels != tgrid.n_levels()) {
        throw InvalidInput("cost_functional: control does not conform to the grids");
    }
    if (alpha_index < 0 || alpha_index >= alpha.M) {
        throw InvalidInput("cost_functional: alpha index out of range");
    }
    const Field3 ell1 = assemble_ell1(mu, cost, grid);
    const double a_node = alpha.nodes[static_cast<std::size_t>(alpha_index)];

    const int sub_steps = std::max(1, static_cast<int>(std::ceil(tgrid.dt / cfg.dt_mc - 1e-12)));
    const double dt_s = tgrid.dt / sub_steps;
    const double sqrt_dt = std::sqrt(dt_s);

    const int samples = cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
    const int n_blocks = (samples + kBlock - 1) / kBlock;
    std::vector<MomentAccumulator> blocks(static_cast<std::size_t>(n_blocks));

    // Initial positions from m0 = mu at time zero for this cluster.
    const auto mu0 = mu.slice(0, alpha_index);
    std::vector<double> cumulative(static_cast<std::size_t>(grid.n), 0.0);
    double running = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        running += mu0[i] * grid.h;
        cumulative[static_cast<std::size_t>(i)] = running;
    }

    parallel_for(n_blocks, threads, [&](int blk) {
        MomentAccumulator acc;
        const int begin = blk * kBlock;
        const int end = std::min(samples, begin + kBlock);
        for (int s = begin; s < end; ++s) {
            SplitMix64 rng = path_stream(cfg.rng_seed, static_cast<std::uint64_t>(s));
            GaussianStream gauss(path_stream(cfg.rng_seed ^ 0xA5A5A5A5A5A5A5A5ULL,
                                             static_cast<std::uint64_t>(s)));
            const double u = rng.uniform01() * running;
            int cell = static_cast<int>(
                std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            if (cell >= grid.n) cell = grid.n - 1;
            const double prev = cell > 0 ? cumulative[static_cast<std::size_t>(cell) - 1] : 0.0;
            const double w = mu0[cell] * grid.h;
            const double r = w > 0.0 ? std::clamp((u - prev) / w, 0.0, 1.0) : 0.5;
            const double start =
                wrap(grid.nodes[static_cast<std::size_t>(cell)] + (r - 0.5) * grid.h);

            double xp = start, xm = start;
            double jp = 0.0, jm = 0.0;
            for (int k = 0; k < tgrid.n_t; ++k) {
                const auto a_level = control.level(k);
                const auto ell_level = ell1.slice(k, alpha_index);
                const double t_base = tgrid.time(k);
                for (int sub = 0; sub < sub_steps; ++sub) {
                    const double t_now = t_base + sub * dt_s;
                    {
                        const double a_val = interp_periodic(grid, a_level, xp);
                        const double run =
                            0.5 * a_val * a_val + interp_periodic(grid, ell_level, xp);
                        jp += run * dt_s;
                        const double driftv = b.grad_b(t_now, a_node, xp) + a_val;
                        const double xi = gauss.next();
                        xp = wrap(xp + driftv * dt_s + sqrt_dt * xi);
                        if (cfg.antithetic) {
                            const double am_val = interp_periodic(grid, a_level, xm);
                            const double runm =
                                0.5 * am_val * am_val + interp_periodic(grid, ell_level, xm);
                            jm += runm * dt_s;
                            const double driftm = b.grad_b(t_now, a_node, xm) + am_val;
                            xm = wrap(xm + driftm * dt_s - sqrt_dt * xi);
                        } else {
                            (void)xm;
                        }
                    }
                }
            }
            const double sample = cfg.antithetic ? 0.5 * (jp + jm) : jp;
            acc.sum += sample;
            acc.sum_sq += sample * sample;
            acc.count += 1;
        }
        blocks[static_cast<std::size_t>(blk)] = acc;
    });
    McEstimate est = reduce_moments(blocks);
    if (cfg.antithetic) est.n_paths *= 2;
    return est;
}

double bootstrap_w1_std_error(std::span<const double> histogram_masses,
                              std::span<const double> reference_density, const TorusGrid& grid,
                              int n_paths, int n_resamples, std::uint64_t seed) {
    const int n = grid.n;
    if (histogram_masses.size() != static_cast<std::size_t>(n) ||
        reference_density.size() != static_cast<std::size_t>(n)) {
        throw InvalidInput("bootstrap_w1_std_error: shapes do not match the grid");
    }
    std::vector<double> cumulative(static_cast<std::size_t>(n), 0.0);
    double running = 0.0;
    for (int i = 0; i < n; ++i) {
        running += histogram_masses[static_cast<std::size_t>(i)];
        cumulative[static_cast<std::size_t>(i)] = running;
    }
    DiscreteMeasure ref = measure_from_density(grid, reference_density);

    std::vector<double> distances(static_cast<std::size_t>(n_resamples), 0.0);
    for (int rep = 0; rep < n_resamples; ++rep) {
        SplitMix64 rng = path_stream(seed, static_cast<std::uint64_t>(rep));
        std::vector<double> resampled(static_cast<std::size_t>(n), 0.0);
        for (int p = 0; p < n_paths; ++p) {
            const double u = rng.uniform01() * running;
            int cell = static_cast<int>(
                std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            if (cell >= n) cell = n - 1;
            resampled[static_cast<std::size_t>(cell)] += 1.0;
        }
        for (double& v : resampled) v /= n_paths;
        DiscreteMeasure emp;
        emp.grid = &grid;
        emp.weights = std::move(resampled);
        distances[static_cast<std::size_t>(rep)] = w1_circle(emp, ref);
    }
    double mean = 0.0;
    for (double d : distances) mean += d;
    mean /= n_resamples;
    double var = 0.0;
    for (double d : distances) var += (d - mean) * (d - mean);
    var /= std::max(1, n_resamples - 1);
    return std::sqrt(var);
}

} // namespace gmfg
