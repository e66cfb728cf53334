#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gmfg {

/// splitmix64: a counter-based mixing generator. Each (seed, stream) pair
/// yields an independent reproducible stream, so path simulations do not
/// depend on scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

inline SplitMix64 path_stream(std::uint64_t seed, std::uint64_t stream) {
    // Two mixing rounds separate the seed and stream contributions.
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return SplitMix64(mixer.next_u64());
}

/// Standard normal draws via Box-Muller, one cached value per stream.
class GaussianStream {
public:
    explicit GaussianStream(SplitMix64 rng) : rng_(rng) {}

    double next() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        const double u1 = 1.0 - rng_.uniform01();  // (0, 1]
        const double u2 = rng_.uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cache_ = r * std::sin(angle);
        has_cache_ = true;
        return r * std::cos(angle);
    }

private:
    SplitMix64 rng_;
    bool has_cache_ = false;
    double cache_ = 0.0;
};

} // namespace gmfg
