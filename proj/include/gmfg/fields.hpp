#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmfg/errors.hpp"

namespace gmfg {

/// (time level, space node) array, contiguous per time level.
struct TimeSpaceField {
    TimeSpaceField() = default;
    TimeSpaceField(int n_levels, int n_space)
        : levels(n_levels), n(n_space),
          data(static_cast<std::size_t>(n_levels) * static_cast<std::size_t>(n_space), 0.0) {}

    double& operator()(int k, int i) { return data[idx(k, i)]; }
    double operator()(int k, int i) const { return data[idx(k, i)]; }

    std::span<double> level(int k) {
        return {data.data() + idx(k, 0), static_cast<std::size_t>(n)};
    }
    std::span<const double> level(int k) const {
        return {data.data() + idx(k, 0), static_cast<std::size_t>(n)};
    }

    std::size_t idx(int k, int i) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    }

    int levels = 0;
    int n = 0;
    std::vector<double> data;
};

/// (cluster, space node) array; one row per alpha node.
struct AlphaSpaceField {
    AlphaSpaceField() = default;
    AlphaSpaceField(int n_alpha, int n_space)
        : M(n_alpha), n(n_space),
          data(static_cast<std::size_t>(n_alpha) * static_cast<std::size_t>(n_space), 0.0) {}

    double& operator()(int j, int i) { return data[idx(j, i)]; }
    double operator()(int j, int i) const { return data[idx(j, i)]; }

    std::span<double> row(int j) {
        return {data.data() + idx(j, 0), static_cast<std::size_t>(n)};
    }
    std::span<const double> row(int j) const {
        return {data.data() + idx(j, 0), static_cast<std::size_t>(n)};
    }

    std::size_t idx(int j, int i) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    }

    int M = 0;
    int n = 0;
    std::vector<double> data;
};

/// (time level, cluster, space node) array; the layout keeps each (t, alpha)
/// slice contiguous so slice views are spans.
struct Field3 {
    Field3() = default;
    Field3(int n_levels, int n_alpha, int n_space)
        : levels(n_levels), M(n_alpha), n(n_space),
          data(static_cast<std::size_t>(n_levels) * static_cast<std::size_t>(n_alpha) *
                   static_cast<std::size_t>(n_space),
               0.0) {}

    double& operator()(int k, int j, int i) { return data[idx(k, j, i)]; }
    double operator()(int k, int j, int i) const { return data[idx(k, j, i)]; }

    std::span<double> slice(int k, int j) {
        return {data.data() + idx(k, j, 0), static_cast<std::size_t>(n)};
    }
    std::span<const double> slice(int k, int j) const {
        return {data.data() + idx(k, j, 0), static_cast<std::size_t>(n)};
    }

    bool same_shape(const Field3& other) const {
        return levels == other.levels && M == other.M && n == other.n;
    }

    std::size_t idx(int k, int j, int i) const {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(M) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    }

    int levels = 0;
    int M = 0;
    int n = 0;
    std::vector<double> data;
};

inline void require_same_shape(const Field3& a, const Field3& b, const char* where) {
    if (!a.same_shape(b)) {
        throw InvalidInput(std::string(where) + ": field shapes do not match");
    }
}

} // namespace gmfg
