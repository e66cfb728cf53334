#pragma once

#include <string>
#include <vector>

namespace gmfg {

/// Outcome of a single a-priori bound assertion: lhs <= rhs + slack.
struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool passed = true;

    double margin() const { return rhs - lhs; }
};

inline BoundReport make_bound_report(std::string name, double lhs, double rhs, double slack) {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = slack;
    r.passed = lhs <= rhs + slack;
    return r;
}

inline bool all_passed(const std::vector<BoundReport>& reports) {
    for (const auto& r : reports) {
        if (!r.passed) return false;
    }
    return true;
}

} // namespace gmfg
