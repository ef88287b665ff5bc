#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mos {

// Inequality checks report instead of throwing: a violated bound is a result,
// not a programming error. Slack convention: violation = lhs - rhs - tol,
// positive means the inequality failed.

inline double check_tol(double scale, double abs_slack = 1e-9, double rel_slack = 1e-9) {
    return abs_slack + rel_slack * std::abs(scale);
}

struct CheckFailure {
    std::string what;
    double lhs = 0.0;
    double rhs = 0.0;
    double violation = 0.0;
};

struct CheckReport {
    std::string name;
    bool passed = true;
    long n_checked = 0;
    long n_failed = 0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    std::vector<CheckFailure> failures;  // capped; n_failed holds the true count

    /// Records lhs <= rhs + tol.
    void expect_le(const std::string& what, double lhs, double rhs, double tol) {
        ++n_checked;
        const double violation = lhs - rhs - tol;
        worst_violation = std::max(worst_violation, violation);
        if (violation > 0.0 || !std::isfinite(lhs) || !std::isfinite(rhs)) {
            passed = false;
            ++n_failed;
            if (failures.size() < 16) failures.push_back({what, lhs, rhs, violation});
        }
    }

    void expect(const std::string& what, bool ok) {
        ++n_checked;
        if (!ok) {
            passed = false;
            ++n_failed;
            worst_violation = std::max(worst_violation, 0.0);
            if (failures.size() < 16) failures.push_back({what, 0.0, 0.0, 0.0});
        }
    }
};

}  // namespace mos
