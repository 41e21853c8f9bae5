#pragma once

#include <string>
#include <vector>

#include <adjts/problem.hpp>

namespace adjts
{

struct ValidationEntry {
    std::string callback;
    double max_rel_discrepancy = 0.0;
    bool passed = false;
    std::string note; // location of non-finite output, skipped reasons, ...
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] const ValidationEntry *find(const std::string &callback) const;
    [[nodiscard]] double max_discrepancy() const;
};

// Compares every supplied derivative callback against central differences of
// its parent quantity at (t, u, p). Discrepancies are measured as
// ||analytic - fd||_inf / max(||fd||_inf, 1e-8); non-finite outputs are
// reported as failures rather than thrown.
[[nodiscard]] ValidationReport validate_derivatives(const DAEProblem &problem, const Objective &objective,
                                                    const TimePoint &t, const Vector &u, const Vector &p,
                                                    double tol);

} // namespace adjts
