#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <adjts/linalg.hpp>

namespace adjts
{

struct Bounds {
    Vector lower;
    Vector upper;

    static Bounds none(std::size_t n);
    static Bounds box(Vector lower, Vector upper);

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
    [[nodiscard]] Vector project(const Vector &x) const;
    // Throws ConfigurationError unless lower <= upper with matching sizes.
    void validate(std::size_t n) const;
    // Components at a bound whose gradient points outward.
    [[nodiscard]] std::vector<bool> active_set(const Vector &x, const Vector &g) const;
    // x - P(x - g): zero exactly at KKT points.
    [[nodiscard]] Vector projected_gradient(const Vector &x, const Vector &g) const;
};

struct CostGradient {
    double cost = 0.0;
    Vector gradient;
};

using EvalFn = std::function<CostGradient(const Vector &)>;
using HessVecFn = std::function<Vector(const Vector &x, const Vector &sigma)>;

struct OptimizeOptions {
    double gtol = 1e-8;
    std::size_t max_iter = 200;
    std::size_t memory = 10; // L-BFGS pairs
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    std::size_t max_backtracks = 60;
    std::size_t max_cg = 0;             // 0: twice the number of variables
    std::optional<double> cg_rtol;      // fixed CG tolerance; default min(0.5, sqrt(||g||))
    std::function<void(std::size_t, double, double)> on_iteration; // (iter, cost, gradnorm)
};

struct IterationRecord {
    std::size_t iter = 0;
    double cost = 0.0;
    double gradnorm = 0.0;
    std::size_t inner = 0; // CG iterations (Newton) or backtracks (L-BFGS)
};

struct OptimizeResult {
    Vector x;
    double cost = 0.0;
    Vector gradient;
    double gradnorm = 0.0;
    std::vector<IterationRecord> history;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    std::size_t hvp_evaluations = 0;
    bool converged = false;
    bool line_search_failed = false;
    bool cg_breakdown = false; // a steepest-descent fallback happened at least once
    std::string message;

    // First iteration whose projected-gradient norm is at or below tol.
    [[nodiscard]] std::optional<std::size_t> iterations_to(double tol) const;
};

[[nodiscard]] OptimizeResult lbfgs_minimize(const EvalFn &eval, const Vector &x0, const Bounds &bounds,
                                            const OptimizeOptions &opts = {});

[[nodiscard]] OptimizeResult newton_minimize(const EvalFn &eval, const HessVecFn &hvp, const Vector &x0,
                                             const Bounds &bounds, const OptimizeOptions &opts = {});

// CSV: iter,cost,gradnorm
void write_history_csv(std::ostream &os, const std::vector<IterationRecord> &history);

} // namespace adjts
