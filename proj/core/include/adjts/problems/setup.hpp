#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include <adjts/checkpoint.hpp>
#include <adjts/forward.hpp>
#include <adjts/optimize.hpp>
#include <adjts/second_order.hpp>

namespace adjts
{

// A ready-to-run problem: dynamics, functional, parameterization, default
// integrator settings and the optimization variable's start and bounds.
// When target is initial_condition the optimization variable is u_0 itself
// and param (the DAE parameter vector) stays fixed.
struct ProblemSetup {
    std::string name;
    DAEProblem problem;
    Objective objective;
    ParamMap param_map;
    StepperConfig config;
    Vector param;
    HVPTarget target = HVPTarget::parameters;
    Vector x0;
    Bounds bounds;

    [[nodiscard]] std::size_t num_variables() const { return static_cast<std::size_t>(x0.size()); }
    // DAE parameters and initial-condition map for optimization variable x.
    [[nodiscard]] Vector param_for(const Vector &x) const;
    [[nodiscard]] ParamMap param_map_for(const Vector &x) const;
};

[[nodiscard]] double setup_cost(const ProblemSetup &setup, const Vector &x);
[[nodiscard]] CostGradient setup_gradient(const ProblemSetup &setup, const Vector &x,
                                          const StorageOptions &storage = {});
[[nodiscard]] Vector setup_hvp(const ProblemSetup &setup, const Vector &x, const Vector &sigma,
                               const StorageOptions &storage = {});

} // namespace adjts
