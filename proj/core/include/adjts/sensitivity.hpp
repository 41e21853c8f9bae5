#pragma once

#include <cstddef>

#include <adjts/adjoint.hpp>
#include <adjts/checkpoint.hpp>
#include <adjts/second_order.hpp>

namespace adjts
{

// Forward run through a checkpointing provider followed by the reverse sweep.
struct GradientReport {
    Vector gradient; // with respect to the chosen target
    double cost = 0.0;
    Vector final_state;
    Vector lambda0;
    Vector mu0;
    std::size_t recomputations = 0;
    std::size_t predicted_recomputations = 0;
    std::size_t peak_checkpoints = 0;
    double forward_seconds = 0.0;
    double adjoint_seconds = 0.0;
};

[[nodiscard]] GradientReport compute_gradient(const DAEProblem &problem, const Objective &objective,
                                              const ParamMap &param_map, const StepperConfig &config, const Vector &p,
                                              HVPTarget target = HVPTarget::parameters,
                                              const StorageOptions &storage = {});

struct HVPReport {
    Vector hvp;
    Vector gradient;
    double cost = 0.0;
    std::size_t recomputations = 0;
    std::size_t predicted_recomputations = 0;
    double forward_seconds = 0.0;
    double adjoint_seconds = 0.0;
};

[[nodiscard]] HVPReport compute_hvp(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                                    const StepperConfig &config, const Vector &p, const Vector &sigma,
                                    HVPTarget target = HVPTarget::parameters, const StorageOptions &storage = {});

// Cost only, without storing anything.
[[nodiscard]] double evaluate_objective(const DAEProblem &problem, const Objective &objective,
                                        const ParamMap &param_map, const StepperConfig &config, const Vector &p);

} // namespace adjts
