#pragma once

#include <optional>
#include <string>
#include <vector>

#include <adjts/problems/setup.hpp>

namespace adjts
{

// Overrides understood by every registered problem; unset fields keep the
// problem's defaults.
struct ProblemOptions {
    std::optional<Method> method;
    std::optional<std::size_t> num_steps;
    std::optional<std::size_t> grid;
    std::optional<std::size_t> intervals; // aircraft control intervals
    std::optional<double> v_max;
    bool on_leader = false;
    std::optional<double> perturbation; // Gray-Scott starting guess
    std::optional<double> D1, D2, gamma, kappa;
};

[[nodiscard]] std::vector<std::string> problem_names();
// Throws ConfigurationError for an unknown name.
[[nodiscard]] std::unique_ptr<ProblemSetup> make_problem(const std::string &name, const ProblemOptions &opts = {});

} // namespace adjts
