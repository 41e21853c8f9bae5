#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <adjts/problems/registry.hpp>
#include <adjts_cli/table.hpp>

namespace adjts::cli
{

struct CommonOptions {
    std::string problem = "aircraft";
    std::optional<std::string> method;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> grid;
    std::optional<std::size_t> capacity;
    std::string mode = "sol+stages";
    std::optional<std::string> disk_dir;
    std::uint64_t seed = 2021;
    bool parallel = false;
    std::optional<double> D1, D2, gamma, kappa;

    [[nodiscard]] ProblemOptions problem_options() const;
    [[nodiscard]] StorageOptions storage() const;
};

struct TaylorOptions {
    std::vector<double> h{5e-3, 5e-4, 5e-5};
    double order_tolerance = 0.1;
};

struct HvpTestOptions {
    std::vector<double> h{1e-2, 1e-3, 1e-4};
    double order_tolerance = 0.2;
    double symmetry_tolerance = 1e-8;
    bool zero_direction = false;
};

struct OptimalControlOptions {
    std::size_t intervals = 10;
    std::string optimizer = "both"; // lbfgs | newton | both
    double gtol = 1e-8;
    double compare_tol = 1e-6;
    std::size_t max_iter = 300;
    std::optional<double> v_max;
    bool on_leader = false;
};

struct InvertOptions {
    double perturbation = 0.05;
    std::size_t max_iter = 100;
    double gtol = 1e-10;
    double min_reduction = 1e3;
    double ratio_limit = 1.2;
};

struct RevolveOptions {
    std::size_t min_steps = 1;
    std::size_t max_steps = 60;
    std::size_t units = 12;
};

struct ValidateOptions {
    double tolerance = 1e-6;
};

[[nodiscard]] CommandResult cmd_taylor_test(const CommonOptions &common, const TaylorOptions &opts);
[[nodiscard]] CommandResult cmd_hvp_test(const CommonOptions &common, const HvpTestOptions &opts);
[[nodiscard]] CommandResult cmd_optimal_control(const CommonOptions &common, const OptimalControlOptions &opts);
[[nodiscard]] CommandResult cmd_grayscott_invert(const CommonOptions &common, const InvertOptions &opts);
[[nodiscard]] CommandResult cmd_revolve_stats(const CommonOptions &common, const RevolveOptions &opts);
[[nodiscard]] CommandResult cmd_integrate(const CommonOptions &common);
[[nodiscard]] CommandResult cmd_gradient(const CommonOptions &common, bool with_tlm);
[[nodiscard]] CommandResult cmd_validate(const CommonOptions &common, const ValidateOptions &opts);

// Empirical order log(e_prev / e) / log(h_prev / h); NaN when undefined.
[[nodiscard]] double empirical_order(double h_prev, double e_prev, double h, double e);

} // namespace adjts::cli
