#pragma once

#include <cstdint>

#include <adjts/problems/setup.hpp>

namespace adjts
{

// Gray-Scott reaction-diffusion on [0,2]^2, n x n periodic grid, 5-point
// Laplacian. State interleaved per node: U = [u_00, v_00, u_01, v_01, ...].
// Objective ||U(t_f) - U_ob||^2 with U_ob the reference solution; the
// optimization variable is U_0.
struct GrayScottOptions {
    std::size_t grid = 32;
    double D1 = 8e-5;
    double D2 = 4e-5;
    double gamma = 0.024;
    double kappa = 0.06;
    Method method = Method::backward_euler();
    std::size_t num_steps = 10;
    double tf = 5.0;
    // Amplitude of the smooth additive perturbation of the starting guess.
    double perturbation = 0.05;
    // Observations from a run with this method instead of `method`.
    std::optional<Method> observation_method;
};

struct GrayScottProblem {
    Vector reference_initial;
    Vector observation;
    ProblemSetup setup;
};

[[nodiscard]] std::unique_ptr<GrayScottProblem> make_grayscott(const GrayScottOptions &opts = {});

// The reaction-diffusion model alone (dim_param 0).
[[nodiscard]] DAEProblem grayscott_dynamics(const GrayScottOptions &opts);
[[nodiscard]] Vector grayscott_reference_initial(std::size_t grid);

} // namespace adjts
