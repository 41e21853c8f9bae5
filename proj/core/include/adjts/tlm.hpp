#pragma once

#include <cstddef>
#include <vector>

#include <adjts/forward.hpp>

namespace adjts
{

// Tangent of one forward step applied to a block of k directions.
// S holds dU/d(seed) in its columns; V2 holds the matching parameter
// directions (N_p x k). Directional mode is simply k = 1.
struct TangentStep {
    DenseMatrix S_next;
    std::vector<DenseMatrix> stages; // theta: {S_n}; RK4: {dU_1, ..., dU_4}
    Eigen::RowVectorXd dq;           // quadrature of r_u S + r_p V2 over the step
};

[[nodiscard]] TangentStep tlm_theta_step(const Stepper &stepper, const StepRecord &rec, const DenseMatrix &S_n,
                                         const DenseMatrix &V2);
[[nodiscard]] TangentStep tlm_rk4_step(const Stepper &stepper, const StepRecord &rec, const DenseMatrix &S_n,
                                       const DenseMatrix &V2);
[[nodiscard]] TangentStep tlm_step(const Stepper &stepper, const StepRecord &rec, const DenseMatrix &S_n,
                                   const DenseMatrix &V2);

// Directional form: fills rec.tangent_stages, rec.tangent_end and
// rec.tangent_cost_increment from w_n and v2.
void tlm_step_directional(const Stepper &stepper, StepRecord &rec, const Vector &w_n, const Vector &v2);

struct TLMState {
    DenseMatrix S;  // N_d x k
    DenseMatrix V2; // N_p x k
    Eigen::RowVectorXd Q;
    std::size_t step = 0;

    [[nodiscard]] bool directional() const { return S.cols() == 1; }
    [[nodiscard]] std::size_t columns() const { return static_cast<std::size_t>(S.cols()); }

    // S_0 = eta_p, V2 = I: full parameter sensitivities.
    static TLMState parameters(const ParamMap &param_map, const Vector &p, std::size_t dim_state);
    // S_0 = I, V2 = 0: sensitivities with respect to the initial state.
    static TLMState initial_condition(std::size_t dim_state, std::size_t dim_param);
    // Single direction (w_0, v2).
    static TLMState direction(const Vector &w0, const Vector &v2);
};

// Largest column count accepted in full-matrix mode.
inline constexpr std::size_t tlm_matrix_column_limit = 64;

// Propagates the state over every step of a stored trajectory.
void tlm_propagate(const Stepper &stepper, Trajectory &trajectory, TLMState &state);

// S_N^T psi_u + V2^T psi_p + Q; one entry per column.
[[nodiscard]] Vector tlm_total_derivative(const Objective &objective, const TLMState &state, const Vector &u_final,
                                          const Vector &p);

// Convenience driver: integrate, then propagate full parameter sensitivities.
struct TLMGradient {
    Vector gradient;
    double cost = 0.0;
    DenseMatrix S_final;
};
[[nodiscard]] TLMGradient tlm_gradient(const DAEProblem &problem, const Objective &objective,
                                       const ParamMap &param_map, const StepperConfig &config, const Vector &p);

} // namespace adjts
