#pragma once

#include <array>
#include <cstddef>

#include <adjts/algebra.hpp>
#include <adjts/forward.hpp>

namespace adjts
{

struct AdjointState {
    Vector lambda; // N_d
    Vector mu;     // N_p
    std::size_t step = 0;
};

// lambda_N = psi_u(u_N), mu_N = psi_p(u_N); both zero for pure-integral objectives.
[[nodiscard]] AdjointState adjoint_terminal(const Objective &objective, const Vector &u_final, const Vector &p,
                                            std::size_t dim_param, std::size_t num_steps);

// Intermediates of a theta adjoint step, reused by the second-order sweep.
struct ThetaAdjointWork {
    Factorization lu; // (a M - f_u(u_{n+1}))
    Vector lambda_s;
    double shift = 0.0; // a = 1 / (h theta); 0 for the explicit case
};

// Intermediates of an RK4 adjoint step: the stage-derivative adjoints.
struct RK4AdjointWork {
    std::array<Vector, 4> kappa;
};

[[nodiscard]] AdjointState adjoint_theta_step(const Stepper &stepper, const StepRecord &rec, const AdjointState &next,
                                              ThetaAdjointWork *work = nullptr);
[[nodiscard]] AdjointState adjoint_rk4_step(const Stepper &stepper, const StepRecord &rec, const AdjointState &next,
                                            RK4AdjointWork *work = nullptr);
[[nodiscard]] AdjointState adjoint_step(const Stepper &stepper, const StepRecord &rec, const AdjointState &next);

struct AdjointResult {
    Vector lambda0; // total derivative with respect to u_0
    Vector mu0;     // parameter derivative through the dynamics and objective
};

// Reverse sweep n = N-1 ... 0 over whatever the access object provides.
[[nodiscard]] AdjointResult solve_adjoint(const Stepper &stepper, TrajectoryAccess &access);

// eta_p^T lambda_0 + mu_0.
[[nodiscard]] Vector assemble_gradient(const ParamMap &param_map, const Vector &p, const Vector &lambda0,
                                       const Vector &mu0);

} // namespace adjts
