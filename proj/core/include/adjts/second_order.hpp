#pragma once

#include <cstddef>
#include <vector>

#include <adjts/adjoint.hpp>
#include <adjts/forward.hpp>

namespace adjts
{

struct SecondOrderState {
    Vector Lambda; // N_d
    Vector Gamma;  // N_p
    double Theta = 0.0; // companion of the constant-parameter block; never changes
    std::size_t step = 0;
};

// First- and second-order adjoints advanced together by one combined sweep.
struct CombinedAdjointState {
    AdjointState first;
    SecondOrderState second;
};

enum class HVPTarget { initial_condition, parameters };

// (v1, v2) seeds of the forward tangent: w_0 = v1, parameter direction v2.
struct HVPDirections {
    Vector v1;
    Vector v2;
};

// initial_condition: v1 = sigma, v2 = 0. parameters: v1 = eta_p sigma, v2 = sigma.
[[nodiscard]] HVPDirections hvp_directions(const ParamMap &param_map, const Vector &p, const Vector &sigma,
                                           HVPTarget target, std::size_t dim_state);

// Propagates w along a stored trajectory, filling each record's tangent fields
// and trajectory.tangents. Returns w_0 .. w_N.
std::vector<Vector> soa_forward_pass(const Stepper &stepper, Trajectory &trajectory, const Vector &v1,
                                     const Vector &v2);

// Lambda_N = psi_uu w_N + psi_up v2, Gamma_N = psi_pu w_N + psi_pp v2.
[[nodiscard]] SecondOrderState soa_terminal(const Objective &objective, const Vector &u_final, const Vector &w_final,
                                            const Vector &v2, const Vector &p, std::size_t num_steps);

// One combined reverse step; the record must carry tangent data.
[[nodiscard]] CombinedAdjointState soa_theta_step(const Stepper &stepper, const StepRecord &rec, const Vector &v2,
                                                  const CombinedAdjointState &next);
[[nodiscard]] CombinedAdjointState soa_rk4_step(const Stepper &stepper, const StepRecord &rec, const Vector &v2,
                                                const CombinedAdjointState &next);
[[nodiscard]] CombinedAdjointState soa_step(const Stepper &stepper, const StepRecord &rec, const Vector &v2,
                                            const CombinedAdjointState &next);

struct HVPResult {
    Vector hvp;      // Hessian-vector product for the chosen target
    Vector gradient; // gradient for the same target, from the embedded first-order sweep
    Vector lambda0;
    Vector mu0;
    Vector Lambda0;
    Vector Gamma0;
};

// Combined sweep over an access object whose tangent was seeded with dirs.
[[nodiscard]] HVPResult solve_hvp_sweep(const Stepper &stepper, const ParamMap &param_map, TrajectoryAccess &access,
                                        const HVPDirections &dirs, const Vector &sigma, HVPTarget target);

// Runs the tangent pass over a stored trajectory, then the combined sweep.
[[nodiscard]] HVPResult solve_hvp(const Stepper &stepper, const ParamMap &param_map, Trajectory &trajectory,
                                  const Vector &sigma, HVPTarget target);

} // namespace adjts
