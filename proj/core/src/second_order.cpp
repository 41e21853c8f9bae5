#include <adjts/second_order.hpp>
#include <adjts/tlm.hpp>

#include <fmt/format.h>

namespace adjts
{

namespace
{

struct HessianTerms {
    Vector state; // f_uu(l, w) + f_up(l, v2) + rw (r_uu w + r_up v2)
    Vector param; // f_pu(l, w) + f_pp(l, v2) + rw (r_pu w + r_pp v2)
};

HessianTerms hessian_terms(const Stepper &s, const TimePoint &tp, const Vector &u, const Vector &lam,
                           const Vector &w, const Vector &v2, double r_weight)
{
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    const bool with_p = prob.dim_param > 0;

    HessianTerms out;
    out.state = prob.hess_uu ? prob.hess_uu(tp, u, p, lam, w) : Vector::Zero(u.size());
    if (with_p) {
        if (prob.hess_up) {
            out.state += prob.hess_up(tp, u, p, lam, v2);
        }
        out.param = prob.hess_pu ? prob.hess_pu(tp, u, p, lam, w) : Vector::Zero(p.size());
        if (prob.hess_pp) {
            out.param += prob.hess_pp(tp, u, p, lam, v2);
        }
    } else {
        out.param = Vector::Zero(0);
    }

    if (obj.integrand) {
        Vector rs = obj.integrand_hess_uu ? obj.integrand_hess_uu(tp, u, p, w) : Vector::Zero(u.size());
        if (with_p && obj.integrand_hess_up) {
            rs += obj.integrand_hess_up(tp, u, p, v2);
        }
        out.state += r_weight * rs;
        if (with_p) {
            Vector rp = obj.integrand_hess_pu ? obj.integrand_hess_pu(tp, u, p, w) : Vector::Zero(p.size());
            if (obj.integrand_hess_pp) {
                rp += obj.integrand_hess_pp(tp, u, p, v2);
            }
            out.param += r_weight * rp;
        }
    }
    return out;
}

void require_tangent(const StepRecord &rec, std::size_t stages)
{
    if (rec.tangent_stages.size() != stages || rec.tangent_end.size() == 0) {
        throw ContractViolation(fmt::format("step record {} carries no tangent data", rec.step));
    }
}

} // namespace

HVPDirections hvp_directions(const ParamMap &param_map, const Vector &p, const Vector &sigma, HVPTarget target,
                             std::size_t dim_state)
{
    HVPDirections d;
    if (target == HVPTarget::initial_condition) {
        if (static_cast<std::size_t>(sigma.size()) != dim_state) {
            throw ContractViolation(
                fmt::format("direction has length {}, initial state has {}", sigma.size(), dim_state));
        }
        d.v1 = sigma;
        d.v2 = Vector::Zero(p.size());
    } else {
        if (sigma.size() != p.size()) {
            throw ContractViolation(fmt::format("direction has length {}, parameters have {}", sigma.size(), p.size()));
        }
        d.v1 = param_map.jacobian(p, dim_state) * sigma;
        d.v2 = sigma;
    }
    return d;
}

std::vector<Vector> soa_forward_pass(const Stepper &stepper, Trajectory &trajectory, const Vector &v1,
                                     const Vector &v2)
{
    const std::size_t N = trajectory.num_steps();
    trajectory.tangents.clear();
    trajectory.tangents.reserve(N + 1);
    trajectory.tangents.push_back(v1);
    trajectory.tangent_integral = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        StepRecord &rec = trajectory.records.at(n);
        tlm_step_directional(stepper, rec, trajectory.tangents.back(), v2);
        trajectory.tangent_integral += rec.tangent_cost_increment;
        trajectory.tangents.push_back(rec.tangent_end);
    }
    return trajectory.tangents;
}

SecondOrderState soa_terminal(const Objective &objective, const Vector &u_final, const Vector &w_final,
                              const Vector &v2, const Vector &p, std::size_t num_steps)
{
    SecondOrderState st;
    st.step = num_steps;
    st.Lambda = Vector::Zero(u_final.size());
    st.Gamma = Vector::Zero(p.size());
    if (objective.terminal) {
        if (objective.terminal_hess_uu) {
            st.Lambda += objective.terminal_hess_uu(u_final, p, w_final);
        }
        if (p.size() > 0) {
            if (objective.terminal_hess_up) {
                st.Lambda += objective.terminal_hess_up(u_final, p, v2);
            }
            if (objective.terminal_hess_pu) {
                st.Gamma += objective.terminal_hess_pu(u_final, p, w_final);
            }
            if (objective.terminal_hess_pp) {
                st.Gamma += objective.terminal_hess_pp(u_final, p, v2);
            }
        }
    }
    return st;
}

CombinedAdjointState soa_theta_step(const Stepper &s, const StepRecord &rec, const Vector &v2,
                                    const CombinedAdjointState &next)
{
    require_tangent(rec, 1);
    const auto &prob = s.problem();
    const auto &p = s.param();
    const double theta = s.config().method.theta;
    const double h = rec.h;
    const TimePoint tp0 = step_time(rec.t_start, rec.step);
    const TimePoint tp1 = step_time(rec.t_end, rec.step);
    const Vector &u0 = rec.u_start();
    const Vector &u1 = rec.u_end;
    const Vector &w0 = rec.w_start();
    const Vector &w1 = rec.tangent_end;
    const bool with_p = prob.dim_param > 0;

    CombinedAdjointState out;
    ThetaAdjointWork work;
    out.first = adjoint_theta_step(s, rec, next.first, &work);

    SecondOrderState &so = out.second;
    so.step = rec.step;
    so.Theta = next.second.Theta;
    so.Gamma = next.second.Gamma;
    Vector Lambda_s;

    try {
        if (theta == 0.0) {
            Lambda_s = prob.mass.is_identity() ? next.second.Lambda
                                               : s.mass_factorization().solve_transpose(next.second.Lambda);
            so.Lambda = next.second.Lambda;
        } else {
            const HessianTerms t1 = hessian_terms(s, tp1, u1, work.lambda_s, w1, v2, 1.0);
            Vector rhs = work.shift * next.second.Lambda + t1.state;
            Lambda_s = work.lu.solve_transpose(rhs);
            so.Lambda = prob.mass.apply_transpose(Lambda_s);
            if (with_p) {
                so.Gamma += (h * theta) * (prob.param_jacobian(tp1, u1, p).apply_transpose(Lambda_s) + t1.param);
            }
        }
    } catch (const SingularMatrixError &e) {
        throw StepFailure(fmt::format("second-order adjoint step {}: {}", rec.step, e.what()), rec.step);
    }

    if (theta < 1.0) {
        const double wt = h * (1.0 - theta);
        const HessianTerms t0 = hessian_terms(s, tp0, u0, work.lambda_s, w0, v2, 1.0);
        so.Lambda += wt * (prob.state_jacobian(tp0, u0, p).apply_transpose(Lambda_s) + t0.state);
        if (with_p) {
            so.Gamma += wt * (prob.param_jacobian(tp0, u0, p).apply_transpose(Lambda_s) + t0.param);
        }
    }
    if (!all_finite(so.Lambda) || !all_finite(so.Gamma)) {
        throw StepFailure(fmt::format("second-order adjoint step {}: non-finite values", rec.step), rec.step);
    }
    return out;
}

CombinedAdjointState soa_rk4_step(const Stepper &s, const StepRecord &rec, const Vector &v2,
                                  const CombinedAdjointState &next)
{
    using T = RK4Tableau;
    require_tangent(rec, T::stages);
    const auto &prob = s.problem();
    const auto &p = s.param();
    const double h = rec.h;
    const bool with_p = prob.dim_param > 0;

    CombinedAdjointState out;
    RK4AdjointWork work;
    out.first = adjoint_rk4_step(s, rec, next.first, &work);

    SecondOrderState &so = out.second;
    so.step = rec.step;
    so.Theta = next.second.Theta;
    so.Lambda = next.second.Lambda;
    so.Gamma = next.second.Gamma;
    std::array<Vector, T::stages> utilde;
    for (int i = T::stages - 1; i >= 0; --i) {
        Vector K = (h * T::b[i]) * next.second.Lambda;
        for (int j = i + 1; j < T::stages; ++j) {
            if (T::a[j][i] != 0.0) {
                K += (h * T::a[j][i]) * utilde[j];
            }
        }
        const TimePoint tp = step_time(rec.t_start + T::c[i] * h, rec.step);
        const Vector &U = rec.stages[i];
        const HessianTerms ht = hessian_terms(s, tp, U, work.kappa[i], rec.tangent_stages[i], v2, h * T::b[i]);
        utilde[i] = prob.state_jacobian(tp, U, p).apply_transpose(K) + ht.state;
        if (with_p) {
            so.Gamma += prob.param_jacobian(tp, U, p).apply_transpose(K) + ht.param;
        }
    }
    for (int i = 0; i < T::stages; ++i) {
        so.Lambda += utilde[i];
    }
    if (!all_finite(so.Lambda) || !all_finite(so.Gamma)) {
        throw StepFailure(fmt::format("second-order adjoint step {}: non-finite values", rec.step), rec.step);
    }
    return out;
}

CombinedAdjointState soa_step(const Stepper &stepper, const StepRecord &rec, const Vector &v2,
                              const CombinedAdjointState &next)
{
    return stepper.config().method.kind == MethodKind::rk4 ? soa_rk4_step(stepper, rec, v2, next)
                                                            : soa_theta_step(stepper, rec, v2, next);
}

HVPResult solve_hvp_sweep(const Stepper &stepper, const ParamMap &param_map, TrajectoryAccess &access,
                          const HVPDirections &dirs, const Vector &sigma, HVPTarget target)
{
    require_second_order(stepper.problem(), stepper.objective());
    const auto &obj = stepper.objective();
    const auto &p = stepper.param();
    const std::size_t N = access.num_steps();

    CombinedAdjointState st;
    st.first = adjoint_terminal(obj, access.final_state(), p, stepper.problem().dim_param, N);
    st.second = soa_terminal(obj, access.final_state(), access.final_tangent(), dirs.v2, p, N);
    for (std::size_t k = N; k-- > 0;) {
        st = soa_step(stepper, access.step_record(k), dirs.v2, st);
    }

    HVPResult out;
    out.lambda0 = std::move(st.first.lambda);
    out.mu0 = std::move(st.first.mu);
    out.Lambda0 = std::move(st.second.Lambda);
    out.Gamma0 = std::move(st.second.Gamma);
    if (target == HVPTarget::initial_condition) {
        out.hvp = out.Lambda0;
        out.gradient = out.lambda0;
    } else {
        out.gradient = assemble_gradient(param_map, p, out.lambda0, out.mu0);
        out.hvp = out.Gamma0 + param_map.hess_product(p, out.lambda0, sigma);
        if (param_map.eta_jac) {
            out.hvp += param_map.jacobian(p, stepper.problem().dim_state).transpose() * out.Lambda0;
        }
    }
    return out;
}

HVPResult solve_hvp(const Stepper &stepper, const ParamMap &param_map, Trajectory &trajectory, const Vector &sigma,
                    HVPTarget target)
{
    require_second_order(stepper.problem(), stepper.objective());
    const HVPDirections dirs = hvp_directions(param_map, stepper.param(), sigma, target, stepper.problem().dim_state);
    soa_forward_pass(stepper, trajectory, dirs.v1, dirs.v2);
    return solve_hvp_sweep(stepper, param_map, trajectory, dirs, sigma, target);
}

} // namespace adjts
