#include <adjts/adjoint.hpp>

#include <fmt/format.h>

namespace adjts
{

namespace
{

Vector integrand_param_grad(const Objective &obj, const TimePoint &tp, const Vector &u, const Vector &p)
{
    if (!obj.integrand_grad_param) {
        return Vector::Zero(p.size());
    }
    return obj.integrand_grad_param(tp, u, p);
}

} // namespace

AdjointState adjoint_terminal(const Objective &objective, const Vector &u_final, const Vector &p,
                              std::size_t dim_param, std::size_t num_steps)
{
    AdjointState st;
    st.lambda = objective.grad_state(u_final, p);
    st.mu = objective.grad_param(u_final, p, dim_param);
    st.step = num_steps;
    return st;
}

AdjointState adjoint_theta_step(const Stepper &s, const StepRecord &rec, const AdjointState &next,
                                ThetaAdjointWork *work)
{
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    const double theta = s.config().method.theta;
    const double h = rec.h;
    const TimePoint tp0 = step_time(rec.t_start, rec.step);
    const TimePoint tp1 = step_time(rec.t_end, rec.step);
    const Vector &u0 = rec.u_start();
    const Vector &u1 = rec.u_end;
    const bool with_p = prob.dim_param > 0;
    const bool integrand = static_cast<bool>(obj.integrand);

    ThetaAdjointWork local;
    ThetaAdjointWork &w = work ? *work : local;

    AdjointState out;
    out.step = rec.step;
    out.mu = next.mu;

    try {
        if (theta == 0.0) {
            w.shift = 0.0;
            if (prob.mass.is_identity()) {
                w.lambda_s = next.lambda;
            } else {
                w.lambda_s = s.mass_factorization().solve_transpose(next.lambda);
            }
            // M^T lambda_s equals lambda_{n+1} exactly.
            out.lambda = next.lambda;
        } else {
            // (M - h theta J1)^T lambda_s = lambda_{n+1} + h theta r_u(n+1), scaled by a = 1 / (h theta).
            const double a = 1.0 / (h * theta);
            w.shift = a;
            Vector rhs = a * next.lambda;
            if (integrand) {
                rhs += obj.integrand_grad_state(tp1, u1, p);
            }
            w.lu = ShiftedJacobian(a, prob.mass, prob.state_jacobian(tp1, u1, p)).factorize(s.config().linear);
            w.lambda_s = w.lu.solve_transpose(rhs);
            out.lambda = prob.mass.apply_transpose(w.lambda_s);
            if (with_p) {
                Vector g = prob.param_jacobian(tp1, u1, p).apply_transpose(w.lambda_s);
                if (integrand) {
                    g += integrand_param_grad(obj, tp1, u1, p);
                }
                out.mu += (h * theta) * g;
            }
        }
    } catch (const SingularMatrixError &e) {
        throw StepFailure(fmt::format("adjoint step {}: {}", rec.step, e.what()), rec.step);
    }

    // Explicit-end contributions; skipped entirely for backward Euler.
    if (theta < 1.0) {
        const double wt = h * (1.0 - theta);
        Vector g = prob.state_jacobian(tp0, u0, p).apply_transpose(w.lambda_s);
        if (integrand) {
            g += obj.integrand_grad_state(tp0, u0, p);
        }
        out.lambda += wt * g;
        if (with_p) {
            Vector gp = prob.param_jacobian(tp0, u0, p).apply_transpose(w.lambda_s);
            if (integrand) {
                gp += integrand_param_grad(obj, tp0, u0, p);
            }
            out.mu += wt * gp;
        }
    }
    if (!all_finite(out.lambda) || !all_finite(out.mu)) {
        throw StepFailure(fmt::format("adjoint step {}: non-finite adjoint", rec.step), rec.step);
    }
    return out;
}

AdjointState adjoint_rk4_step(const Stepper &s, const StepRecord &rec, const AdjointState &next,
                              RK4AdjointWork *work)
{
    using T = RK4Tableau;
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    const double h = rec.h;
    const bool with_p = prob.dim_param > 0;
    const bool integrand = static_cast<bool>(obj.integrand);

    RK4AdjointWork local;
    RK4AdjointWork &w = work ? *work : local;
    std::array<Vector, T::stages> ubar;

    AdjointState out;
    out.step = rec.step;
    out.lambda = next.lambda;
    out.mu = next.mu;
    for (int i = T::stages - 1; i >= 0; --i) {
        Vector kappa = (h * T::b[i]) * next.lambda;
        for (int j = i + 1; j < T::stages; ++j) {
            if (T::a[j][i] != 0.0) {
                kappa += (h * T::a[j][i]) * ubar[j];
            }
        }
        const TimePoint tp = step_time(rec.t_start + T::c[i] * h, rec.step);
        const Vector &U = rec.stages[i];
        ubar[i] = prob.state_jacobian(tp, U, p).apply_transpose(kappa);
        if (integrand) {
            ubar[i] += (h * T::b[i]) * obj.integrand_grad_state(tp, U, p);
        }
        if (with_p) {
            out.mu += prob.param_jacobian(tp, U, p).apply_transpose(kappa);
            if (integrand) {
                out.mu += (h * T::b[i]) * integrand_param_grad(obj, tp, U, p);
            }
        }
        w.kappa[i] = std::move(kappa);
    }
    for (int i = 0; i < T::stages; ++i) {
        out.lambda += ubar[i];
    }
    if (!all_finite(out.lambda) || !all_finite(out.mu)) {
        throw StepFailure(fmt::format("adjoint step {}: non-finite adjoint", rec.step), rec.step);
    }
    return out;
}

AdjointState adjoint_step(const Stepper &stepper, const StepRecord &rec, const AdjointState &next)
{
    return stepper.config().method.kind == MethodKind::rk4 ? adjoint_rk4_step(stepper, rec, next)
                                                            : adjoint_theta_step(stepper, rec, next);
}

AdjointResult solve_adjoint(const Stepper &stepper, TrajectoryAccess &access)
{
    require_first_order(stepper.problem(), stepper.objective());
    const std::size_t N = access.num_steps();
    AdjointState st =
        adjoint_terminal(stepper.objective(), access.final_state(), stepper.param(), stepper.problem().dim_param, N);
    for (std::size_t k = N; k-- > 0;) {
        st = adjoint_step(stepper, access.step_record(k), st);
    }
    return {std::move(st.lambda), std::move(st.mu)};
}

Vector assemble_gradient(const ParamMap &param_map, const Vector &p, const Vector &lambda0, const Vector &mu0)
{
    if (!param_map.eta_jac) {
        return mu0;
    }
    return param_map.jacobian(p, static_cast<std::size_t>(lambda0.size())).transpose() * lambda0 + mu0;
}

} // namespace adjts
