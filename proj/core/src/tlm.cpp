#include <adjts/tlm.hpp>

#include <fmt/format.h>

namespace adjts
{

namespace
{

bool has_param_block(const DAEProblem &prob, const DenseMatrix &V2)
{
    return prob.dim_param > 0 && V2.rows() > 0;
}

// (S^T r_u + V2^T r_p)^T at one evaluation point.
Eigen::RowVectorXd integrand_tangent(const Objective &obj, const TimePoint &tp, const Vector &u, const Vector &p,
                                     const DenseMatrix &S, const DenseMatrix &V2)
{
    Eigen::RowVectorXd row = (S.transpose() * obj.integrand_grad_state(tp, u, p)).transpose();
    if (obj.integrand_grad_param && V2.rows() > 0) {
        row += (V2.transpose() * obj.integrand_grad_param(tp, u, p)).transpose();
    }
    return row;
}

} // namespace

TangentStep tlm_theta_step(const Stepper &s, const StepRecord &rec, const DenseMatrix &S_n, const DenseMatrix &V2)
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
    const bool with_p = has_param_block(prob, V2);

    TangentStep out;
    out.stages = {S_n};

    DenseMatrix G0;
    if (theta < 1.0) {
        G0 = prob.state_jacobian(tp0, u0, p).apply(S_n);
        if (with_p) {
            G0 += prob.param_jacobian(tp0, u0, p).apply(V2);
        }
    }

    try {
        if (theta == 0.0) {
            DenseMatrix rhs = prob.mass.apply(S_n) + h * G0;
            out.S_next = prob.mass.is_identity() ? rhs : s.mass_factorization().solve(rhs);
        } else {
            const double a = 1.0 / (h * theta);
            const double c = (1.0 - theta) / theta;
            DenseMatrix rhs = a * prob.mass.apply(S_n);
            if (c != 0.0) {
                rhs += c * G0;
            }
            if (with_p) {
                rhs += prob.param_jacobian(tp1, u1, p).apply(V2);
            }
            const ShiftedJacobian A(a, prob.mass, prob.state_jacobian(tp1, u1, p));
            out.S_next = A.factorize(s.config().linear).solve(rhs);
        }
    } catch (const SingularMatrixError &e) {
        throw StepFailure(fmt::format("tangent step {}: {}", rec.step, e.what()), rec.step);
    }

    out.dq = Eigen::RowVectorXd::Zero(S_n.cols());
    if (obj.integrand) {
        if (theta < 1.0) {
            out.dq += (1.0 - theta) * integrand_tangent(obj, tp0, u0, p, S_n, V2);
        }
        if (theta > 0.0) {
            out.dq += theta * integrand_tangent(obj, tp1, u1, p, out.S_next, V2);
        }
        out.dq *= h;
    }
    return out;
}

TangentStep tlm_rk4_step(const Stepper &s, const StepRecord &rec, const DenseMatrix &S_n, const DenseMatrix &V2)
{
    using T = RK4Tableau;
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    const double h = rec.h;
    const bool with_p = has_param_block(prob, V2);

    TangentStep out;
    out.stages.reserve(T::stages);
    std::vector<DenseMatrix> dk(T::stages);
    for (int i = 0; i < T::stages; ++i) {
        DenseMatrix dU = S_n;
        for (int j = 0; j < i; ++j) {
            if (T::a[i][j] != 0.0) {
                dU += (h * T::a[i][j]) * dk[j];
            }
        }
        const TimePoint tp = step_time(rec.t_start + T::c[i] * h, rec.step);
        dk[i] = prob.state_jacobian(tp, rec.stages[i], p).apply(dU);
        if (with_p) {
            dk[i] += prob.param_jacobian(tp, rec.stages[i], p).apply(V2);
        }
        out.stages.push_back(std::move(dU));
    }
    out.S_next = S_n;
    for (int i = 0; i < T::stages; ++i) {
        out.S_next += (h * T::b[i]) * dk[i];
    }

    out.dq = Eigen::RowVectorXd::Zero(S_n.cols());
    if (obj.integrand) {
        for (int i = 0; i < T::stages; ++i) {
            const TimePoint tp = step_time(rec.t_start + T::c[i] * h, rec.step);
            out.dq += T::b[i] * integrand_tangent(obj, tp, rec.stages[i], p, out.stages[i], V2);
        }
        out.dq *= h;
    }
    return out;
}

TangentStep tlm_step(const Stepper &stepper, const StepRecord &rec, const DenseMatrix &S_n, const DenseMatrix &V2)
{
    return stepper.config().method.kind == MethodKind::rk4 ? tlm_rk4_step(stepper, rec, S_n, V2)
                                                            : tlm_theta_step(stepper, rec, S_n, V2);
}

void tlm_step_directional(const Stepper &stepper, StepRecord &rec, const Vector &w_n, const Vector &v2)
{
    TangentStep ts = tlm_step(stepper, rec, DenseMatrix(w_n), DenseMatrix(v2));
    rec.tangent_stages.clear();
    rec.tangent_stages.reserve(ts.stages.size());
    for (auto &st : ts.stages) {
        rec.tangent_stages.emplace_back(st.col(0));
    }
    rec.tangent_end = ts.S_next.col(0);
    rec.tangent_cost_increment = ts.dq.size() > 0 ? ts.dq[0] : 0.0;
}

TLMState TLMState::parameters(const ParamMap &param_map, const Vector &p, std::size_t dim_state)
{
    TLMState st;
    const auto np = p.size();
    st.S = param_map.jacobian(p, dim_state);
    st.V2 = DenseMatrix::Identity(np, np);
    st.Q = Eigen::RowVectorXd::Zero(np);
    return st;
}

TLMState TLMState::initial_condition(std::size_t dim_state, std::size_t dim_param)
{
    TLMState st;
    const auto nd = static_cast<Eigen::Index>(dim_state);
    st.S = DenseMatrix::Identity(nd, nd);
    st.V2 = DenseMatrix::Zero(static_cast<Eigen::Index>(dim_param), nd);
    st.Q = Eigen::RowVectorXd::Zero(nd);
    return st;
}

TLMState TLMState::direction(const Vector &w0, const Vector &v2)
{
    TLMState st;
    st.S = w0;
    st.V2 = v2;
    st.Q = Eigen::RowVectorXd::Zero(1);
    return st;
}

void tlm_propagate(const Stepper &stepper, Trajectory &trajectory, TLMState &state)
{
    if (state.columns() > tlm_matrix_column_limit) {
        throw ConfigurationError(fmt::format("full-matrix tangent limited to {} columns, got {}; use directions",
                                             tlm_matrix_column_limit, state.columns()));
    }
    if (static_cast<std::size_t>(state.V2.rows()) != stepper.problem().dim_param
        || state.V2.cols() != state.S.cols()) {
        throw ContractViolation("tangent parameter block has the wrong shape");
    }
    const std::size_t N = trajectory.num_steps();
    for (std::size_t n = state.step; n < N; ++n) {
        TangentStep ts = tlm_step(stepper, trajectory.step_record(n), state.S, state.V2);
        state.S = std::move(ts.S_next);
        state.Q += ts.dq;
        state.step = n + 1;
    }
}

Vector tlm_total_derivative(const Objective &objective, const TLMState &state, const Vector &u_final,
                            const Vector &p)
{
    Vector g = state.Q.transpose();
    if (objective.terminal) {
        g += state.S.transpose() * objective.grad_state(u_final, p);
        if (objective.terminal_grad_param && state.V2.rows() > 0) {
            g += state.V2.transpose() * objective.terminal_grad_param(u_final, p);
        }
    }
    return g;
}

TLMGradient tlm_gradient(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                         const StepperConfig &config, const Vector &p)
{
    require_first_order(problem, objective);
    auto fwd = integrate(problem, objective, param_map, config, p);
    const Stepper stepper(problem, objective, config, p);
    TLMState st = TLMState::parameters(param_map, p, problem.dim_state);
    tlm_propagate(stepper, fwd.trajectory, st);
    TLMGradient out;
    out.gradient = tlm_total_derivative(objective, st, fwd.trajectory.final_state(), p);
    out.cost = fwd.cost;
    out.S_final = std::move(st.S);
    return out;
}

} // namespace adjts
