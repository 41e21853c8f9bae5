#include <adjts/adjoint.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/sensitivity.hpp>
#include <adjts/tlm.hpp>

#include <cmath>

#include <gtest/gtest.h>

#include "fd.hpp"
#include "polynomial_problem.hpp"

using namespace adjts;
using namespace adjts::testing;

namespace
{

StepperConfig cfg(Method m, double tf, std::size_t n)
{
    StepperConfig c;
    c.method = m;
    c.tf = tf;
    c.num_steps = n;
    return c;
}

DAEProblem scalar_linear(double a)
{
    DAEProblem pr;
    pr.dim_state = 1;
    pr.rhs = [a](const TimePoint &, const Vector &u, const Vector &) -> Vector { return a * u; };
    pr.jac_state = [a](const TimePoint &, const Vector &, const Vector &) {
        return Matrix(DenseMatrix::Constant(1, 1, a));
    };
    return pr;
}

Objective terminal_identity()
{
    Objective obj;
    obj.terminal = [](const Vector &u, const Vector &) { return u[0]; };
    obj.terminal_grad_state = [](const Vector &, const Vector &) -> Vector { return Vector::Ones(1); };
    return obj;
}

const Method kMethods[] = {Method::backward_euler(), Method::crank_nicolson(), Method::rk4()};

} // namespace

TEST(AdjointTerminal, TerminalOnly)
{
    Objective obj;
    obj.terminal = [](const Vector &u, const Vector &) { return 0.5 * u.squaredNorm(); };
    obj.terminal_grad_state = [](const Vector &u, const Vector &) -> Vector { return u; };
    const Vector u{{1.0, -2.0}};
    const auto st = adjoint_terminal(obj, u, Vector::Zero(3), 3, 7);
    EXPECT_EQ(st.lambda, u);
    EXPECT_EQ(st.mu, Vector::Zero(3));
    EXPECT_EQ(st.step, 7u);
}

TEST(AdjointTerminal, IntegralOnlyStartsAtZero)
{
    Objective obj;
    obj.integrand = [](const TimePoint &, const Vector &u, const Vector &) { return u.squaredNorm(); };
    obj.integrand_grad_state = [](const TimePoint &, const Vector &u, const Vector &) -> Vector { return 2.0 * u; };
    const auto st = adjoint_terminal(obj, Vector::Ones(2), Vector::Ones(1), 1, 4);
    EXPECT_EQ(st.lambda, Vector::Zero(2));
    EXPECT_EQ(st.mu, Vector::Zero(1));
}

TEST(AdjointTerminal, ParameterDependentTerminal)
{
    Objective obj;
    obj.terminal = [](const Vector &u, const Vector &p) { return u.dot(p); };
    obj.terminal_grad_state = [](const Vector &, const Vector &p) -> Vector { return p; };
    obj.terminal_grad_param = [](const Vector &u, const Vector &) -> Vector { return u; };
    const Vector u{{3.0, 4.0}}, p{{-1.0, 2.0}};
    const auto st = adjoint_terminal(obj, u, p, 2, 1);
    EXPECT_EQ(st.lambda, p);
    EXPECT_EQ(st.mu, u);
}

TEST(Adjoint, BackwardEulerScalarRecurrence)
{
    const double a = -2.0, h = 0.1;
    const std::size_t N = 5;
    const DAEProblem pr = scalar_linear(a);
    const auto obj = terminal_identity();
    const auto c = cfg(Method::backward_euler(), h * N, N);
    const Stepper stepper(pr, obj, c, Vector());
    auto res = integrate(pr, obj, ParamMap::fixed(Vector::Ones(1)), c, Vector());
    AdjointState st = adjoint_terminal(obj, res.trajectory.final_state(), Vector(), 0, N);
    for (std::size_t n = N; n-- > 0;) {
        const double expected = st.lambda[0] / (1.0 - h * a);
        st = adjoint_step(stepper, res.trajectory.step_record(n), st);
        EXPECT_NEAR(st.lambda[0], expected, 1e-15);
        EXPECT_EQ(st.step, n);
    }
}

TEST(Adjoint, RK4StabilityPolynomial)
{
    const double a = -1.5, h = 0.2;
    const std::size_t N = 6;
    const DAEProblem pr = scalar_linear(a);
    const auto obj = terminal_identity();
    const auto c = cfg(Method::rk4(), h * N, N);
    const Stepper stepper(pr, obj, c, Vector());
    auto res = integrate(pr, obj, ParamMap::fixed(Vector::Ones(1)), c, Vector());
    const auto adj = solve_adjoint(stepper, res.trajectory);
    const double z = h * a;
    const double R = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
    EXPECT_NEAR(adj.lambda0[0], std::pow(R, N), 1e-14);
}

TEST(Adjoint, DualityWithTangent)
{
    // lambda_0 . w_0 = psi_u(u_N) . w_N for a terminal-only objective.
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        PolynomialOptions o;
        o.seed = seed;
        o.dim_state = 4;
        o.integrand = false;
        o.param_in_objective = false;
        const auto pp = make_polynomial_problem(o);
        for (Method m : kMethods) {
            const auto c = cfg(m, 0.5, 9);
            const Stepper stepper(pp.problem, pp.objective, c, pp.p);
            auto res = integrate(pp.problem, pp.objective, pp.param_map, c, pp.p);
            const Vector w0 = random_vector(4, seed + 20);
            TLMState st = TLMState::direction(w0, Vector::Zero(pp.p.size()));
            tlm_propagate(stepper, res.trajectory, st);
            const auto adj = solve_adjoint(stepper, res.trajectory);
            const double lhs = adj.lambda0.dot(w0);
            const double rhs = pp.objective.grad_state(res.trajectory.final_state(), pp.p).dot(st.S.col(0));
            EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << m.name();
        }
    }
}

TEST(Adjoint, GradientMatchesFiniteDifferencesAllTerms)
{
    for (std::uint64_t seed : {2u, 5u}) {
        PolynomialOptions o;
        o.seed = seed;
        o.mass = seed == 5;
        const auto pp = make_polynomial_problem(o);
        for (Method m : kMethods) {
            if (o.mass && m.kind == MethodKind::rk4) {
                continue;
            }
            const auto c = cfg(m, 0.5, 10);
            const auto rep = compute_gradient(pp.problem, pp.objective, pp.param_map, c, pp.p);
            for (Eigen::Index j = 0; j < pp.p.size(); ++j) {
                const double fd = central_difference(
                    [&](const Vector &q) { return evaluate_objective(pp.problem, pp.objective, pp.param_map, c, q); },
                    pp.p, Vector::Unit(pp.p.size(), j), 1e-5);
                EXPECT_NEAR(rep.gradient[j], fd, 1e-7 * std::max(1.0, std::abs(fd))) << m.name();
            }
        }
    }
}

TEST(Adjoint, GrayScottInitialConditionGradient)
{
    GrayScottOptions g;
    g.grid = 16;
    const auto gs = make_grayscott(g);
    const auto &s = gs->setup;
    const auto cg = setup_gradient(s, s.x0);
    const Eigen::Index comps[] = {0, 1, 77, 300, 511};
    for (Eigen::Index i : comps) {
        const Vector e = Vector::Unit(s.x0.size(), i);
        const double fd = central_difference([&](const Vector &x) { return setup_cost(s, x); }, s.x0, e, 1e-5);
        EXPECT_NEAR(cg.gradient[i], fd, 1e-6 * std::max(1e-3, std::abs(fd))) << "component " << i;
    }
}

TEST(AssembleGradient, Cases)
{
    const Vector lambda{{1.0, 2.0}}, mu{{0.5, -1.0, 3.0}};
    const Vector p = Vector::Zero(3);
    // Fixed initial condition: only mu survives.
    EXPECT_EQ(assemble_gradient(ParamMap::fixed(Vector::Zero(2)), p, lambda, mu), mu);
    // Linear eta.
    DenseMatrix E{{1.0, 0.0, 2.0}, {0.0, -1.0, 1.0}};
    ParamMap pm;
    pm.eta = [E](const Vector &q) -> Vector { return E * q; };
    pm.eta_jac = [E](const Vector &) -> DenseMatrix { return E; };
    EXPECT_TRUE(assemble_gradient(pm, p, lambda, mu).isApprox(E.transpose() * lambda + mu));
    // Identity eta, no parameter dependence in the dynamics.
    EXPECT_EQ(assemble_gradient(ParamMap::identity(), lambda, lambda, Vector::Zero(2)), lambda);
}

TEST(Adjoint, StepRecordsConsumedInReverse)
{
    const auto pp = make_polynomial_problem({});
    const auto c = cfg(Method::rk4(), 0.5, 3);
    auto res = integrate(pp.problem, pp.objective, pp.param_map, c, pp.p, false);
    const Stepper stepper(pp.problem, pp.objective, c, pp.p);
    EXPECT_THROW((void)solve_adjoint(stepper, res.trajectory), ContractViolation);
}
