#include <adjts/errors.hpp>
#include <adjts/problems/aircraft.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/problems/linear_test.hpp>
#include <adjts/problems/registry.hpp>
#include <adjts/validation.hpp>

#include <cmath>

#include <gtest/gtest.h>

#include "fd.hpp"
#include "polynomial_problem.hpp"

using namespace adjts;
using namespace adjts::testing;

TEST(Registry, KnownNames)
{
    const auto names = problem_names();
    EXPECT_EQ(names, (std::vector<std::string>{"aircraft", "grayscott", "linear-test"}));
    for (const auto &n : names) {
        ProblemOptions o;
        o.grid = 8;
        const auto s = make_problem(n, o);
        EXPECT_EQ(s->name, n);
        EXPECT_GT(s->num_variables(), 0u);
    }
    EXPECT_THROW((void)make_problem("pendulum"), ConfigurationError);
}

TEST(Registry, OverridesApplied)
{
    ProblemOptions o;
    o.method = Method::crank_nicolson();
    o.num_steps = 40;
    o.intervals = 4;
    const auto s = make_problem("aircraft", o);
    EXPECT_EQ(s->config.num_steps, 40u);
    EXPECT_EQ(s->config.method.theta, 0.5);
    EXPECT_EQ(s->num_variables(), 8u);
}

TEST(Aircraft, IntervalMapping)
{
    EXPECT_EQ(aircraft_interval(0, 100, 10), 0u);
    EXPECT_EQ(aircraft_interval(9, 100, 10), 0u);
    EXPECT_EQ(aircraft_interval(10, 100, 10), 1u);
    EXPECT_EQ(aircraft_interval(99, 100, 10), 9u);
    EXPECT_EQ(aircraft_interval(100, 100, 10), 9u);
    AircraftOptions bad;
    bad.num_steps = 55;
    EXPECT_THROW((void)make_aircraft(bad), ConfigurationError);
}

TEST(Aircraft, DerivativesValidate)
{
    const auto s = make_aircraft();
    const Vector u{{0.7, 0.3}};
    for (std::size_t step : {0u, 42u, 99u}) {
        const auto rep = validate_derivatives(s->problem, s->objective, TimePoint{0.02 * step, step}, u, s->param, 1e-6);
        for (const auto &e : rep.entries) {
            EXPECT_TRUE(e.passed) << e.callback << " " << e.max_rel_discrepancy;
        }
    }
}

TEST(Aircraft, GradientAndHvpAgainstFiniteDifferences)
{
    const auto s = make_aircraft();
    const Vector x = s->x0 + 0.1 * random_vector(s->x0.size(), 3);
    const auto cg = setup_gradient(*s, x);
    const Vector d = random_vector(x.size(), 4);
    const double fd = central_difference([&](const Vector &y) { return setup_cost(*s, y); }, x, d, 1e-5);
    EXPECT_LT(rel_diff(cg.gradient.dot(d), fd), 1e-7);

    const Vector hv = setup_hvp(*s, x, d);
    const Vector fdh =
        central_difference([&](const Vector &y) { return setup_gradient(*s, y).gradient; }, x, d, 1e-5);
    EXPECT_LT(rel_diff(hv, fdh), 1e-6);
}

TEST(Aircraft, OnLeaderIsStationary)
{
    AircraftOptions o;
    o.on_leader = true;
    const auto s = make_aircraft(o);
    const auto cg = setup_gradient(*s, s->x0);
    EXPECT_LT(cg.cost, 1e-20);
    EXPECT_LT(cg.gradient.norm(), 1e-10);
}

TEST(Aircraft, BoundsCoverSpeedAndHeading)
{
    AircraftOptions o;
    o.intervals = 5;
    o.num_steps = 50;
    o.v_max = 1.5;
    const auto s = make_aircraft(o);
    ASSERT_EQ(s->bounds.size(), 10u);
    EXPECT_EQ(s->bounds.upper[0], 1.5);
    EXPECT_EQ(s->bounds.lower[0], 0.0);
    EXPECT_NEAR(s->bounds.upper[7], M_PI, 1e-15);
}

TEST(GrayScott, ReferenceInitialCondition)
{
    const Vector u = grayscott_reference_initial(16);
    ASSERT_EQ(u.size(), 512);
    // Outside [1, 1.5]^2 the state is (1, 0).
    EXPECT_EQ(u[0], 1.0);
    EXPECT_EQ(u[1], 0.0);
    for (Eigen::Index k = 0; k < 256; ++k) {
        EXPECT_NEAR(u[2 * k] + 2.0 * u[2 * k + 1], 1.0, 1e-15);
        EXPECT_GE(u[2 * k + 1], 0.0);
        EXPECT_LE(u[2 * k + 1], 0.25);
    }
}

TEST(GrayScott, InversionSetup)
{
    GrayScottOptions g;
    g.grid = 16;
    const auto gs = make_grayscott(g);
    EXPECT_EQ(gs->setup.target, HVPTarget::initial_condition);
    EXPECT_EQ(gs->setup.problem.dim_param, 0u);
    EXPECT_NEAR(setup_cost(gs->setup, gs->reference_initial), 0.0, 1e-28);
    EXPECT_GT(setup_cost(gs->setup, gs->setup.x0), 1e-8);
    EXPECT_GT((gs->setup.x0 - gs->reference_initial).norm(), 0.0);
}

TEST(GrayScott, JacobianIsSparseAndValidates)
{
    GrayScottOptions g;
    g.grid = 8;
    const auto pr = grayscott_dynamics(g);
    const Vector u = grayscott_reference_initial(8) + 0.01 * random_vector(128, 1);
    const Matrix J = pr.jac_state(TimePoint{0.0}, u, Vector());
    EXPECT_TRUE(J.is_sparse());
    EXPECT_EQ(J.sparse().nonZeros(), 128 * 6);
    const auto rep = validate_derivatives(pr, Objective{}, TimePoint{0.0}, u, Vector(), 1e-6);
    EXPECT_TRUE(rep.all_passed());
}

TEST(GrayScott, HvpMatchesFiniteDifference)
{
    GrayScottOptions g;
    g.grid = 8;
    g.num_steps = 5;
    const auto gs = make_grayscott(g);
    const auto &s = gs->setup;
    const Vector d = random_vector(s.x0.size(), 6);
    const Vector hv = setup_hvp(s, s.x0, d);
    const Vector fd = central_difference([&](const Vector &y) { return setup_gradient(s, y).gradient; }, s.x0, d, 1e-4);
    EXPECT_LT(rel_diff(hv, fd), 1e-5);
}

TEST(LinearTest, GradientMatchesTlmFormula)
{
    LinearTestOptions o;
    o.integrand = true;
    o.mass = true;
    const auto lt = make_linear_test(o);
    const auto &s = lt->setup;
    const auto cg = setup_gradient(s, s.x0);
    for (Eigen::Index j = 0; j < s.x0.size(); ++j) {
        const double fd = central_difference([&](const Vector &y) { return setup_cost(s, y); }, s.x0,
                                             Vector::Unit(s.x0.size(), j), 1e-5);
        EXPECT_NEAR(cg.gradient[j], fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
}

TEST(LinearTest, RegisteredProblemSupportsHvp)
{
    const auto s = make_problem("linear-test", {});
    const Vector d = random_vector(s->x0.size(), 12);
    const Vector hv = setup_hvp(*s, s->x0, d);
    // The gradient is affine in x, so central differences are exact up to round-off.
    const Vector fd =
        central_difference([&](const Vector &y) { return setup_gradient(*s, y).gradient; }, s->x0, d, 1e-3);
    EXPECT_LT(rel_diff(hv, fd), 1e-8);
}
