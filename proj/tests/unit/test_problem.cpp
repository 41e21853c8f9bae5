#include <adjts/errors.hpp>
#include <adjts/problem.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/validation.hpp>

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fd.hpp"
#include "polynomial_problem.hpp"

using namespace adjts;
using namespace adjts::testing;

namespace
{

DAEProblem scalar_square(bool wrong_jacobian)
{
    DAEProblem pr;
    pr.dim_state = 1;
    pr.rhs = [](const TimePoint &, const Vector &u, const Vector &) -> Vector { return u.cwiseProduct(u); };
    pr.jac_state = [wrong_jacobian](const TimePoint &, const Vector &u, const Vector &) {
        DenseMatrix J(1, 1);
        J(0, 0) = (wrong_jacobian ? 3.0 : 2.0) * u[0];
        return Matrix(J);
    };
    return pr;
}

Objective half_norm()
{
    Objective obj;
    obj.terminal = [](const Vector &u, const Vector &) { return 0.5 * u.squaredNorm(); };
    obj.terminal_grad_state = [](const Vector &u, const Vector &) -> Vector { return u; };
    return obj;
}

} // namespace

TEST(MassMatrix, IdentityAndConstant)
{
    const Vector v{{1.0, -2.0}};
    EXPECT_EQ(MassMatrix::identity().apply(v), v);
    DenseMatrix M{{2.0, 1.0}, {0.0, 3.0}};
    const auto mm = MassMatrix::constant(Matrix(M));
    EXPECT_FALSE(mm.is_identity());
    EXPECT_TRUE(mm.apply(v).isApprox(M * v));
    EXPECT_TRUE(mm.apply_transpose(v).isApprox(M.transpose() * v));
}

TEST(Validation, LinearSystemIsExact)
{
    DAEProblem pr;
    pr.dim_state = 3;
    const DenseMatrix A{{-1.0, 0.5, 0.0}, {0.2, -2.0, 0.1}, {0.0, 0.3, -0.5}};
    pr.rhs = [A](const TimePoint &, const Vector &u, const Vector &) -> Vector { return A * u; };
    pr.jac_state = [A](const TimePoint &, const Vector &, const Vector &) { return Matrix(A); };
    const auto rep = validate_derivatives(pr, half_norm(), TimePoint{0.0}, Vector{{1.0, 2.0, -1.0}}, Vector(), 1e-8);
    ASSERT_NE(rep.find("jac_state"), nullptr);
    EXPECT_LT(rep.find("jac_state")->max_rel_discrepancy, 1e-10);
    EXPECT_TRUE(rep.all_passed());
}

TEST(Validation, FlagsWrongJacobian)
{
    const auto rep =
        validate_derivatives(scalar_square(true), half_norm(), TimePoint{0.0}, Vector{{1.5}}, Vector(), 1e-6);
    const auto *e = rep.find("jac_state");
    ASSERT_NE(e, nullptr);
    EXPECT_FALSE(e->passed);
    EXPECT_FALSE(rep.all_passed());

    const auto ok =
        validate_derivatives(scalar_square(false), half_norm(), TimePoint{0.0}, Vector{{1.5}}, Vector(), 1e-6);
    EXPECT_TRUE(ok.all_passed());
}

TEST(Validation, NonFiniteOutputIsReportedNotThrown)
{
    DAEProblem pr = scalar_square(false);
    pr.jac_state = [](const TimePoint &, const Vector &, const Vector &) {
        DenseMatrix J(1, 1);
        J(0, 0) = std::numeric_limits<double>::quiet_NaN();
        return Matrix(J);
    };
    ValidationReport rep;
    EXPECT_NO_THROW(rep = validate_derivatives(pr, half_norm(), TimePoint{0.0}, Vector{{1.0}}, Vector(), 1e-6));
    const auto *e = rep.find("jac_state");
    ASSERT_NE(e, nullptr);
    EXPECT_FALSE(e->passed);
    EXPECT_FALSE(e->note.empty());
}

TEST(Validation, GrayScottJacobian16)
{
    GrayScottOptions g;
    g.grid = 16;
    const DAEProblem pr = grayscott_dynamics(g);
    Vector u = grayscott_reference_initial(16);
    u += 0.01 * random_vector(u.size(), 5);
    Objective obj;
    const auto rep = validate_derivatives(pr, obj, TimePoint{0.0}, u, Vector(), 1e-6);
    ASSERT_NE(rep.find("jac_state"), nullptr);
    EXPECT_LT(rep.find("jac_state")->max_rel_discrepancy, 1e-6);
    ASSERT_NE(rep.find("hess_uu"), nullptr);
    EXPECT_TRUE(rep.find("hess_uu")->passed);
}

TEST(Validation, PolynomialProblemAllCallbacks)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        PolynomialOptions o;
        o.seed = seed;
        o.dim_state = 2 + seed % 4;
        o.dim_param = 1 + seed % 3;
        const auto pp = make_polynomial_problem(o);
        const Vector u = random_vector(static_cast<Eigen::Index>(o.dim_state), seed + 100);
        const auto rep = validate_derivatives(pp.problem, pp.objective, TimePoint{0.3}, u, pp.p, 1e-6);
        for (const auto &e : rep.entries) {
            EXPECT_TRUE(e.passed) << e.callback << " " << e.max_rel_discrepancy << " " << e.note;
        }
        EXPECT_GE(rep.entries.size(), 14u);
    }
}

TEST(Problem, FiniteDifferenceFallbackMatchesAnalytic)
{
    PolynomialOptions o;
    o.dim_state = 5;
    o.dim_param = 3;
    const auto pp = make_polynomial_problem(o);
    const Vector u = random_vector(5, 9);
    const TimePoint t{0.4};
    const DenseMatrix Ja = pp.problem.jac_state(t, u, pp.p).to_dense();
    const DenseMatrix Jf = pp.problem.fd_state_jacobian(t, u, pp.p).to_dense();
    EXPECT_LT((Ja - Jf).cwiseAbs().maxCoeff() / Ja.cwiseAbs().maxCoeff(), 1e-6);
    const DenseMatrix Pa = pp.problem.jac_param(t, u, pp.p).to_dense();
    const DenseMatrix Pf = pp.problem.fd_param_jacobian(t, u, pp.p).to_dense();
    EXPECT_LT((Pa - Pf).cwiseAbs().maxCoeff() / Pa.cwiseAbs().maxCoeff(), 1e-6);

    // Absent callbacks fall back to central differences.
    DAEProblem bare = pp.problem;
    bare.jac_state = nullptr;
    const Vector v = random_vector(5, 10);
    const Vector Jv = bare.state_jacobian(t, u, pp.p).apply(v);
    const double eps = 1e-6;
    const Vector fd = (bare.eval_rhs(t, u + eps * v, pp.p) - bare.eval_rhs(t, u - eps * v, pp.p)) / (2 * eps);
    EXPECT_LT((Jv - fd).norm(), 1e-6 * Ja.norm() * v.norm());
}

TEST(Problem, MixedHessianProductsAreTransposePartners)
{
    PolynomialOptions o;
    o.dim_state = 4;
    o.dim_param = 3;
    const auto pp = make_polynomial_problem(o);
    const Vector u = random_vector(4, 1), lam = random_vector(4, 2), w = random_vector(4, 3), v = random_vector(3, 4);
    const TimePoint t{0.1};
    // w^T (lam^T f_up v) = v^T (lam^T f_pu w)
    const double a = w.dot(pp.problem.hess_up(t, u, pp.p, lam, v));
    const double b = v.dot(pp.problem.hess_pu(t, u, pp.p, lam, w));
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
}

TEST(Problem, MissingCallbacksFailEagerly)
{
    DAEProblem pr = scalar_square(false);
    Objective none;
    try {
        require_first_order(pr, none);
        FAIL() << "expected ConfigurationError";
    } catch (const ConfigurationError &e) {
        EXPECT_FALSE(e.missing().empty());
    }
    EXPECT_NO_THROW(require_first_order(pr, half_norm()));
    try {
        require_second_order(pr, half_norm());
        FAIL() << "expected ConfigurationError";
    } catch (const ConfigurationError &e) {
        const auto &m = e.missing();
        EXPECT_NE(std::find(m.begin(), m.end(), "hess_uu"), m.end());
    }
}

TEST(ParamMap, FixedAndIdentity)
{
    const Vector u0{{1.0, 2.0}};
    const auto fixed = ParamMap::fixed(u0);
    const Vector p{{3.0}};
    EXPECT_EQ(fixed.initial_state(p), u0);
    EXPECT_EQ(fixed.jacobian(p, 2), DenseMatrix::Zero(2, 1));
    EXPECT_EQ(fixed.hess_product(p, Vector::Ones(2), Vector::Ones(1)), Vector::Zero(1));

    const auto id = ParamMap::identity();
    const Vector q{{4.0, 5.0}};
    EXPECT_EQ(id.initial_state(q), q);
    EXPECT_EQ(id.jacobian(q, 2), DenseMatrix::Identity(2, 2));
}

TEST(Problem, FdStepScalesWithMagnitude)
{
    const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    EXPECT_DOUBLE_EQ(fd_step(0.5), base);
    EXPECT_DOUBLE_EQ(fd_step(-10.0), 10.0 * base);
}
