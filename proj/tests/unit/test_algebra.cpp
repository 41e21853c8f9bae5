#include <adjts/algebra.hpp>
#include <adjts/problems/grayscott.hpp>

#include <cmath>

#include <gtest/gtest.h>

#include "polynomial_problem.hpp"

using namespace adjts;
using namespace adjts::testing;

TEST(LinearSolve, IdentityOperator)
{
    const ShiftedJacobian A(1.0, MassMatrix::identity(), Matrix(DenseMatrix::Zero(3, 3)));
    const Vector b{{1.0, -2.0, 3.5}};
    EXPECT_EQ(linear_solve(A, b), b);
    EXPECT_EQ(linear_solve(A, b, true), b);
}

TEST(LinearSolve, Dense2x2AgainstHandInverse)
{
    // a M - J with a = 0 and J = -[[4, 7], [2, 6]] gives [[4, 7], [2, 6]].
    const ShiftedJacobian A(0.0, MassMatrix::identity(), Matrix(DenseMatrix{{-4.0, -7.0}, {-2.0, -6.0}}));
    const Vector b{{1.0, 2.0}};
    const Vector x = linear_solve(A, b);
    // inverse = [[0.6, -0.7], [-0.2, 0.4]]
    EXPECT_NEAR(x[0], 0.6 * 1.0 - 0.7 * 2.0, 1e-14);
    EXPECT_NEAR(x[1], -0.2 * 1.0 + 0.4 * 2.0, 1e-14);
    const Vector xt = linear_solve(A, b, true);
    EXPECT_NEAR(xt[0], 0.6 * 1.0 - 0.2 * 2.0, 1e-14);
    EXPECT_NEAR(xt[1], -0.7 * 1.0 + 0.4 * 2.0, 1e-14);
}

TEST(LinearSolve, GrayScottShiftedJacobianBothDirections)
{
    GrayScottOptions g;
    g.grid = 16;
    const DAEProblem pr = grayscott_dynamics(g);
    const Vector u = grayscott_reference_initial(16);
    const ShiftedJacobian A(1.0 / 0.5, MassMatrix::identity(), pr.jac_state(TimePoint{0.0}, u, Vector()));
    const Factorization lu = A.factorize();
    EXPECT_TRUE(lu.is_sparse());
    const Vector b = random_vector(u.size(), 3);
    const Vector x = lu.solve(b);
    const Vector y = lu.solve_transpose(b);
    EXPECT_LT((A.apply(x) - b).norm(), 1e-10 * b.norm());
    EXPECT_LT((A.apply_transpose(y) - b).norm(), 1e-10 * b.norm());
}

TEST(LinearSolve, TransposeSolveMatchesExplicitTranspose)
{
    for (bool sparse : {false, true}) {
        const DenseMatrix J = -3.0 * DenseMatrix::Identity(6, 6) + 0.5 * DenseMatrix::Random(6, 6);
        const DenseMatrix M = DenseMatrix::Identity(6, 6) + 0.1 * DenseMatrix::Ones(6, 6);
        const Matrix Jm = sparse ? Matrix(SparseMatrix(J.sparseView())) : Matrix(J);
        const ShiftedJacobian A(2.0, MassMatrix::constant(Matrix(M)), Jm);
        const Vector b = random_vector(6, 11);
        const Vector y = linear_solve(A, b, true);
        const DenseMatrix At = (2.0 * M - J).transpose();
        const Vector y_ref = At.partialPivLu().solve(b);
        EXPECT_LT((y - y_ref).norm() / y_ref.norm(), 1e-12);
    }
}

TEST(LinearSolve, RandomResidualsWithinTolerance)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed) * 4;
        DenseMatrix J = DenseMatrix::Zero(n, n);
        const Vector r = random_vector(n * n, seed);
        for (Eigen::Index i = 0; i < n * n; ++i) {
            J(i % n, i / n) = r[i];
        }
        const ShiftedJacobian A(static_cast<double>(n), MassMatrix::identity(), Matrix(J));
        const Vector b = random_vector(n, seed + 50);
        for (bool tr : {false, true}) {
            const Vector x = linear_solve(A, b, tr);
            const Vector res = (tr ? A.apply_transpose(x) : A.apply(x)) - b;
            EXPECT_LE(res.norm(), 1e-12 * b.norm()) << "seed " << seed;
        }
    }
}

TEST(LinearSolve, SingularMatrixNamesPivot)
{
    const DenseMatrix S{{1.0, 2.0}, {2.0, 4.0}};
    try {
        (void)Factorization(Matrix(S));
        FAIL() << "expected SingularMatrixError";
    } catch (const SingularMatrixError &e) {
        EXPECT_EQ(e.pivot(), 1);
    }
    SparseMatrix Ss = S.sparseView();
    EXPECT_THROW((void)Factorization(Matrix(Ss)), SingularMatrixError);
}

TEST(Newton, LinearResidualOneIteration)
{
    const auto res = newton_solve([](const Vector &x) -> Vector { return x - Vector::Ones(1); },
                                  [](const Vector &) { return Matrix(DenseMatrix::Identity(1, 1)); },
                                  Vector::Zero(1));
    EXPECT_NEAR(res.solution[0], 1.0, 1e-15);
    EXPECT_EQ(res.stats.iterations, 1u);
}

TEST(Newton, SquareRootOfFour)
{
    NewtonOptions o;
    o.atol = 0.0;
    o.rtol = 1e-12;
    const auto res = newton_solve([](const Vector &x) -> Vector { return Vector::Constant(1, x[0] * x[0] - 4.0); },
                                  [](const Vector &x) { return Matrix(DenseMatrix::Constant(1, 1, 2.0 * x[0])); },
                                  Vector::Constant(1, 3.0), o);
    EXPECT_NEAR(res.solution[0], 2.0, 1e-12);
}

TEST(Newton, BackwardEulerCubicAgainstBisection)
{
    // x + 0.1 x^3 - 1 = 0
    auto g = [](double x) { return x + 0.1 * x * x * x - 1.0; };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? hi : lo) = mid;
    }
    const auto res = newton_solve([&](const Vector &x) -> Vector { return Vector::Constant(1, g(x[0])); },
                                  [](const Vector &x) { return Matrix(DenseMatrix::Constant(1, 1, 1.0 + 0.3 * x[0] * x[0])); },
                                  Vector::Constant(1, 1.0));
    EXPECT_NEAR(res.solution[0], 0.5 * (lo + hi), 1e-9);
    EXPECT_NEAR(res.solution[0], 0.92170, 1e-5);
}

TEST(Newton, QuadraticConvergence)
{
    // Record the error sequence through a residual wrapper.
    std::vector<double> errs;
    NewtonOptions o;
    o.atol = 1e-15;
    o.rtol = 0.0;
    const double root = std::sqrt(2.0);
    (void)newton_solve(
        [&](const Vector &x) -> Vector {
            errs.push_back(std::abs(x[0] - root));
            return Vector::Constant(1, x[0] * x[0] - 2.0);
        },
        [](const Vector &x) { return Matrix(DenseMatrix::Constant(1, 1, 2.0 * x[0])); }, Vector::Constant(1, 3.0),
        o);
    // Keep the distinct iterates well above round-off.
    std::vector<double> e;
    for (double v : errs) {
        if (v > 1e-13 && (e.empty() || v != e.back())) {
            e.push_back(v);
        }
    }
    ASSERT_GE(e.size(), 3u);
    const std::size_t k = e.size() - 1;
    const double rate = std::log(e[k]) / std::log(e[k - 1]);
    EXPECT_GT(rate, 1.8);
}

TEST(Newton, NonconvergenceCarriesLastIterate)
{
    NewtonOptions o;
    o.max_iter = 3;
    // No real root.
    try {
        (void)newton_solve([](const Vector &x) -> Vector { return Vector::Constant(1, x[0] * x[0] + 1.0); },
                           [](const Vector &x) { return Matrix(DenseMatrix::Constant(1, 1, 2.0 * x[0])); },
                           Vector::Constant(1, 1.0), o);
        FAIL() << "expected NonconvergenceError";
    } catch (const NonconvergenceError &e) {
        EXPECT_EQ(e.last_iterate().size(), 1);
        EXPECT_GE(e.stats().iterations, 1u);
    }
}
