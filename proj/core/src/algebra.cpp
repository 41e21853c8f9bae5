#include <adjts/algebra.hpp>

#include <cmath>
#include <limits>
#include <variant>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <fmt/format.h>

namespace adjts
{

using SparseLUSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

struct Factorization::Impl {
    Matrix original;
    LinearOptions opts;
    std::variant<Eigen::PartialPivLU<DenseMatrix>, std::unique_ptr<SparseLUSolver>> lu;

    [[nodiscard]] Vector raw_solve(const Vector &b, bool transpose) const
    {
        if (const auto *d = std::get_if<Eigen::PartialPivLU<DenseMatrix>>(&lu)) {
            return transpose ? Vector(d->transpose().solve(b)) : Vector(d->solve(b));
        }
        auto &s = *std::get<std::unique_ptr<SparseLUSolver>>(lu); // transpose() is non-const
        return transpose ? Vector(s.transpose().solve(b)) : Vector(s.solve(b));
    }
};

Factorization::Factorization(const Matrix &A, const LinearOptions &opts) : m_impl(std::make_unique<Impl>())
{
    if (A.rows() != A.cols()) {
        throw ContractViolation(fmt::format("cannot factorize a {}x{} operator", A.rows(), A.cols()));
    }
    m_impl->opts = opts;
    const bool use_sparse = A.is_sparse() || A.rows() > opts.dense_limit;
    if (use_sparse) {
        m_impl->original = Matrix(A.to_sparse());
        auto solver = std::make_unique<SparseLUSolver>();
        solver->analyzePattern(m_impl->original.sparse());
        solver->factorize(m_impl->original.sparse());
        if (solver->info() != Eigen::Success) {
            throw SingularMatrixError("sparse LU failed: " + solver->lastErrorMessage(), -1);
        }
        m_impl->lu = std::move(solver);
    } else {
        m_impl->original = Matrix(A.to_dense());
        Eigen::PartialPivLU<DenseMatrix> lu(m_impl->original.dense());
        const auto diag = lu.matrixLU().diagonal();
        const double scale = diag.size() == 0 ? 0.0 : diag.cwiseAbs().maxCoeff();
        const double threshold = std::numeric_limits<double>::epsilon() * static_cast<double>(diag.size()) * scale;
        for (Eigen::Index i = 0; i < diag.size(); ++i) {
            if (!std::isfinite(diag[i]) || std::abs(diag[i]) <= threshold) {
                throw SingularMatrixError(fmt::format("dense LU breakdown at pivot {} (|u_ii| = {:.3e})", i,
                                                      std::abs(diag[i])),
                                          i);
            }
        }
        m_impl->lu = std::move(lu);
    }
}

Factorization::Factorization() = default;
Factorization::~Factorization() = default;
Factorization::Factorization(Factorization &&) noexcept = default;
Factorization &Factorization::operator=(Factorization &&) noexcept = default;

bool Factorization::is_sparse() const
{
    return m_impl && m_impl->original.is_sparse();
}

std::size_t Factorization::size() const
{
    return m_impl ? m_impl->original.rows() : 0;
}

Vector Factorization::solve(const Vector &b, bool transpose) const
{
    if (!m_impl) {
        throw ContractViolation("solve on an empty factorization");
    }
    if (static_cast<std::size_t>(b.size()) != size()) {
        throw ContractViolation(fmt::format("right-hand side of length {} for a system of size {}", b.size(), size()));
    }
    Vector x = m_impl->raw_solve(b, transpose);
    const double bnorm = b.norm();
    for (int k = 0; k < m_impl->opts.max_refinements; ++k) {
        const Vector r = b - (transpose ? m_impl->original.apply_transpose(x) : m_impl->original.apply(x));
        const double rnorm = r.norm();
        if (!std::isfinite(rnorm)) {
            throw SingularMatrixError("linear solve produced non-finite values", -1);
        }
        if (rnorm <= m_impl->opts.rtol * bnorm) {
            break;
        }
        x += m_impl->raw_solve(r, transpose);
    }
    return x;
}

DenseMatrix Factorization::solve(const DenseMatrix &B, bool transpose) const
{
    DenseMatrix X(B.rows(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        X.col(j) = solve(Vector(B.col(j)), transpose);
    }
    return X;
}

Matrix ShiftedJacobian::assemble() const
{
    const std::size_t n = jacobian.rows();
    if (jacobian.is_sparse()) {
        SparseMatrix m = a * mass.as_matrix(n, true).sparse() - jacobian.sparse();
        m.makeCompressed();
        return Matrix(std::move(m));
    }
    if (mass.is_identity()) {
        DenseMatrix m = -jacobian.dense();
        m.diagonal().array() += a;
        return Matrix(std::move(m));
    }
    return Matrix(DenseMatrix(a * mass.matrix().to_dense() - jacobian.dense()));
}

Vector ShiftedJacobian::apply(const Vector &x) const
{
    return a * mass.apply(x) - jacobian.apply(x);
}

Vector ShiftedJacobian::apply_transpose(const Vector &x) const
{
    return a * mass.apply_transpose(x) - jacobian.apply_transpose(x);
}

Factorization ShiftedJacobian::factorize(const LinearOptions &opts) const
{
    return Factorization(assemble(), opts);
}

Vector linear_solve(const ShiftedJacobian &A, const Vector &b, bool transpose, const LinearOptions &opts)
{
    return A.factorize(opts).solve(b, transpose);
}

NewtonResult newton_solve(const ResidualFn &residual, const ResidualJacobianFn &jacobian, const Vector &guess,
                          const NewtonOptions &opts)
{
    NewtonStats stats;
    Vector x = guess;
    Vector r = residual(x);
    double rnorm = r.norm();
    stats.initial_residual = rnorm;
    const double target = opts.atol + opts.rtol * rnorm;

    auto fail = [&](const std::string &why) -> NewtonResult {
        stats.final_residual = rnorm;
        throw NonconvergenceError(
            fmt::format("Newton failed after {} iterations: {} (residual {:.3e})", stats.iterations, why, rnorm), x,
            stats);
    };

    while (true) {
        if (!std::isfinite(rnorm)) {
            return fail("non-finite residual");
        }
        if (rnorm <= target) {
            break;
        }
        if (stats.iterations >= opts.max_iter) {
            return fail("iteration limit reached");
        }
        ++stats.iterations;

        Vector dx;
        try {
            const Factorization lu(jacobian(x), opts.linear);
            dx = lu.solve(Vector(-r));
        } catch (const SingularMatrixError &e) {
            return fail(std::string("singular Jacobian: ") + e.what());
        }
        ++stats.linear_solves;

        // Backtracking on phi(alpha) = ||R(x + alpha dx)||^2; dphi(0) = -2 ||R||^2.
        const double phi0 = rnorm * rnorm;
        double alpha = 1.0;
        bool accepted = false;
        for (std::size_t k = 0; k <= opts.max_backtracks; ++k) {
            Vector trial = x + alpha * dx;
            Vector rt = residual(trial);
            const double rtnorm = rt.norm();
            const bool sufficient = rtnorm * rtnorm <= (1.0 - 2.0 * opts.armijo_c1 * alpha) * phi0;
            if (std::isfinite(rtnorm) && (sufficient || rtnorm <= target)) {
                x = std::move(trial);
                r = std::move(rt);
                rnorm = rtnorm;
                accepted = true;
                break;
            }
            ++stats.backtracks;
            alpha *= opts.backtrack;
        }
        if (!accepted) {
            return fail("line search failed");
        }
    }
    stats.final_residual = rnorm;
    return {std::move(x), stats};
}

} // namespace adjts
