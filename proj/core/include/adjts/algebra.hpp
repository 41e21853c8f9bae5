#pragma once

#include <cstddef>
#include <functional>
#include <memory>

#include <adjts/errors.hpp>
#include <adjts/linalg.hpp>
#include <adjts/problem.hpp>

namespace adjts
{

struct LinearOptions {
    double rtol = 1e-12;
    // Dense LU up to this size when the operator arrives dense; sparse LU above
    // it and whenever the operator arrives sparse.
    std::size_t dense_limit = 2048;
    // Extra refinement sweeps when the first residual misses rtol.
    int max_refinements = 2;
};

// LU factorization of a square operator supporting forward and transposed
// solves with the same factors.
class Factorization
{
public:
    Factorization();
    Factorization(const Matrix &A, const LinearOptions &opts = {});
    ~Factorization();
    Factorization(Factorization &&) noexcept;
    Factorization &operator=(Factorization &&) noexcept;
    Factorization(const Factorization &) = delete;
    Factorization &operator=(const Factorization &) = delete;

    [[nodiscard]] bool valid() const { return static_cast<bool>(m_impl); }
    [[nodiscard]] bool is_sparse() const;
    [[nodiscard]] std::size_t size() const;

    // Solve A x = b, or A^T x = b when transpose is set.
    [[nodiscard]] Vector solve(const Vector &b, bool transpose = false) const;
    [[nodiscard]] Vector solve_transpose(const Vector &b) const { return solve(b, true); }
    [[nodiscard]] DenseMatrix solve(const DenseMatrix &B, bool transpose = false) const;

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

// a M - J, the operator of every implicit stage and its adjoint.
struct ShiftedJacobian {
    double a = 1.0;
    MassMatrix mass;
    Matrix jacobian;

    ShiftedJacobian() = default;
    ShiftedJacobian(double shift, MassMatrix m, Matrix j) : a(shift), mass(std::move(m)), jacobian(std::move(j)) {}

    [[nodiscard]] std::size_t size() const { return jacobian.rows(); }
    [[nodiscard]] Matrix assemble() const;
    [[nodiscard]] Vector apply(const Vector &x) const;
    [[nodiscard]] Vector apply_transpose(const Vector &x) const;
    [[nodiscard]] Factorization factorize(const LinearOptions &opts = {}) const;
};

[[nodiscard]] Vector linear_solve(const ShiftedJacobian &A, const Vector &b, bool transpose = false,
                                  const LinearOptions &opts = {});

struct NewtonOptions {
    double atol = 1e-10;
    double rtol = 1e-8;
    std::size_t max_iter = 50;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    std::size_t max_backtracks = 40;
    LinearOptions linear;
};

struct NewtonStats {
    std::size_t iterations = 0;
    std::size_t linear_solves = 0;
    std::size_t backtracks = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
};

struct NewtonResult {
    Vector solution;
    NewtonStats stats;
};

class NonconvergenceError : public Error
{
public:
    NonconvergenceError(const std::string &what, Vector last_iterate, NewtonStats stats)
        : Error(what), m_last(std::move(last_iterate)), m_stats(stats)
    {
    }

    [[nodiscard]] const Vector &last_iterate() const noexcept { return m_last; }
    [[nodiscard]] const NewtonStats &stats() const noexcept { return m_stats; }

private:
    Vector m_last;
    NewtonStats m_stats;
};

using ResidualFn = std::function<Vector(const Vector &)>;
using ResidualJacobianFn = std::function<Matrix(const Vector &)>;

// Damped Newton with backtracking Armijo on ||R||^2. Converged when
// ||R(x)|| <= atol + rtol * ||R(guess)||, checked before every iteration.
[[nodiscard]] NewtonResult newton_solve(const ResidualFn &residual, const ResidualJacobianFn &jacobian,
                                        const Vector &guess, const NewtonOptions &opts = {});

} // namespace adjts
