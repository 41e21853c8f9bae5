#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace adjts
{

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Evaluation instant handed to every user callback. The step index lets
// problems with step-wise parameterizations (piecewise-constant controls)
// resolve which interval an endpoint belongs to.
struct TimePoint {
    double t = 0.0;
    std::size_t step = 0;

    constexpr TimePoint() = default;
    constexpr TimePoint(double time, std::size_t step_index = 0) : t(time), step(step_index) {}
};

// A Jacobian-like operator stored either dense or sparse. The solver layer
// normalizes to whatever factorization fits.
class Matrix
{
public:
    Matrix() = default;
    Matrix(DenseMatrix m) : m_storage(std::move(m)) {}
    Matrix(SparseMatrix m) : m_storage(std::move(m)) {}

    static Matrix zero(std::size_t rows, std::size_t cols, bool sparse = false);
    static Matrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet> &entries);

    [[nodiscard]] std::size_t rows() const;
    [[nodiscard]] std::size_t cols() const;
    [[nodiscard]] bool is_sparse() const { return std::holds_alternative<SparseMatrix>(m_storage); }

    [[nodiscard]] const DenseMatrix &dense() const { return std::get<DenseMatrix>(m_storage); }
    [[nodiscard]] const SparseMatrix &sparse() const { return std::get<SparseMatrix>(m_storage); }
    [[nodiscard]] DenseMatrix to_dense() const;
    [[nodiscard]] SparseMatrix to_sparse() const;

    [[nodiscard]] Vector apply(const Vector &v) const;
    [[nodiscard]] Vector apply_transpose(const Vector &v) const;
    [[nodiscard]] DenseMatrix apply(const DenseMatrix &v) const;
    [[nodiscard]] DenseMatrix apply_transpose(const DenseMatrix &v) const;

    // Max absolute entry; used for relative comparisons.
    [[nodiscard]] double max_abs() const;

private:
    std::variant<DenseMatrix, SparseMatrix> m_storage = DenseMatrix{};
};

[[nodiscard]] bool all_finite(const Vector &v);
[[nodiscard]] bool all_finite(const Matrix &m);

} // namespace adjts
