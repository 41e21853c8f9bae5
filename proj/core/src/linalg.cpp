#include <adjts/errors.hpp>
#include <adjts/linalg.hpp>

#include <algorithm>
#include <cmath>

namespace adjts
{

ConfigurationError::ConfigurationError(const std::string &what, std::vector<std::string> missing)
    : Error([&] {
          std::string msg = what;
          if (!missing.empty()) {
              msg += " (missing:";
              for (const auto &m : missing) {
                  msg += ' ';
                  msg += m;
              }
              msg += ')';
          }
          return msg;
      }()),
      m_missing(std::move(missing))
{
}

Matrix Matrix::zero(std::size_t rows, std::size_t cols, bool sparse)
{
    if (sparse) {
        SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        return Matrix(std::move(m));
    }
    return Matrix(DenseMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
}

Matrix Matrix::from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet> &entries)
{
    SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return Matrix(std::move(m));
}

std::size_t Matrix::rows() const
{
    return std::visit([](const auto &m) { return static_cast<std::size_t>(m.rows()); }, m_storage);
}

std::size_t Matrix::cols() const
{
    return std::visit([](const auto &m) { return static_cast<std::size_t>(m.cols()); }, m_storage);
}

DenseMatrix Matrix::to_dense() const
{
    if (is_sparse()) {
        return DenseMatrix(sparse());
    }
    return dense();
}

SparseMatrix Matrix::to_sparse() const
{
    if (is_sparse()) {
        return sparse();
    }
    SparseMatrix s = dense().sparseView();
    s.makeCompressed();
    return s;
}

Vector Matrix::apply(const Vector &v) const
{
    return std::visit([&](const auto &m) -> Vector { return m * v; }, m_storage);
}

Vector Matrix::apply_transpose(const Vector &v) const
{
    return std::visit([&](const auto &m) -> Vector { return m.transpose() * v; }, m_storage);
}

DenseMatrix Matrix::apply(const DenseMatrix &v) const
{
    return std::visit([&](const auto &m) -> DenseMatrix { return m * v; }, m_storage);
}

DenseMatrix Matrix::apply_transpose(const DenseMatrix &v) const
{
    return std::visit([&](const auto &m) -> DenseMatrix { return m.transpose() * v; }, m_storage);
}

double Matrix::max_abs() const
{
    if (is_sparse()) {
        double r = 0.0;
        const auto &s = sparse();
        for (Eigen::Index k = 0; k < s.nonZeros(); ++k) {
            r = std::max(r, std::abs(s.valuePtr()[k]));
        }
        return r;
    }
    return dense().size() == 0 ? 0.0 : dense().cwiseAbs().maxCoeff();
}

bool all_finite(const Vector &v)
{
    return v.allFinite();
}

bool all_finite(const Matrix &m)
{
    if (m.is_sparse()) {
        const auto &s = m.sparse();
        return std::all_of(s.valuePtr(), s.valuePtr() + s.nonZeros(), [](double x) { return std::isfinite(x); });
    }
    return m.dense().allFinite();
}

} // namespace adjts
