#include <adjts/errors.hpp>
#include <adjts/problem.hpp>

#include <cmath>
#include <limits>

namespace adjts
{

double fd_step(double x)
{
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    return base * std::max(1.0, std::abs(x));
}

MassMatrix MassMatrix::constant(Matrix m)
{
    MassMatrix mm;
    mm.m_matrix = std::move(m);
    return mm;
}

Vector MassMatrix::apply(const Vector &v) const
{
    return is_identity() ? v : m_matrix->apply(v);
}

Vector MassMatrix::apply_transpose(const Vector &v) const
{
    return is_identity() ? v : m_matrix->apply_transpose(v);
}

DenseMatrix MassMatrix::apply(const DenseMatrix &v) const
{
    return is_identity() ? v : m_matrix->apply(v);
}

Matrix MassMatrix::as_matrix(std::size_t n, bool sparse) const
{
    if (!is_identity()) {
        return sparse ? Matrix(m_matrix->to_sparse()) : Matrix(m_matrix->to_dense());
    }
    const auto ni = static_cast<Eigen::Index>(n);
    if (sparse) {
        SparseMatrix id(ni, ni);
        id.setIdentity();
        return Matrix(std::move(id));
    }
    return Matrix(DenseMatrix::Identity(ni, ni));
}

Vector DAEProblem::eval_rhs(const TimePoint &t, const Vector &u, const Vector &p) const
{
    Vector f = rhs(t, u, p);
    if (static_cast<std::size_t>(f.size()) != dim_state) {
        throw ContractViolation("rhs returned a vector of length " + std::to_string(f.size()) + ", expected "
                                + std::to_string(dim_state));
    }
    return f;
}

Matrix DAEProblem::state_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const
{
    if (jac_state) {
        return jac_state(t, u, p);
    }
    return fd_state_jacobian(t, u, p);
}

Matrix DAEProblem::param_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const
{
    if (dim_param == 0) {
        return Matrix(DenseMatrix(static_cast<Eigen::Index>(dim_state), 0));
    }
    if (jac_param) {
        return jac_param(t, u, p);
    }
    return fd_param_jacobian(t, u, p);
}

Matrix DAEProblem::fd_state_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const
{
    const auto n = static_cast<Eigen::Index>(dim_state);
    DenseMatrix J(n, n);
    Vector x = u;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double eps = fd_step(u[j]);
        x[j] = u[j] + eps;
        const Vector fp = rhs(t, x, p);
        x[j] = u[j] - eps;
        const Vector fm = rhs(t, x, p);
        x[j] = u[j];
        J.col(j) = (fp - fm) / (2.0 * eps);
    }
    return Matrix(std::move(J));
}

Matrix DAEProblem::fd_param_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const
{
    const auto n = static_cast<Eigen::Index>(dim_state);
    const auto m = static_cast<Eigen::Index>(dim_param);
    DenseMatrix J(n, m);
    Vector q = p;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double eps = fd_step(p[j]);
        q[j] = p[j] + eps;
        const Vector fp = rhs(t, u, q);
        q[j] = p[j] - eps;
        const Vector fm = rhs(t, u, q);
        q[j] = p[j];
        J.col(j) = (fp - fm) / (2.0 * eps);
    }
    return Matrix(std::move(J));
}

std::vector<std::string> DAEProblem::missing_second_order() const
{
    std::vector<std::string> missing;
    if (!hess_uu) {
        missing.emplace_back("hess_uu");
    }
    if (dim_param > 0) {
        if (!hess_up) {
            missing.emplace_back("hess_up");
        }
        if (!hess_pu) {
            missing.emplace_back("hess_pu");
        }
        if (!hess_pp) {
            missing.emplace_back("hess_pp");
        }
    }
    return missing;
}

double Objective::eval_terminal(const Vector &u, const Vector &p) const
{
    return terminal ? terminal(u, p) : 0.0;
}

Vector Objective::grad_state(const Vector &u, const Vector &p) const
{
    if (!terminal) {
        return Vector::Zero(u.size());
    }
    return terminal_grad_state(u, p);
}

Vector Objective::grad_param(const Vector &u, const Vector &p, std::size_t dim_param) const
{
    if (!terminal || !terminal_grad_param) {
        return Vector::Zero(static_cast<Eigen::Index>(dim_param));
    }
    return terminal_grad_param(u, p);
}

std::vector<std::string> Objective::missing_first_order() const
{
    std::vector<std::string> missing;
    if (!terminal && !integrand) {
        missing.emplace_back("terminal or integrand");
    }
    if (terminal && !terminal_grad_state) {
        missing.emplace_back("terminal_grad_state");
    }
    if (integrand && !integrand_grad_state) {
        missing.emplace_back("integrand_grad_state");
    }
    return missing;
}

std::vector<std::string> Objective::missing_second_order(std::size_t dim_param) const
{
    std::vector<std::string> missing;
    if (terminal && !terminal_hess_uu) {
        missing.emplace_back("terminal_hess_uu");
    }
    if (integrand && !integrand_hess_uu) {
        missing.emplace_back("integrand_hess_uu");
    }
    // Mixed blocks are only needed when the first derivative w.r.t. p exists.
    if (dim_param > 0) {
        if (terminal && terminal_grad_param && (!terminal_hess_up || !terminal_hess_pu || !terminal_hess_pp)) {
            missing.emplace_back("terminal_hess_up/pu/pp");
        }
        if (integrand && integrand_grad_param && (!integrand_hess_up || !integrand_hess_pu || !integrand_hess_pp)) {
            missing.emplace_back("integrand_hess_up/pu/pp");
        }
    }
    return missing;
}

ParamMap ParamMap::fixed(Vector u0)
{
    ParamMap m;
    m.eta = [u0 = std::move(u0)](const Vector &) { return u0; };
    return m;
}

ParamMap ParamMap::identity()
{
    ParamMap m;
    m.eta = [](const Vector &p) { return p; };
    m.eta_jac = [](const Vector &p) -> DenseMatrix { return DenseMatrix::Identity(p.size(), p.size()); };
    return m;
}

Vector ParamMap::initial_state(const Vector &p) const
{
    if (!eta) {
        throw ConfigurationError("parameter map has no initial condition", {"eta"});
    }
    return eta(p);
}

DenseMatrix ParamMap::jacobian(const Vector &p, std::size_t dim_state) const
{
    if (!eta_jac) {
        return DenseMatrix::Zero(static_cast<Eigen::Index>(dim_state), p.size());
    }
    return eta_jac(p);
}

Vector ParamMap::hess_product(const Vector &p, const Vector &lambda, const Vector &sigma) const
{
    if (!eta_hess_product) {
        return Vector::Zero(p.size());
    }
    return eta_hess_product(p, lambda, sigma);
}

void require_first_order(const DAEProblem &problem, const Objective &objective)
{
    auto missing = objective.missing_first_order();
    if (!problem.rhs) {
        missing.insert(missing.begin(), "rhs");
    }
    if (!missing.empty()) {
        throw ConfigurationError("first-order sensitivities unavailable", std::move(missing));
    }
}

void require_second_order(const DAEProblem &problem, const Objective &objective)
{
    require_first_order(problem, objective);
    auto missing = problem.missing_second_order();
    const auto obj_missing = objective.missing_second_order(problem.dim_param);
    missing.insert(missing.end(), obj_missing.begin(), obj_missing.end());
    if (!missing.empty()) {
        throw ConfigurationError("second-order sensitivities unavailable", std::move(missing));
    }
}

} // namespace adjts
