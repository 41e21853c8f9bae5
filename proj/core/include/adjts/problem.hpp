#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <adjts/linalg.hpp>

namespace adjts
{

// Mass matrix of M u' = f(t, u; p). Identity, or an explicit (possibly
// singular) constant matrix.
class MassMatrix
{
public:
    MassMatrix() = default;

    static MassMatrix identity() { return MassMatrix{}; }
    static MassMatrix constant(Matrix m);

    [[nodiscard]] bool is_identity() const { return !m_matrix.has_value(); }
    [[nodiscard]] const Matrix &matrix() const { return *m_matrix; }

    [[nodiscard]] Vector apply(const Vector &v) const;
    [[nodiscard]] Vector apply_transpose(const Vector &v) const;
    [[nodiscard]] DenseMatrix apply(const DenseMatrix &v) const;
    [[nodiscard]] Matrix as_matrix(std::size_t n, bool sparse) const;

private:
    std::optional<Matrix> m_matrix;
};

// Callback signatures. Hessian products follow a "result-space, direction-space"
// naming: hess_xy(v1, v2) = v1^T (d/dy)(d f/d x) v2, with v1 in state space,
// v2 in y-space, and the result in x-space. So hess_up takes a parameter
// direction and returns a state-space vector.
using RhsFn = std::function<Vector(const TimePoint &, const Vector &u, const Vector &p)>;
using JacobianFn = std::function<Matrix(const TimePoint &, const Vector &u, const Vector &p)>;
using HessianProductFn =
    std::function<Vector(const TimePoint &, const Vector &u, const Vector &p, const Vector &v1, const Vector &v2)>;

struct DAEProblem {
    std::size_t dim_state = 0;
    std::size_t dim_param = 0;
    MassMatrix mass;

    RhsFn rhs;
    JacobianFn jac_state; // falls back to central differences when empty
    JacobianFn jac_param; // falls back to central differences when empty

    HessianProductFn hess_uu;
    HessianProductFn hess_up;
    HessianProductFn hess_pu;
    HessianProductFn hess_pp;

    [[nodiscard]] Vector eval_rhs(const TimePoint &t, const Vector &u, const Vector &p) const;
    [[nodiscard]] Matrix state_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const;
    [[nodiscard]] Matrix param_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const;

    // Central-difference Jacobians, used when the analytic callbacks are absent.
    [[nodiscard]] Matrix fd_state_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const;
    [[nodiscard]] Matrix fd_param_jacobian(const TimePoint &t, const Vector &u, const Vector &p) const;

    [[nodiscard]] std::vector<std::string> missing_second_order() const;
};

using ScalarFn = std::function<double(const Vector &u, const Vector &p)>;
using GradientFn = std::function<Vector(const Vector &u, const Vector &p)>;
using DirectionalFn = std::function<Vector(const Vector &u, const Vector &p, const Vector &dir)>;
using IntegrandFn = std::function<double(const TimePoint &, const Vector &u, const Vector &p)>;
using IntegrandGradientFn = std::function<Vector(const TimePoint &, const Vector &u, const Vector &p)>;
using IntegrandDirectionalFn =
    std::function<Vector(const TimePoint &, const Vector &u, const Vector &p, const Vector &dir)>;

// Scalar functional psi(u_N; p) + int r(t, u; p) dt. Absent parameter
// derivatives mean the corresponding term has no explicit p dependence.
struct Objective {
    ScalarFn terminal;
    GradientFn terminal_grad_state;
    GradientFn terminal_grad_param;
    DirectionalFn terminal_hess_uu; // psi_uu w,  w in state space
    DirectionalFn terminal_hess_up; // psi_up v,  v in parameter space, result in state space
    DirectionalFn terminal_hess_pu; // psi_pu w,  result in parameter space
    DirectionalFn terminal_hess_pp;

    IntegrandFn integrand;
    IntegrandGradientFn integrand_grad_state;
    IntegrandGradientFn integrand_grad_param;
    IntegrandDirectionalFn integrand_hess_uu;
    IntegrandDirectionalFn integrand_hess_up;
    IntegrandDirectionalFn integrand_hess_pu;
    IntegrandDirectionalFn integrand_hess_pp;

    [[nodiscard]] bool has_terminal() const { return static_cast<bool>(terminal); }
    [[nodiscard]] bool has_integrand() const { return static_cast<bool>(integrand); }

    [[nodiscard]] double eval_terminal(const Vector &u, const Vector &p) const;
    [[nodiscard]] Vector grad_state(const Vector &u, const Vector &p) const;
    [[nodiscard]] Vector grad_param(const Vector &u, const Vector &p, std::size_t dim_param) const;

    [[nodiscard]] std::vector<std::string> missing_first_order() const;
    [[nodiscard]] std::vector<std::string> missing_second_order(std::size_t dim_param) const;
};

// Initial condition eta(p) and its derivatives.
struct ParamMap {
    std::function<Vector(const Vector &p)> eta;
    std::function<DenseMatrix(const Vector &p)> eta_jac;
    // lambda^T eta_pp sigma, a parameter-space vector.
    std::function<Vector(const Vector &p, const Vector &lambda, const Vector &sigma)> eta_hess_product;

    // eta(p) = u0, independent of p.
    static ParamMap fixed(Vector u0);
    // eta(p) = p (requires dim_param == dim_state).
    static ParamMap identity();

    [[nodiscard]] Vector initial_state(const Vector &p) const;
    [[nodiscard]] DenseMatrix jacobian(const Vector &p, std::size_t dim_state) const;
    [[nodiscard]] Vector hess_product(const Vector &p, const Vector &lambda, const Vector &sigma) const;
};

// Throws ConfigurationError listing everything the first-order sweep needs but lacks.
void require_first_order(const DAEProblem &problem, const Objective &objective);
void require_second_order(const DAEProblem &problem, const Objective &objective);

// Per-component central-difference step: cbrt(eps) * max(1, |x|).
[[nodiscard]] double fd_step(double x);

} // namespace adjts
