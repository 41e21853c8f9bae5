#include <adjts/validation.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace adjts
{

namespace
{

constexpr std::size_t full_fd_limit = 1024;

std::string first_nonfinite(const DenseMatrix &m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (!std::isfinite(m(i, j))) {
                return m.cols() == 1 ? fmt::format("non-finite output at index {}", i)
                                     : fmt::format("non-finite output at ({}, {})", i, j);
            }
        }
    }
    return {};
}

double relative_discrepancy(const DenseMatrix &analytic, const DenseMatrix &fd)
{
    const double scale = std::max(fd.size() == 0 ? 0.0 : fd.cwiseAbs().maxCoeff(), 1e-8);
    return analytic.size() == 0 ? 0.0 : (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

DenseMatrix as_column(const Vector &v)
{
    return DenseMatrix(v);
}

// Central difference of a vector-valued map along direction d around x.
Vector directional_fd(const std::function<Vector(const Vector &)> &g, const Vector &x, const Vector &d)
{
    const double eps = fd_step(x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff());
    const double dnorm = std::max(d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff(), 1e-300);
    const double h = eps / dnorm;
    return (g(x + h * d) - g(x - h * d)) / (2.0 * h);
}

double directional_fd_scalar(const std::function<double(const Vector &)> &g, const Vector &x, const Vector &d)
{
    const double eps = fd_step(x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff());
    const double dnorm = std::max(d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff(), 1e-300);
    const double h = eps / dnorm;
    return (g(x + h * d) - g(x - h * d)) / (2.0 * h);
}

Vector fd_gradient(const std::function<double(const Vector &)> &g, const Vector &x)
{
    Vector grad(x.size());
    Vector y = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double eps = fd_step(x[j]);
        y[j] = x[j] + eps;
        const double gp = g(y);
        y[j] = x[j] - eps;
        const double gm = g(y);
        y[j] = x[j];
        grad[j] = (gp - gm) / (2.0 * eps);
    }
    return grad;
}

class Checker
{
public:
    explicit Checker(double tol) : m_tol(tol) {}

    void check(const std::string &name, const std::function<DenseMatrix()> &analytic,
               const std::function<DenseMatrix()> &fd)
    {
        ValidationEntry e;
        e.callback = name;
        try {
            const DenseMatrix a = analytic();
            if (auto where = first_nonfinite(a); !where.empty()) {
                e.max_rel_discrepancy = std::numeric_limits<double>::infinity();
                e.note = where;
            } else {
                const DenseMatrix f = fd();
                if (a.rows() != f.rows() || a.cols() != f.cols()) {
                    e.max_rel_discrepancy = std::numeric_limits<double>::infinity();
                    e.note = fmt::format("shape {}x{} does not match {}x{}", a.rows(), a.cols(), f.rows(), f.cols());
                } else {
                    e.max_rel_discrepancy = relative_discrepancy(a, f);
                }
            }
        } catch (const std::exception &ex) {
            e.max_rel_discrepancy = std::numeric_limits<double>::infinity();
            e.note = ex.what();
        }
        e.passed = e.max_rel_discrepancy <= m_tol;
        report.entries.push_back(std::move(e));
    }

    ValidationReport report;

private:
    double m_tol;
};

} // namespace

bool ValidationReport::all_passed() const
{
    return std::all_of(entries.begin(), entries.end(), [](const auto &e) { return e.passed; });
}

const ValidationEntry *ValidationReport::find(const std::string &callback) const
{
    auto it = std::find_if(entries.begin(), entries.end(), [&](const auto &e) { return e.callback == callback; });
    return it == entries.end() ? nullptr : &*it;
}

double ValidationReport::max_discrepancy() const
{
    double r = 0.0;
    for (const auto &e : entries) {
        r = std::max(r, e.max_rel_discrepancy);
    }
    return r;
}

ValidationReport validate_derivatives(const DAEProblem &problem, const Objective &objective, const TimePoint &t,
                                      const Vector &u, const Vector &p, double tol)
{
    Checker checker(tol);
    std::mt19937_64 rng(20210401);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto random_vector = [&](Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = unif(rng);
        }
        return v;
    };

    const auto nd = static_cast<Eigen::Index>(problem.dim_state);
    const auto np = static_cast<Eigen::Index>(problem.dim_param);
    const bool full = problem.dim_state <= full_fd_limit;
    const Vector d_state = random_vector(nd);
    const Vector d_param = random_vector(np);
    const Vector v1 = random_vector(nd);

    auto rhs_u = [&](const Vector &x) { return problem.rhs(t, x, p); };

    if (problem.jac_state) {
        if (full) {
            checker.check(
                "jac_state", [&] { return problem.jac_state(t, u, p).to_dense(); },
                [&] { return problem.fd_state_jacobian(t, u, p).to_dense(); });
        } else {
            checker.check(
                "jac_state", [&] { return as_column(problem.jac_state(t, u, p).apply(d_state)); },
                [&] { return as_column(directional_fd(rhs_u, u, d_state)); });
        }
    }
    if (problem.jac_param && np > 0) {
        checker.check(
            "jac_param", [&] { return problem.jac_param(t, u, p).to_dense(); },
            [&] { return problem.fd_param_jacobian(t, u, p).to_dense(); });
    }

    // Hessian products against differences of transposed Jacobian products.
    auto ju_t = [&](const Vector &x, const Vector &q) { return problem.state_jacobian(t, x, q).apply_transpose(v1); };
    auto jp_t = [&](const Vector &x, const Vector &q) { return problem.param_jacobian(t, x, q).apply_transpose(v1); };
    if (problem.hess_uu) {
        checker.check(
            "hess_uu", [&] { return as_column(problem.hess_uu(t, u, p, v1, d_state)); },
            [&] { return as_column(directional_fd([&](const Vector &x) { return ju_t(x, p); }, u, d_state)); });
    }
    if (np > 0) {
        if (problem.hess_up) {
            checker.check(
                "hess_up", [&] { return as_column(problem.hess_up(t, u, p, v1, d_param)); },
                [&] { return as_column(directional_fd([&](const Vector &q) { return ju_t(u, q); }, p, d_param)); });
        }
        if (problem.hess_pu) {
            checker.check(
                "hess_pu", [&] { return as_column(problem.hess_pu(t, u, p, v1, d_state)); },
                [&] { return as_column(directional_fd([&](const Vector &x) { return jp_t(x, p); }, u, d_state)); });
        }
        if (problem.hess_pp) {
            checker.check(
                "hess_pp", [&] { return as_column(problem.hess_pp(t, u, p, v1, d_param)); },
                [&] { return as_column(directional_fd([&](const Vector &q) { return jp_t(u, q); }, p, d_param)); });
        }
    }

    // Objective gradients against differences of the scalar parents.
    auto grad_check = [&](const std::string &name, const std::function<Vector()> &analytic,
                          const std::function<double(const Vector &)> &parent, const Vector &at) {
        if (at.size() == 0) {
            return;
        }
        if (static_cast<std::size_t>(at.size()) <= full_fd_limit) {
            checker.check(
                name, [&] { return as_column(analytic()); }, [&] { return as_column(fd_gradient(parent, at)); });
        } else {
            const Vector d = random_vector(at.size());
            checker.check(
                name,
                [&] {
                    DenseMatrix m(1, 1);
                    m(0, 0) = analytic().dot(d);
                    return m;
                },
                [&] {
                    DenseMatrix m(1, 1);
                    m(0, 0) = directional_fd_scalar(parent, at, d);
                    return m;
                });
        }
    };

    if (objective.terminal) {
        if (objective.terminal_grad_state) {
            grad_check(
                "terminal_grad_state", [&] { return objective.terminal_grad_state(u, p); },
                [&](const Vector &x) { return objective.terminal(x, p); }, u);
        }
        if (objective.terminal_grad_param) {
            grad_check(
                "terminal_grad_param", [&] { return objective.terminal_grad_param(u, p); },
                [&](const Vector &q) { return objective.terminal(u, q); }, p);
        }
        if (objective.terminal_hess_uu && objective.terminal_grad_state) {
            checker.check(
                "terminal_hess_uu", [&] { return as_column(objective.terminal_hess_uu(u, p, d_state)); },
                [&] {
                    return as_column(directional_fd(
                        [&](const Vector &x) { return objective.terminal_grad_state(x, p); }, u, d_state));
                });
        }
        if (np > 0 && objective.terminal_grad_state && objective.terminal_grad_param) {
            if (objective.terminal_hess_up) {
                checker.check(
                    "terminal_hess_up", [&] { return as_column(objective.terminal_hess_up(u, p, d_param)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &q) { return objective.terminal_grad_state(u, q); }, p, d_param));
                    });
            }
            if (objective.terminal_hess_pu) {
                checker.check(
                    "terminal_hess_pu", [&] { return as_column(objective.terminal_hess_pu(u, p, d_state)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &x) { return objective.terminal_grad_param(x, p); }, u, d_state));
                    });
            }
            if (objective.terminal_hess_pp) {
                checker.check(
                    "terminal_hess_pp", [&] { return as_column(objective.terminal_hess_pp(u, p, d_param)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &q) { return objective.terminal_grad_param(u, q); }, p, d_param));
                    });
            }
        }
    }

    if (objective.integrand) {
        if (objective.integrand_grad_state) {
            grad_check(
                "integrand_grad_state", [&] { return objective.integrand_grad_state(t, u, p); },
                [&](const Vector &x) { return objective.integrand(t, x, p); }, u);
        }
        if (objective.integrand_grad_param) {
            grad_check(
                "integrand_grad_param", [&] { return objective.integrand_grad_param(t, u, p); },
                [&](const Vector &q) { return objective.integrand(t, u, q); }, p);
        }
        if (objective.integrand_hess_uu && objective.integrand_grad_state) {
            checker.check(
                "integrand_hess_uu", [&] { return as_column(objective.integrand_hess_uu(t, u, p, d_state)); },
                [&] {
                    return as_column(directional_fd(
                        [&](const Vector &x) { return objective.integrand_grad_state(t, x, p); }, u, d_state));
                });
        }
        if (np > 0 && objective.integrand_grad_state && objective.integrand_grad_param) {
            if (objective.integrand_hess_up) {
                checker.check(
                    "integrand_hess_up", [&] { return as_column(objective.integrand_hess_up(t, u, p, d_param)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &q) { return objective.integrand_grad_state(t, u, q); }, p, d_param));
                    });
            }
            if (objective.integrand_hess_pu) {
                checker.check(
                    "integrand_hess_pu", [&] { return as_column(objective.integrand_hess_pu(t, u, p, d_state)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &x) { return objective.integrand_grad_param(t, x, p); }, u, d_state));
                    });
            }
            if (objective.integrand_hess_pp) {
                checker.check(
                    "integrand_hess_pp", [&] { return as_column(objective.integrand_hess_pp(t, u, p, d_param)); },
                    [&] {
                        return as_column(directional_fd(
                            [&](const Vector &q) { return objective.integrand_grad_param(t, u, q); }, p, d_param));
                    });
            }
        }
    }

    return std::move(checker.report);
}

} // namespace adjts
