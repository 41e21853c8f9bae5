#include "polynomial_problem.hpp"

#include <memory>
#include <random>
#include <vector>

namespace adjts::testing
{

namespace
{

using Tensor = std::vector<DenseMatrix>; // one matrix per output component

struct Coefficients {
    DenseMatrix A, B;
    Tensor C, D, E; // C_i: nd x nd, D_i: nd x np, E_i: np x np
    Vector c3, e;
    Vector g, h, kappa, a;
    DenseMatrix Q, Z, R, W, Y, S;
    Vector u0;
    DenseMatrix E0;
    Tensor G; // symmetric np x np per state component
};

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : m_rng(seed) {}
    DenseMatrix matrix(Eigen::Index r, Eigen::Index c, double scale)
    {
        DenseMatrix m(r, c);
        for (Eigen::Index j = 0; j < c; ++j) {
            for (Eigen::Index i = 0; i < r; ++i) {
                m(i, j) = scale * m_dist(m_rng);
            }
        }
        return m;
    }
    Vector vector(Eigen::Index n, double scale) { return matrix(n, 1, scale).col(0); }
    DenseMatrix spd(Eigen::Index n, double scale)
    {
        const DenseMatrix g = matrix(n, n, 1.0);
        return scale * (g * g.transpose() / static_cast<double>(n) + 0.5 * DenseMatrix::Identity(n, n));
    }
    DenseMatrix symmetric(Eigen::Index n, double scale)
    {
        const DenseMatrix g = matrix(n, n, scale);
        return 0.5 * (g + g.transpose());
    }

private:
    std::mt19937_64 m_rng;
    std::normal_distribution<double> m_dist{0.0, 1.0};
};

} // namespace

Vector random_vector(Eigen::Index n, std::uint64_t seed)
{
    return Rng(seed).vector(n, 1.0);
}

PolynomialProblem make_polynomial_problem(const PolynomialOptions &opts)
{
    const auto nd = static_cast<Eigen::Index>(opts.dim_state);
    const auto np = static_cast<Eigen::Index>(opts.dim_param);
    Rng rng(opts.seed);
    auto k = std::make_shared<Coefficients>();
    const double sd = 1.0 / std::sqrt(static_cast<double>(nd));
    k->A = -DenseMatrix::Identity(nd, nd) + rng.matrix(nd, nd, 0.4 * sd);
    k->B = rng.matrix(nd, np, 0.5);
    for (Eigen::Index i = 0; i < nd; ++i) {
        k->C.push_back(rng.matrix(nd, nd, 0.15 * sd));
        k->D.push_back(rng.matrix(nd, np, 0.15 * sd));
        k->E.push_back(rng.matrix(np, np, 0.1));
        k->G.push_back(rng.symmetric(np, 0.2));
    }
    k->c3 = -rng.vector(nd, 0.2).cwiseAbs();
    k->e = rng.vector(nd, 0.3);
    k->g = rng.vector(nd, 1.0);
    k->h = opts.param_in_objective ? rng.vector(np, 0.5) : Vector::Zero(np);
    k->kappa = rng.vector(nd, 0.3);
    k->a = rng.vector(nd, 0.5);
    k->Q = rng.spd(nd, 1.0);
    k->Z = opts.param_in_objective ? rng.matrix(nd, np, 0.3) : DenseMatrix::Zero(nd, np);
    k->R = opts.param_in_objective ? rng.spd(np, 0.5) : DenseMatrix::Zero(np, np);
    k->W = rng.spd(nd, 0.5);
    k->Y = rng.matrix(nd, np, 0.2);
    k->S = rng.spd(np, 0.3);
    k->u0 = rng.vector(nd, 0.5);
    k->E0 = rng.matrix(nd, np, 0.3);
    if (!opts.nonlinear_eta) {
        for (auto &G : k->G) {
            G.setZero();
        }
    }

    PolynomialProblem out;
    out.p = rng.vector(np, 0.5);
    DAEProblem &pr = out.problem;
    pr.dim_state = opts.dim_state;
    pr.dim_param = opts.dim_param;
    if (opts.mass) {
        pr.mass = MassMatrix::constant(Matrix(DenseMatrix(DenseMatrix::Identity(nd, nd) + 0.2 * rng.spd(nd, 1.0))));
    }

    pr.rhs = [k, nd](const TimePoint &t, const Vector &u, const Vector &p) -> Vector {
        Vector f = k->A * u + k->B * p + k->e * t.t;
        for (Eigen::Index i = 0; i < nd; ++i) {
            f[i] += u.dot(k->C[i] * u) + u.dot(k->D[i] * p) + p.dot(k->E[i] * p) + k->c3[i] * u[i] * u[i] * u[i];
        }
        return f;
    };
    pr.jac_state = [k, nd](const TimePoint &, const Vector &u, const Vector &p) {
        DenseMatrix J = k->A;
        for (Eigen::Index i = 0; i < nd; ++i) {
            J.row(i) += ((k->C[i] + k->C[i].transpose()) * u + k->D[i] * p).transpose();
            J(i, i) += 3.0 * k->c3[i] * u[i] * u[i];
        }
        return Matrix(std::move(J));
    };
    pr.jac_param = [k, nd](const TimePoint &, const Vector &u, const Vector &p) {
        DenseMatrix J = k->B;
        for (Eigen::Index i = 0; i < nd; ++i) {
            J.row(i) += (k->D[i].transpose() * u + (k->E[i] + k->E[i].transpose()) * p).transpose();
        }
        return Matrix(std::move(J));
    };
    pr.hess_uu = [k, nd](const TimePoint &, const Vector &u, const Vector &, const Vector &lam,
                         const Vector &w) -> Vector {
        Vector out = Vector::Zero(nd);
        for (Eigen::Index i = 0; i < nd; ++i) {
            out += lam[i] * ((k->C[i] + k->C[i].transpose()) * w);
            out[i] += lam[i] * 6.0 * k->c3[i] * u[i] * w[i];
        }
        return out;
    };
    pr.hess_up = [k, nd](const TimePoint &, const Vector &, const Vector &, const Vector &lam,
                         const Vector &v) -> Vector {
        Vector out = Vector::Zero(nd);
        for (Eigen::Index i = 0; i < nd; ++i) {
            out += lam[i] * (k->D[i] * v);
        }
        return out;
    };
    pr.hess_pu = [k, nd, np](const TimePoint &, const Vector &, const Vector &, const Vector &lam,
                             const Vector &w) -> Vector {
        Vector out = Vector::Zero(np);
        for (Eigen::Index i = 0; i < nd; ++i) {
            out += lam[i] * (k->D[i].transpose() * w);
        }
        return out;
    };
    pr.hess_pp = [k, nd, np](const TimePoint &, const Vector &, const Vector &, const Vector &lam,
                             const Vector &v) -> Vector {
        Vector out = Vector::Zero(np);
        for (Eigen::Index i = 0; i < nd; ++i) {
            out += lam[i] * ((k->E[i] + k->E[i].transpose()) * v);
        }
        return out;
    };

    Objective &obj = out.objective;
    if (opts.terminal) {
        obj.terminal = [k](const Vector &u, const Vector &p) {
            return k->g.dot(u) + 0.5 * u.dot(k->Q * u) + u.dot(k->Z * p) + 0.5 * p.dot(k->R * p) + k->h.dot(p)
                   + k->kappa.dot(u.array().cube().matrix()) / 6.0;
        };
        obj.terminal_grad_state = [k](const Vector &u, const Vector &p) -> Vector {
            return k->g + k->Q * u + k->Z * p + 0.5 * k->kappa.cwiseProduct(u.cwiseProduct(u));
        };
        obj.terminal_hess_uu = [k](const Vector &u, const Vector &, const Vector &w) -> Vector {
            return k->Q * w + k->kappa.cwiseProduct(u).cwiseProduct(w);
        };
        if (opts.param_in_objective) {
            obj.terminal_grad_param = [k](const Vector &u, const Vector &p) -> Vector {
                return k->Z.transpose() * u + k->R * p + k->h;
            };
            obj.terminal_hess_up = [k](const Vector &, const Vector &, const Vector &v) -> Vector {
                return k->Z * v;
            };
            obj.terminal_hess_pu = [k](const Vector &, const Vector &, const Vector &w) -> Vector {
                return k->Z.transpose() * w;
            };
            obj.terminal_hess_pp = [k](const Vector &, const Vector &, const Vector &v) -> Vector {
                return k->R * v;
            };
        }
    }
    if (opts.integrand) {
        obj.integrand = [k](const TimePoint &t, const Vector &u, const Vector &p) {
            return 0.5 * u.dot(k->W * u) + u.dot(k->Y * p) + 0.5 * p.dot(k->S * p) + t.t * k->a.dot(u);
        };
        obj.integrand_grad_state = [k](const TimePoint &t, const Vector &u, const Vector &p) -> Vector {
            return k->W * u + k->Y * p + t.t * k->a;
        };
        obj.integrand_grad_param = [k](const TimePoint &, const Vector &u, const Vector &p) -> Vector {
            return k->Y.transpose() * u + k->S * p;
        };
        obj.integrand_hess_uu = [k](const TimePoint &, const Vector &, const Vector &, const Vector &w) -> Vector {
            return k->W * w;
        };
        obj.integrand_hess_up = [k](const TimePoint &, const Vector &, const Vector &, const Vector &v) -> Vector {
            return k->Y * v;
        };
        obj.integrand_hess_pu = [k](const TimePoint &, const Vector &, const Vector &, const Vector &w) -> Vector {
            return k->Y.transpose() * w;
        };
        obj.integrand_hess_pp = [k](const TimePoint &, const Vector &, const Vector &, const Vector &v) -> Vector {
            return k->S * v;
        };
    }

    out.param_map.eta = [k, nd](const Vector &p) -> Vector {
        Vector u = k->u0 + k->E0 * p;
        for (Eigen::Index i = 0; i < nd; ++i) {
            u[i] += 0.5 * p.dot(k->G[i] * p);
        }
        return u;
    };
    out.param_map.eta_jac = [k, nd](const Vector &p) {
        DenseMatrix J = k->E0;
        for (Eigen::Index i = 0; i < nd; ++i) {
            J.row(i) += (k->G[i] * p).transpose();
        }
        return J;
    };
    out.param_map.eta_hess_product = [k, nd, np](const Vector &, const Vector &lam, const Vector &sigma) -> Vector {
        Vector out = Vector::Zero(np);
        for (Eigen::Index i = 0; i < nd; ++i) {
            out += lam[i] * (k->G[i] * sigma);
        }
        return out;
    };
    return out;
}

} // namespace adjts::testing
