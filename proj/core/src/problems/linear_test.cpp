#include <adjts/problems/linear_test.hpp>

#include <random>

namespace adjts
{

namespace
{

DenseMatrix random_matrix(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = dist(rng);
        }
    }
    return m;
}

DenseMatrix random_spd(std::mt19937_64 &rng, Eigen::Index n, double shift)
{
    const DenseMatrix g = random_matrix(rng, n, n);
    return g * g.transpose() / static_cast<double>(n) + shift * DenseMatrix::Identity(n, n);
}

} // namespace

std::unique_ptr<LinearTestProblem> make_linear_test(const LinearTestOptions &opts)
{
    auto out = std::make_unique<LinearTestProblem>();
    std::mt19937_64 rng(opts.seed);
    const auto nd = static_cast<Eigen::Index>(opts.dim_state);
    const auto np = static_cast<Eigen::Index>(opts.dim_param);

    LinearTestData &d = out->data;
    // Stable drift: -I plus a scaled perturbation.
    d.A = -DenseMatrix::Identity(nd, nd) + 0.3 * random_matrix(rng, nd, nd);
    d.B = random_matrix(rng, nd, np);
    d.E = opts.eta_depends_on_p ? DenseMatrix(0.5 * random_matrix(rng, nd, np)) : DenseMatrix::Zero(nd, np);
    d.M = opts.mass ? DenseMatrix(DenseMatrix::Identity(nd, nd) + 0.1 * random_spd(rng, nd, 0.0))
                    : DenseMatrix::Identity(nd, nd);
    d.Q = random_spd(rng, nd, 0.5);
    d.W = opts.integrand ? random_spd(rng, nd, 0.5) : DenseMatrix::Zero(nd, nd);
    d.R = opts.integrand ? random_spd(rng, np, 0.5) : DenseMatrix::Zero(np, np);
    d.u0 = random_matrix(rng, nd, 1).col(0);
    d.c = random_matrix(rng, nd, 1).col(0);

    ProblemSetup &s = out->setup;
    s.name = "linear-test";
    DAEProblem &pr = s.problem;
    pr.dim_state = opts.dim_state;
    pr.dim_param = opts.dim_param;
    if (opts.mass) {
        pr.mass = MassMatrix::constant(Matrix(d.M));
    }
    const DenseMatrix A = d.A, B = d.B;
    pr.rhs = [A, B](const TimePoint &, const Vector &u, const Vector &p) -> Vector { return A * u + B * p; };
    pr.jac_state = [A](const TimePoint &, const Vector &, const Vector &) { return Matrix(A); };
    pr.jac_param = [B](const TimePoint &, const Vector &, const Vector &) { return Matrix(B); };
    pr.hess_uu = [nd](const TimePoint &, const Vector &, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(nd);
    };
    pr.hess_up = pr.hess_uu;
    pr.hess_pu = [np](const TimePoint &, const Vector &, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(np);
    };
    pr.hess_pp = pr.hess_pu;

    Objective &obj = s.objective;
    const DenseMatrix Q = d.Q;
    const Vector c = d.c;
    obj.terminal = [Q, c](const Vector &u, const Vector &) { return 0.5 * u.dot(Q * u) + c.dot(u); };
    obj.terminal_grad_state = [Q, c](const Vector &u, const Vector &) -> Vector { return Q * u + c; };
    obj.terminal_hess_uu = [Q](const Vector &, const Vector &, const Vector &w) -> Vector { return Q * w; };
    if (opts.integrand) {
        const DenseMatrix W = d.W, R = d.R;
        obj.integrand = [W, R](const TimePoint &, const Vector &u, const Vector &p) {
            return 0.5 * u.dot(W * u) + 0.5 * p.dot(R * p);
        };
        obj.integrand_grad_state = [W](const TimePoint &, const Vector &u, const Vector &) -> Vector {
            return W * u;
        };
        obj.integrand_grad_param = [R](const TimePoint &, const Vector &, const Vector &p) -> Vector {
            return R * p;
        };
        obj.integrand_hess_uu = [W](const TimePoint &, const Vector &, const Vector &, const Vector &w) -> Vector {
            return W * w;
        };
        obj.integrand_hess_pp = [R](const TimePoint &, const Vector &, const Vector &, const Vector &v) -> Vector {
            return R * v;
        };
        // No u-p coupling in r.
        obj.integrand_hess_up = [nd](const TimePoint &, const Vector &, const Vector &, const Vector &) -> Vector {
            return Vector::Zero(nd);
        };
        obj.integrand_hess_pu = [np](const TimePoint &, const Vector &, const Vector &, const Vector &) -> Vector {
            return Vector::Zero(np);
        };
    }

    const Vector u0 = d.u0;
    const DenseMatrix E = d.E;
    s.param_map.eta = [u0, E](const Vector &p) -> Vector { return u0 + E * p; };
    s.param_map.eta_jac = [E](const Vector &) { return E; };
    s.param_map.eta_hess_product = [np](const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(np);
    };

    s.config.method = opts.method;
    s.config.t0 = 0.0;
    s.config.tf = opts.tf;
    s.config.num_steps = opts.num_steps;
    s.target = HVPTarget::parameters;
    s.x0 = random_matrix(rng, np, 1).col(0);
    s.param = s.x0;
    s.bounds = Bounds::none(opts.dim_param);
    return out;
}

} // namespace adjts
