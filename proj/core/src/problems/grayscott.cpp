#include <adjts/errors.hpp>
#include <adjts/problems/grayscott.hpp>

#include <cmath>
#include <numbers>

namespace adjts
{

namespace
{

struct Grid {
    Eigen::Index n;
    double inv_dx2;

    [[nodiscard]] Eigen::Index node(Eigen::Index i, Eigen::Index j) const
    {
        return ((i + n) % n) * n + (j + n) % n;
    }
};

} // namespace

DAEProblem grayscott_dynamics(const GrayScottOptions &opts)
{
    if (opts.grid < 3) {
        throw ConfigurationError("grayscott grid must be at least 3x3");
    }
    const auto n = static_cast<Eigen::Index>(opts.grid);
    const double dx = 2.0 / static_cast<double>(n);
    const Grid g{n, 1.0 / (dx * dx)};
    const double D1 = opts.D1, D2 = opts.D2, gam = opts.gamma, kap = opts.kappa;

    DAEProblem pr;
    pr.dim_state = static_cast<std::size_t>(2 * n * n);
    pr.dim_param = 0;
    pr.rhs = [g, D1, D2, gam, kap](const TimePoint &, const Vector &U, const Vector &) -> Vector {
        Vector F(U.size());
        for (Eigen::Index i = 0; i < g.n; ++i) {
            for (Eigen::Index j = 0; j < g.n; ++j) {
                const Eigen::Index k = g.node(i, j);
                const Eigen::Index nb[4] = {g.node(i - 1, j), g.node(i + 1, j), g.node(i, j - 1), g.node(i, j + 1)};
                const double u = U[2 * k], v = U[2 * k + 1];
                double lu = -4.0 * u, lv = -4.0 * v;
                for (Eigen::Index m : nb) {
                    lu += U[2 * m];
                    lv += U[2 * m + 1];
                }
                const double uvv = u * v * v;
                F[2 * k] = D1 * g.inv_dx2 * lu - uvv + gam * (1.0 - u);
                F[2 * k + 1] = D2 * g.inv_dx2 * lv + uvv - (gam + kap) * v;
            }
        }
        return F;
    };
    pr.jac_state = [g, D1, D2, gam, kap](const TimePoint &, const Vector &U, const Vector &) {
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(U.size()) * 6);
        const double cu = D1 * g.inv_dx2, cv = D2 * g.inv_dx2;
        for (Eigen::Index i = 0; i < g.n; ++i) {
            for (Eigen::Index j = 0; j < g.n; ++j) {
                const Eigen::Index k = g.node(i, j);
                const Eigen::Index nb[4] = {g.node(i - 1, j), g.node(i + 1, j), g.node(i, j - 1), g.node(i, j + 1)};
                const double u = U[2 * k], v = U[2 * k + 1];
                const Eigen::Index ru = 2 * k, rv = 2 * k + 1;
                t.emplace_back(ru, ru, -4.0 * cu - v * v - gam);
                t.emplace_back(ru, rv, -2.0 * u * v);
                t.emplace_back(rv, ru, v * v);
                t.emplace_back(rv, rv, -4.0 * cv + 2.0 * u * v - (gam + kap));
                for (Eigen::Index m : nb) {
                    t.emplace_back(ru, 2 * m, cu);
                    t.emplace_back(rv, 2 * m + 1, cv);
                }
            }
        }
        const auto dim = static_cast<std::size_t>(U.size());
        return Matrix::from_triplets(dim, dim, t);
    };
    pr.jac_param = [](const TimePoint &, const Vector &U, const Vector &) {
        return Matrix(DenseMatrix::Zero(U.size(), 0));
    };
    // Only the reaction terms are nonlinear.
    pr.hess_uu = [](const TimePoint &, const Vector &U, const Vector &, const Vector &lam,
                    const Vector &w) -> Vector {
        Vector out(U.size());
        for (Eigen::Index k = 0; k < U.size() / 2; ++k) {
            const double u = U[2 * k], v = U[2 * k + 1];
            const double dl = lam[2 * k + 1] - lam[2 * k];
            const double wu = w[2 * k], wv = w[2 * k + 1];
            out[2 * k] = dl * 2.0 * v * wv;
            out[2 * k + 1] = dl * (2.0 * v * wu + 2.0 * u * wv);
        }
        return out;
    };
    pr.hess_up = [](const TimePoint &, const Vector &U, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(U.size());
    };
    pr.hess_pu = [](const TimePoint &, const Vector &, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector();
    };
    pr.hess_pp = pr.hess_pu;
    return pr;
}

Vector grayscott_reference_initial(std::size_t grid)
{
    const auto n = static_cast<Eigen::Index>(grid);
    const double dx = 2.0 / static_cast<double>(n);
    Vector U(2 * n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * dx;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double y = static_cast<double>(j) * dx;
            double v = 0.0;
            if (x >= 1.0 && x <= 1.5 && y >= 1.0 && y <= 1.5) {
                const double sx = std::sin(4.0 * std::numbers::pi * x);
                const double cy = std::cos(4.0 * std::numbers::pi * y);
                v = sx * sx * cy * cy / 4.0;
            }
            const Eigen::Index k = i * n + j;
            U[2 * k] = 1.0 - 2.0 * v;
            U[2 * k + 1] = v;
        }
    }
    return U;
}

std::unique_ptr<GrayScottProblem> make_grayscott(const GrayScottOptions &opts)
{
    auto out = std::make_unique<GrayScottProblem>();
    ProblemSetup &s = out->setup;
    s.name = "grayscott";
    s.problem = grayscott_dynamics(opts);
    s.config.method = opts.method;
    s.config.t0 = 0.0;
    s.config.tf = opts.tf;
    s.config.num_steps = opts.num_steps;
    s.param = Vector();
    s.target = HVPTarget::initial_condition;

    out->reference_initial = grayscott_reference_initial(opts.grid);
    StepperConfig obs_config = s.config;
    if (opts.observation_method) {
        obs_config.method = *opts.observation_method;
    }
    out->observation = integrate(s.problem, Objective{}, ParamMap::fixed(out->reference_initial), obs_config,
                                 s.param, false)
                           .trajectory.final_state();

    const Vector obs = out->observation;
    s.objective.terminal = [obs](const Vector &U, const Vector &) { return (U - obs).squaredNorm(); };
    s.objective.terminal_grad_state = [obs](const Vector &U, const Vector &) -> Vector { return 2.0 * (U - obs); };
    s.objective.terminal_hess_uu = [](const Vector &, const Vector &, const Vector &w) -> Vector { return 2.0 * w; };

    const auto n = static_cast<Eigen::Index>(opts.grid);
    const double dx = 2.0 / static_cast<double>(n);
    s.x0 = out->reference_initial;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double x = static_cast<double>(i) * dx, y = static_cast<double>(j) * dx;
            const double bump = std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
            const Eigen::Index k = i * n + j;
            s.x0[2 * k] += opts.perturbation * bump;
            s.x0[2 * k + 1] += 0.5 * opts.perturbation * bump * bump;
        }
    }
    s.param_map = ParamMap::fixed(s.x0);
    s.bounds = Bounds::none(static_cast<std::size_t>(s.x0.size()));
    return out;
}

} // namespace adjts
