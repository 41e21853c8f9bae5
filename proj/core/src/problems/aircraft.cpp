#include <adjts/errors.hpp>
#include <adjts/problems/aircraft.hpp>

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace adjts
{

std::size_t aircraft_interval(std::size_t step, std::size_t num_steps, std::size_t intervals)
{
    return std::min(intervals - 1, step * intervals / num_steps);
}

std::unique_ptr<ProblemSetup> make_aircraft(const AircraftOptions &opts)
{
    const std::size_t K = opts.intervals;
    const std::size_t N = opts.num_steps;
    if (K == 0 || N == 0 || N % K != 0) {
        throw ConfigurationError(fmt::format("aircraft needs steps ({}) divisible by intervals ({})", N, K));
    }
    auto s = std::make_unique<ProblemSetup>();
    s->name = "aircraft";
    DAEProblem &pr = s->problem;
    pr.dim_state = 2;
    pr.dim_param = 2 * K;

    const auto Ki = static_cast<Eigen::Index>(K);
    auto index = [K, N](const TimePoint &t) { return static_cast<Eigen::Index>(aircraft_interval(t.step, N, K)); };

    pr.rhs = [index, Ki](const TimePoint &t, const Vector &, const Vector &p) -> Vector {
        const Eigen::Index k = index(t);
        const double v = p[k], w = p[Ki + k];
        return Vector{{v * std::cos(w), v * std::sin(w)}};
    };
    pr.jac_state = [](const TimePoint &, const Vector &, const Vector &) { return Matrix(DenseMatrix::Zero(2, 2)); };
    pr.jac_param = [index, Ki](const TimePoint &t, const Vector &, const Vector &p) {
        const Eigen::Index k = index(t);
        const double v = p[k], w = p[Ki + k];
        DenseMatrix J = DenseMatrix::Zero(2, 2 * Ki);
        J(0, k) = std::cos(w);
        J(1, k) = std::sin(w);
        J(0, Ki + k) = -v * std::sin(w);
        J(1, Ki + k) = v * std::cos(w);
        return Matrix(std::move(J));
    };
    pr.hess_uu = [](const TimePoint &, const Vector &, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(2);
    };
    pr.hess_up = pr.hess_uu;
    pr.hess_pu = [Ki](const TimePoint &, const Vector &, const Vector &, const Vector &, const Vector &) -> Vector {
        return Vector::Zero(2 * Ki);
    };
    pr.hess_pp = [index, Ki](const TimePoint &t, const Vector &, const Vector &p, const Vector &lam,
                             const Vector &sig) -> Vector {
        const Eigen::Index k = index(t);
        const double v = p[k], w = p[Ki + k];
        const double cross = -lam[0] * std::sin(w) + lam[1] * std::cos(w);
        const double ww = -v * (lam[0] * std::cos(w) + lam[1] * std::sin(w));
        Vector out = Vector::Zero(2 * Ki);
        out[k] = cross * sig[Ki + k];
        out[Ki + k] = cross * sig[k] + ww * sig[Ki + k];
        return out;
    };

    Objective &obj = s->objective;
    auto gap = [](const TimePoint &t, const Vector &u) -> Vector { return u - Vector::Constant(2, t.t); };
    obj.integrand = [gap](const TimePoint &t, const Vector &u, const Vector &) { return gap(t, u).squaredNorm(); };
    obj.integrand_grad_state = [gap](const TimePoint &t, const Vector &u, const Vector &) -> Vector {
        return 2.0 * gap(t, u);
    };
    obj.integrand_hess_uu = [](const TimePoint &, const Vector &, const Vector &, const Vector &w) -> Vector {
        return 2.0 * w;
    };

    Vector start = opts.start.size() == 2 ? opts.start : Vector{{1.5, 0.0}};
    double v0 = opts.v_init, w0 = opts.heading_init;
    if (opts.on_leader) {
        start = Vector::Zero(2);
        v0 = std::numbers::sqrt2;
        w0 = std::numbers::pi / 4.0;
    }
    s->param_map = ParamMap::fixed(start);

    s->config.method = opts.method;
    s->config.t0 = 0.0;
    s->config.tf = opts.tf;
    s->config.num_steps = N;
    s->target = HVPTarget::parameters;
    s->x0.resize(2 * Ki);
    s->x0.head(Ki).setConstant(v0);
    s->x0.tail(Ki).setConstant(w0);
    s->param = s->x0;
    Vector lo(2 * Ki), hi(2 * Ki);
    lo.head(Ki).setZero();
    hi.head(Ki).setConstant(opts.v_max);
    lo.tail(Ki).setConstant(-std::numbers::pi);
    hi.tail(Ki).setConstant(std::numbers::pi);
    s->bounds = Bounds::box(std::move(lo), std::move(hi));
    return s;
}

} // namespace adjts
