#include <adjts/errors.hpp>
#include <adjts/optimize.hpp>

#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace adjts
{

Bounds Bounds::none(std::size_t n)
{
    const auto ni = static_cast<Eigen::Index>(n);
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(ni, -inf), Vector::Constant(ni, inf)};
}

Bounds Bounds::box(Vector lower, Vector upper)
{
    Bounds b{std::move(lower), std::move(upper)};
    b.validate(b.size());
    return b;
}

Vector Bounds::project(const Vector &x) const
{
    return x.cwiseMax(lower).cwiseMin(upper);
}

void Bounds::validate(std::size_t n) const
{
    if (static_cast<std::size_t>(lower.size()) != n || static_cast<std::size_t>(upper.size()) != n) {
        throw ConfigurationError(fmt::format("bounds have sizes {}/{}, expected {}", lower.size(), upper.size(), n));
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= upper[i])) {
            throw ConfigurationError(fmt::format("lower bound exceeds upper bound at component {}", i));
        }
    }
}

std::vector<bool> Bounds::active_set(const Vector &x, const Vector &g) const
{
    std::vector<bool> active(static_cast<std::size_t>(x.size()), false);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        active[static_cast<std::size_t>(i)] = (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0);
    }
    return active;
}

Vector Bounds::projected_gradient(const Vector &x, const Vector &g) const
{
    return x - project(x - g);
}

std::optional<std::size_t> OptimizeResult::iterations_to(double tol) const
{
    for (const auto &h : history) {
        if (h.gradnorm <= tol) {
            return h.iter;
        }
    }
    return std::nullopt;
}

void write_history_csv(std::ostream &os, const std::vector<IterationRecord> &history)
{
    os << "iter,cost,gradnorm\n";
    for (const auto &h : history) {
        fmt::print(os, "{},{:.17g},{:.17g}\n", h.iter, h.cost, h.gradnorm);
    }
}

namespace
{

Vector masked(const Vector &v, const std::vector<bool> &active)
{
    Vector out = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (active[static_cast<std::size_t>(i)]) {
            out[i] = 0.0;
        }
    }
    return out;
}

// Shared state of both drivers: current iterate, evaluation bookkeeping and
// the projected Armijo search.
class Driver
{
public:
    Driver(const EvalFn &eval, const Vector &x0, const Bounds &bounds, const OptimizeOptions &opts)
        : m_eval(eval), m_bounds(bounds), m_opts(opts)
    {
        m_bounds.validate(static_cast<std::size_t>(x0.size()));
        res.x = m_bounds.project(x0);
        const CostGradient cg = evaluate(res.x);
        if (!std::isfinite(cg.cost) || !all_finite(cg.gradient)) {
            throw Error("objective is not finite at the starting point");
        }
        res.cost = cg.cost;
        res.gradient = cg.gradient;
        res.gradnorm = m_bounds.projected_gradient(res.x, res.gradient).norm();
        record(0);
    }

    CostGradient evaluate(const Vector &x)
    {
        ++res.evaluations;
        try {
            return m_eval(x);
        } catch (const Error &) {
            return {std::numeric_limits<double>::infinity(), Vector()};
        }
    }

    void record(std::size_t inner)
    {
        res.history.push_back({res.iterations, res.cost, res.gradnorm, inner});
        if (m_opts.on_iteration) {
            m_opts.on_iteration(res.iterations, res.cost, res.gradnorm);
        }
    }

    [[nodiscard]] bool done()
    {
        if (res.gradnorm <= m_opts.gtol) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            return true;
        }
        if (res.iterations >= m_opts.max_iter) {
            res.message = "iteration limit reached";
            return true;
        }
        return false;
    }

    // Projected backtracking from step 1 along d. Returns the number of
    // backtracks, or nullopt if no acceptable point was found.
    std::optional<std::size_t> line_search(const Vector &d, Vector &x_new, CostGradient &cg_new)
    {
        double alpha = 1.0;
        for (std::size_t k = 0; k <= m_opts.max_backtracks; ++k) {
            Vector trial = m_bounds.project(res.x + alpha * d);
            const double decrease = res.gradient.dot(trial - res.x);
            if (decrease < 0.0) {
                CostGradient cg = evaluate(trial);
                if (std::isfinite(cg.cost) && cg.cost <= res.cost + m_opts.armijo_c1 * decrease
                    && all_finite(cg.gradient)) {
                    x_new = std::move(trial);
                    cg_new = std::move(cg);
                    return k;
                }
            }
            alpha *= m_opts.backtrack;
        }
        return std::nullopt;
    }

    void accept(Vector x_new, CostGradient cg_new, std::size_t inner)
    {
        res.x = std::move(x_new);
        res.cost = cg_new.cost;
        res.gradient = std::move(cg_new.gradient);
        res.gradnorm = m_bounds.projected_gradient(res.x, res.gradient).norm();
        ++res.iterations;
        record(inner);
    }

    [[nodiscard]] const Bounds &bounds() const { return m_bounds; }
    [[nodiscard]] const OptimizeOptions &opts() const { return m_opts; }

    OptimizeResult res;

private:
    const EvalFn &m_eval;
    Bounds m_bounds;
    const OptimizeOptions &m_opts;
};

} // namespace

OptimizeResult lbfgs_minimize(const EvalFn &eval, const Vector &x0, const Bounds &bounds, const OptimizeOptions &opts)
{
    Driver drv(eval, x0, bounds, opts);
    auto &res = drv.res;
    struct Pair {
        Vector s;
        Vector y;
    };
    std::deque<Pair> pairs;

    while (!drv.done()) {
        const auto active = drv.bounds().active_set(res.x, res.gradient);
        const Vector g = masked(res.gradient, active);

        // Two-loop recursion on the free components.
        Vector q = g;
        std::vector<double> alphas(pairs.size(), 0.0);
        std::vector<double> rhos(pairs.size(), 0.0);
        double gamma = 0.0;
        for (std::size_t k = pairs.size(); k-- > 0;) {
            const Vector s = masked(pairs[k].s, active);
            const Vector y = masked(pairs[k].y, active);
            const double sy = s.dot(y);
            if (sy <= 1e-12 * s.norm() * y.norm()) {
                continue;
            }
            rhos[k] = 1.0 / sy;
            alphas[k] = rhos[k] * s.dot(q);
            q -= alphas[k] * y;
            if (gamma == 0.0) {
                gamma = sy / y.squaredNorm();
            }
        }
        Vector d;
        if (gamma > 0.0) {
            Vector r = gamma * q;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                if (rhos[k] == 0.0) {
                    continue;
                }
                const Vector s = masked(pairs[k].s, active);
                const Vector y = masked(pairs[k].y, active);
                const double beta = rhos[k] * y.dot(r);
                r += (alphas[k] - beta) * s;
            }
            d = -masked(r, active);
        } else {
            d = -g * std::min(1.0, 1.0 / std::max(g.norm(), std::numeric_limits<double>::min()));
        }
        if (d.dot(res.gradient) >= 0.0) {
            pairs.clear();
            d = -g * std::min(1.0, 1.0 / std::max(g.norm(), std::numeric_limits<double>::min()));
        }

        Vector x_new;
        CostGradient cg_new;
        auto bt = drv.line_search(d, x_new, cg_new);
        if (!bt && !pairs.empty()) {
            pairs.clear();
            d = -g * std::min(1.0, 1.0 / std::max(g.norm(), std::numeric_limits<double>::min()));
            bt = drv.line_search(d, x_new, cg_new);
        }
        if (!bt) {
            res.line_search_failed = true;
            res.message = "line search failed";
            break;
        }
        Pair pr{x_new - res.x, cg_new.gradient - res.gradient};
        if (pr.s.dot(pr.y) > 1e-12 * pr.s.norm() * pr.y.norm()) {
            pairs.push_back(std::move(pr));
            if (pairs.size() > opts.memory) {
                pairs.pop_front();
            }
        }
        drv.accept(std::move(x_new), std::move(cg_new), *bt);
    }
    return std::move(res);
}

OptimizeResult newton_minimize(const EvalFn &eval, const HessVecFn &hvp, const Vector &x0, const Bounds &bounds,
                               const OptimizeOptions &opts)
{
    Driver drv(eval, x0, bounds, opts);
    auto &res = drv.res;
    const auto n = static_cast<std::size_t>(x0.size());
    const std::size_t max_cg = opts.max_cg ? opts.max_cg : 2 * std::max<std::size_t>(n, 1);

    while (!drv.done()) {
        const auto active = drv.bounds().active_set(res.x, res.gradient);
        const Vector g = masked(res.gradient, active);
        const double gnorm = g.norm();
        const double eta = opts.cg_rtol ? *opts.cg_rtol : std::min(0.5, std::sqrt(gnorm));

        // CG on the free block of H d = -g.
        Vector d = Vector::Zero(g.size());
        Vector r = -g;
        Vector pdir = r;
        double rr = r.squaredNorm();
        std::size_t inner = 0;
        bool fallback = false;
        while (inner < max_cg && std::sqrt(rr) > eta * gnorm) {
            Vector Hp;
            try {
                Hp = masked(hvp(res.x, pdir), active);
            } catch (const Error &) {
                fallback = inner == 0;
                break;
            }
            ++res.hvp_evaluations;
            ++inner;
            const double curv = pdir.dot(Hp);
            if (!std::isfinite(curv) || curv <= 1e-14 * pdir.squaredNorm()) {
                fallback = inner == 1;
                break;
            }
            const double alpha = rr / curv;
            d += alpha * pdir;
            r -= alpha * Hp;
            const double rr_new = r.squaredNorm();
            pdir = r + (rr_new / rr) * pdir;
            rr = rr_new;
        }
        if (fallback || d.dot(res.gradient) >= 0.0) {
            res.cg_breakdown = true;
            d = -g * std::min(1.0, 1.0 / std::max(gnorm, std::numeric_limits<double>::min()));
        }

        Vector x_new;
        CostGradient cg_new;
        auto bt = drv.line_search(d, x_new, cg_new);
        if (!bt) {
            d = -g * std::min(1.0, 1.0 / std::max(gnorm, std::numeric_limits<double>::min()));
            bt = drv.line_search(d, x_new, cg_new);
            if (bt) {
                res.cg_breakdown = true;
            }
        }
        if (!bt) {
            res.line_search_failed = true;
            res.message = "line search failed";
            break;
        }
        drv.accept(std::move(x_new), std::move(cg_new), inner);
    }
    return std::move(res);
}

} // namespace adjts
