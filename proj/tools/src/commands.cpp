#include <adjts_cli/commands.hpp>

#include <adjts/checkpoint.hpp>
#include <adjts/errors.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/sensitivity.hpp>
#include <adjts/tlm.hpp>
#include <adjts/validation.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace adjts::cli
{

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Vector random_direction(Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector v(n);
    for (auto &x : v) {
        x = dist(rng);
    }
    return v;
}

// Evaluates fn over the inputs, concurrently when asked.
template <typename T, typename Fn>
std::vector<T> map_rows(const std::vector<double> &inputs, bool parallel, Fn fn)
{
    std::vector<T> out;
    out.reserve(inputs.size());
    if (!parallel) {
        for (double h : inputs) {
            out.push_back(fn(h));
        }
        return out;
    }
    std::vector<std::future<T>> futures;
    for (double h : inputs) {
        futures.push_back(std::async(std::launch::async, fn, h));
    }
    for (auto &f : futures) {
        out.push_back(f.get());
    }
    return out;
}

nlohmann::json to_json(const Vector &v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

void describe(nlohmann::json &summary, const ProblemSetup &s)
{
    summary["problem"] = s.name;
    summary["method"] = s.config.method.name();
    summary["steps"] = s.config.num_steps;
    summary["variables"] = s.num_variables();
}

} // namespace

double empirical_order(double h_prev, double e_prev, double h, double e)
{
    if (!(e_prev > 0.0) || !(e > 0.0) || h_prev == h) {
        return nan;
    }
    return std::log(e_prev / e) / std::log(h_prev / h);
}

ProblemOptions CommonOptions::problem_options() const
{
    ProblemOptions po;
    if (method) {
        po.method = Method::parse(*method);
    }
    po.num_steps = steps;
    po.grid = grid;
    po.D1 = D1;
    po.D2 = D2;
    po.gamma = gamma;
    po.kappa = kappa;
    return po;
}

StorageOptions CommonOptions::storage() const
{
    StorageOptions so;
    so.capacity = capacity;
    so.mode = parse_checkpoint_mode(mode);
    if (disk_dir) {
        so.disk_dir = *disk_dir;
    }
    return so;
}

CommandResult cmd_taylor_test(const CommonOptions &common, const TaylorOptions &opts)
{
    CommandResult res{"taylor-test"};
    const auto setup = make_problem(common.problem, common.problem_options());
    describe(res.summary, *setup);
    const Vector &x = setup->x0;
    const Vector dir = random_direction(x.size(), common.seed);
    const CostGradient cg = setup_gradient(*setup, x, common.storage());
    const double slope = dir.dot(cg.gradient);
    const auto costs =
        map_rows<double>(opts.h, common.parallel, [&](double h) { return setup_cost(*setup, x + h * dir); });

    res.table.columns = {"h", "first_order", "order_first", "remainder", "order_second", "remainder_over_h2"};
    for (std::size_t i = 0; i < opts.h.size(); ++i) {
        const double h = opts.h[i];
        const double first = std::abs(costs[i] - cg.cost);
        const double rem = std::abs(costs[i] - cg.cost - h * slope);
        double o1 = nan, o2 = nan;
        if (i > 0) {
            const double hp = opts.h[i - 1];
            o1 = empirical_order(hp, std::abs(costs[i - 1] - cg.cost), h, first);
            o2 = empirical_order(hp, std::abs(costs[i - 1] - cg.cost - hp * slope), h, rem);
            if (!(std::abs(o2 - 2.0) <= opts.order_tolerance)) {
                res.fail(fmt::format("second-order remainder order {:.4f} at h={} outside 2 +- {}", o2, h,
                                     opts.order_tolerance));
            }
        }
        res.table.add({h, first, o1, rem, o2, rem / (h * h)});
    }
    res.summary["cost"] = cg.cost;
    res.summary["directional_derivative"] = slope;
    try {
        res.summary["half_curvature"] = 0.5 * std::abs(dir.dot(setup_hvp(*setup, x, dir, common.storage())));
    } catch (const ConfigurationError &) {
        res.summary["half_curvature"] = nullptr;
    }
    return res;
}

CommandResult cmd_hvp_test(const CommonOptions &common, const HvpTestOptions &opts)
{
    CommandResult res{"hvp-test"};
    const auto setup = make_problem(common.problem, common.problem_options());
    describe(res.summary, *setup);
    const auto storage = common.storage();
    const Vector &x = setup->x0;
    const Eigen::Index n = x.size();
    const Vector sigma = opts.zero_direction ? Vector(Vector::Zero(n)) : random_direction(n, common.seed);
    const Vector H = setup_hvp(*setup, x, sigma, storage);
    const double scale = H.norm();

    const auto fd = map_rows<Vector>(opts.h, common.parallel, [&](double h) -> Vector {
        const Vector gp = setup_gradient(*setup, x + h * sigma, storage).gradient;
        const Vector gm = setup_gradient(*setup, x - h * sigma, storage).gradient;
        return (gp - gm) / (2.0 * h);
    });

    res.table.columns = {"h", "error", "rel_error", "order"};
    std::vector<double> errors;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < opts.h.size(); ++i) {
        const double err = (H - fd[i]).norm();
        const double rel = scale > 0.0 ? err / scale : err;
        max_rel = std::max(max_rel, rel);
        const double order = i > 0 ? empirical_order(opts.h[i - 1], errors.back(), opts.h[i], err) : nan;
        errors.push_back(err);
        res.table.add({opts.h[i], err, rel, order});
    }
    // Gradients linear in x make central differences exact up to round-off.
    const bool exact = max_rel <= 1e-7;
    res.summary["regime"] = exact ? "exact" : "order";
    if (!exact) {
        for (std::size_t i = 1; i < res.table.rows.size(); ++i) {
            const double o = std::get<double>(res.table.rows[i][3]);
            if (!(std::abs(o - 2.0) <= opts.order_tolerance)) {
                res.fail(fmt::format("HVP finite-difference order {:.4f} at h={} outside 2 +- {}", o, opts.h[i],
                                     opts.order_tolerance));
            }
        }
    }

    const Vector sigma2 = random_direction(n, common.seed + 1);
    const Vector H2 = setup_hvp(*setup, x, sigma2, storage);
    const double a = sigma2.dot(H), b = sigma.dot(H2);
    const double denom = std::max(std::abs(a), std::abs(b));
    const double sym = denom > 0.0 ? std::abs(a - b) / denom : 0.0;
    res.summary["hvp_norm"] = scale;
    res.summary["symmetry_residual"] = sym;
    if (!(sym <= opts.symmetry_tolerance)) {
        res.fail(fmt::format("symmetry residual {:.3e} exceeds {:.1e}", sym, opts.symmetry_tolerance));
    }
    return res;
}

CommandResult cmd_optimal_control(const CommonOptions &common, const OptimalControlOptions &opts)
{
    CommandResult res{"optimal-control"};
    ProblemOptions po = common.problem_options();
    po.intervals = opts.intervals;
    po.v_max = opts.v_max;
    po.on_leader = opts.on_leader;
    const auto setup = make_problem("aircraft", po);
    describe(res.summary, *setup);
    const auto storage = common.storage();

    const EvalFn eval = [&](const Vector &x) { return setup_gradient(*setup, x, storage); };
    const HessVecFn hvp = [&](const Vector &x, const Vector &s) { return setup_hvp(*setup, x, s, storage); };
    OptimizeOptions oo;
    oo.gtol = opts.gtol;
    oo.max_iter = opts.max_iter;

    const bool run_newton = opts.optimizer == "newton" || opts.optimizer == "both";
    const bool run_lbfgs = opts.optimizer == "lbfgs" || opts.optimizer == "both";
    if (!run_newton && !run_lbfgs) {
        throw ConfigurationError(fmt::format("unknown optimizer '{}'", opts.optimizer));
    }

    res.table.columns = {"optimizer", "iter", "cost", "gradnorm", "inner"};
    std::optional<OptimizeResult> newton, lbfgs;
    auto report = [&](const std::string &name, const OptimizeResult &r) {
        for (const auto &h : r.history) {
            res.table.add({name, static_cast<long long>(h.iter), h.cost, h.gradnorm, static_cast<long long>(h.inner)});
        }
        for (std::size_t k = 1; k < r.history.size(); ++k) {
            if (r.history[k].cost > r.history[k - 1].cost) {
                res.fail(fmt::format("{} cost increased at iteration {}", name, k));
            }
        }
        const auto reach = r.iterations_to(opts.compare_tol);
        nlohmann::json j = {{"iterations", r.iterations},
                            {"converged", r.converged},
                            {"message", r.message},
                            {"final_cost", r.cost},
                            {"gradnorm", r.gradnorm},
                            {"evaluations", r.evaluations},
                            {"hvp_evaluations", r.hvp_evaluations},
                            {"iterations_to_compare_tol", reach ? nlohmann::json(*reach) : nlohmann::json(nullptr)}};
        const auto &h = r.history;
        if (h.size() >= 3) {
            const std::size_t k = h.size() - 1;
            j["tail_ratios"] = {h[k - 1].gradnorm / h[k - 2].gradnorm, h[k].gradnorm / h[k - 1].gradnorm};
        }
        res.summary[name] = j;
    };
    if (run_newton) {
        newton = newton_minimize(eval, hvp, setup->x0, setup->bounds, oo);
        report("newton", *newton);
    }
    if (run_lbfgs) {
        lbfgs = lbfgs_minimize(eval, setup->x0, setup->bounds, oo);
        report("lbfgs", *lbfgs);
    }

    const OptimizeResult &best = newton ? *newton : *lbfgs;
    const auto K = static_cast<Eigen::Index>(opts.intervals);
    res.summary["controls"] = {{"v", to_json(best.x.head(K))}, {"heading", to_json(best.x.tail(K))}};
    auto active = nlohmann::json::array();
    for (Eigen::Index i = 0; i < best.x.size(); ++i) {
        const std::string name = i < K ? fmt::format("v_{}", i) : fmt::format("heading_{}", i - K);
        if (best.x[i] <= setup->bounds.lower[i]) {
            active.push_back(name + "=lower");
        } else if (best.x[i] >= setup->bounds.upper[i]) {
            active.push_back(name + "=upper");
        }
    }
    res.summary["active_bounds"] = active;

    if (newton && lbfgs) {
        const auto nn = newton->iterations_to(opts.compare_tol);
        const auto nl = lbfgs->iterations_to(opts.compare_tol);
        const bool both_trivial = nn && nl && *nn == 0 && *nl == 0;
        if (!both_trivial && !(nn && (!nl || *nn < *nl))) {
            res.fail(fmt::format("Newton did not reach {} in fewer iterations than L-BFGS", opts.compare_tol));
        }
    }
    return res;
}

CommandResult cmd_grayscott_invert(const CommonOptions &common, const InvertOptions &opts)
{
    CommandResult res{"grayscott-invert"};
    GrayScottOptions g;
    if (common.method) {
        g.method = Method::parse(*common.method);
    }
    g.num_steps = common.steps.value_or(g.num_steps);
    g.grid = common.grid.value_or(g.grid);
    g.D1 = common.D1.value_or(g.D1);
    g.D2 = common.D2.value_or(g.D2);
    g.gamma = common.gamma.value_or(g.gamma);
    g.kappa = common.kappa.value_or(g.kappa);
    g.perturbation = opts.perturbation;
    const auto gs = make_grayscott(g);
    const ProblemSetup &s = gs->setup;
    describe(res.summary, s);
    res.summary["grid"] = g.grid;
    const auto storage = common.storage();

    // Forward and adjoint wall times at the starting guess, best of three.
    GradientReport full;
    double fwd = std::numeric_limits<double>::infinity(), adj = fwd;
    for (int r = 0; r < 3; ++r) {
        full = compute_gradient(s.problem, s.objective, s.param_map, s.config, s.param, s.target);
        fwd = std::min(fwd, full.forward_seconds);
        adj = std::min(adj, full.adjoint_seconds);
    }
    const double ratio = adj / fwd;
    res.summary["forward_seconds"] = fwd;
    res.summary["adjoint_seconds"] = adj;
    res.summary["adjoint_forward_ratio"] = ratio;
    if (s.config.method.is_implicit() && !(ratio < opts.ratio_limit)) {
        res.fail(fmt::format("adjoint/forward time ratio {:.3f} not below {}", ratio, opts.ratio_limit));
    }

    if (common.capacity) {
        const auto capped = compute_gradient(s.problem, s.objective, s.param_map, s.config, s.param, s.target, storage);
        const bool equal = capped.gradient.size() == full.gradient.size() && capped.gradient == full.gradient;
        res.summary["capacity"] = *common.capacity;
        res.summary["checkpoint_mode"] = common.mode;
        res.summary["recomputations"] = capped.recomputations;
        res.summary["gradient_bitwise_equal"] = equal;
        if (!equal) {
            res.fail("gradient under the checkpoint budget differs from the full-storage gradient");
        }
    }

    OptimizeOptions oo;
    oo.gtol = opts.gtol;
    oo.max_iter = opts.max_iter;
    const auto r = lbfgs_minimize([&](const Vector &x) { return setup_gradient(s, x, storage); }, s.x0, s.bounds, oo);
    res.table.columns = {"iter", "cost", "gradnorm"};
    for (const auto &h : r.history) {
        res.table.add({static_cast<long long>(h.iter), h.cost, h.gradnorm});
    }
    const double initial = r.history.front().cost;
    const double reduction = r.cost > 0.0 ? initial / r.cost : std::numeric_limits<double>::infinity();
    res.summary["initial_cost"] = initial;
    res.summary["final_cost"] = r.cost;
    res.summary["cost_reduction"] = std::isfinite(reduction) ? nlohmann::json(reduction) : nlohmann::json("inf");
    res.summary["iterations"] = r.iterations;
    res.summary["converged"] = r.converged;
    res.summary["message"] = r.message;
    res.summary["initial_condition_rel_error"] =
        (r.x - gs->reference_initial).norm() / gs->reference_initial.norm();
    if (initial == 0.0) {
        if (r.iterations != 0) {
            res.fail("zero initial misfit should converge at iteration 0");
        }
    } else if (!(reduction >= opts.min_reduction)) {
        res.fail(fmt::format("cost reduction {:.3g} below {:.3g}", reduction, opts.min_reduction));
    }
    return res;
}

CommandResult cmd_revolve_stats(const CommonOptions &common, const RevolveOptions &opts)
{
    CommandResult res{"revolve-stats"};
    struct Curve {
        std::size_t capacity;
        CheckpointMode mode;
        std::size_t stages;
    };
    std::vector<Curve> curves = {{opts.units, CheckpointMode::solution_only, 0},
                                 {opts.units / 3, CheckpointMode::solution_and_stages, 2},
                                 {opts.units / 4, CheckpointMode::solution_and_stages, 3}};
    if (common.capacity) {
        const CheckpointMode m = parse_checkpoint_mode(common.mode);
        curves.push_back({*common.capacity, m, 0});
    }

    res.table.columns = {"N", "capacity", "mode", "stages", "recomputations"};
    std::vector<std::vector<std::size_t>> counts(curves.size());
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const Curve &cv = curves[c];
        if (cv.capacity == 0) {
            throw ConfigurationError("revolve-stats needs at least one checkpoint per curve");
        }
        for (std::size_t N = opts.min_steps; N <= opts.max_steps; ++N) {
            const auto sched = plan_schedule(N, cv.capacity, cv.mode);
            try {
                validate_schedule(sched);
            } catch (const ContractViolation &e) {
                res.fail(fmt::format("invalid schedule N={} s={}: {}", N, cv.capacity, e.what()));
            }
            const std::size_t count = count_recomputations(sched);
            if (count != sched.predicted_recomputations) {
                res.fail(fmt::format("simulated count {} differs from prediction {} at N={}", count,
                                     sched.predicted_recomputations, N));
            }
            if (cv.mode == CheckpointMode::solution_only && count != binomial_recomputations(N, cv.capacity)) {
                res.fail(fmt::format("count {} differs from the binomial formula at N={} s={}", count, N,
                                     cv.capacity));
            }
            if (cv.mode == CheckpointMode::solution_and_stages && N <= cv.capacity && count != 0) {
                res.fail(fmt::format("N={} fits in {} checkpoints but needs {} recomputations", N, cv.capacity,
                                     count));
            }
            if (!counts[c].empty() && count < counts[c].back()) {
                res.fail(fmt::format("recomputations decrease from N={} to N={}", N - 1, N));
            }
            counts[c].push_back(count);
            res.table.add({static_cast<long long>(N), static_cast<long long>(cv.capacity), to_string(cv.mode),
                           static_cast<long long>(cv.stages), static_cast<long long>(count)});
        }
    }

    // Which of the three unit-equivalent curves is cheapest, and where that changes.
    auto crossovers = nlohmann::json::array();
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < counts[0].size(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c) {
            if (counts[c][i] < counts[best][i]) {
                best = c;
            }
        }
        if (prev && *prev != best) {
            crossovers.push_back({{"N", opts.min_steps + i}, {"from_curve", *prev}, {"to_curve", best}});
        }
        prev = best;
    }
    res.summary["units"] = opts.units;
    res.summary["crossovers"] = crossovers;
    const auto fig_sol = count_recomputations(plan_schedule(10, 3, CheckpointMode::solution_only));
    const auto fig_stg = count_recomputations(plan_schedule(10, 3, CheckpointMode::solution_and_stages));
    res.summary["N10_s3_solution_only"] = fig_sol;
    res.summary["N10_s3_solution_and_stages"] = fig_stg;
    if (fig_sol != 15 || fig_stg != 6) {
        res.fail(fmt::format("N=10, s=3 counts are {} / {}, expected 15 / 6", fig_sol, fig_stg));
    }
    return res;
}

CommandResult cmd_integrate(const CommonOptions &common)
{
    CommandResult res{"integrate"};
    const auto setup = make_problem(common.problem, common.problem_options());
    describe(res.summary, *setup);
    const Vector &x = setup->x0;
    const auto out = integrate(setup->problem, setup->objective, setup->param_map_for(x), setup->config,
                               setup->param_for(x), true);
    const auto &traj = out.trajectory;
    res.table.columns = {"step", "time"};
    for (std::size_t i = 0; i < setup->problem.dim_state; ++i) {
        res.table.columns.push_back(fmt::format("u{}", i));
    }
    std::size_t newton_iters = 0;
    for (const auto &rec : traj.records) {
        newton_iters += rec.newton.iterations;
    }
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        std::vector<Cell> row{static_cast<long long>(n), traj.times[n]};
        for (double v : traj.states[n]) {
            row.emplace_back(v);
        }
        res.table.add(std::move(row));
    }
    res.summary["cost"] = out.cost;
    res.summary["terminal"] = out.terminal;
    res.summary["integral"] = out.integral;
    res.summary["final_state_norm"] = traj.final_state().norm();
    res.summary["newton_iterations"] = newton_iters;
    return res;
}

CommandResult cmd_gradient(const CommonOptions &common, bool with_tlm)
{
    CommandResult res{"gradient"};
    const auto setup = make_problem(common.problem, common.problem_options());
    describe(res.summary, *setup);
    const Vector &x = setup->x0;
    const auto rep = compute_gradient(setup->problem, setup->objective, setup->param_map_for(x), setup->config,
                                      setup->param_for(x), setup->target, common.storage());
    std::optional<Vector> tlm;
    if (with_tlm) {
        if (setup->target != HVPTarget::parameters) {
            throw ConfigurationError("the TLM comparison needs a parameter-target problem");
        }
        tlm = tlm_gradient(setup->problem, setup->objective, setup->param_map, setup->config, x).gradient;
    }
    res.table.columns = {"index", "gradient"};
    if (tlm) {
        res.table.columns.push_back("tlm");
    }
    for (Eigen::Index i = 0; i < rep.gradient.size(); ++i) {
        std::vector<Cell> row{static_cast<long long>(i), rep.gradient[i]};
        if (tlm) {
            row.emplace_back((*tlm)[i]);
        }
        res.table.add(std::move(row));
    }
    res.summary["cost"] = rep.cost;
    res.summary["gradient_norm"] = rep.gradient.norm();
    res.summary["recomputations"] = rep.recomputations;
    res.summary["predicted_recomputations"] = rep.predicted_recomputations;
    res.summary["peak_checkpoints"] = rep.peak_checkpoints;
    res.summary["forward_seconds"] = rep.forward_seconds;
    res.summary["adjoint_seconds"] = rep.adjoint_seconds;
    if (tlm) {
        const double denom = std::max(rep.gradient.norm(), std::numeric_limits<double>::min());
        res.summary["tlm_rel_difference"] = (*tlm - rep.gradient).norm() / denom;
    }
    return res;
}

CommandResult cmd_validate(const CommonOptions &common, const ValidateOptions &opts)
{
    CommandResult res{"validate"};
    const auto setup = make_problem(common.problem, common.problem_options());
    describe(res.summary, *setup);
    const Vector &x = setup->x0;
    const Vector p = setup->param_for(x);
    const Vector u = setup->param_map_for(x).initial_state(p);
    const auto report = validate_derivatives(setup->problem, setup->objective, TimePoint{setup->config.t0, 0}, u,
                                             p, opts.tolerance);
    res.table.columns = {"callback", "max_rel_discrepancy", "passed", "note"};
    for (const auto &e : report.entries) {
        res.table.add({e.callback, e.max_rel_discrepancy, std::string(e.passed ? "yes" : "no"), e.note});
        if (!e.passed) {
            res.fail(fmt::format("{}: discrepancy {:.3e} {}", e.callback, e.max_rel_discrepancy, e.note));
        }
    }
    res.summary["max_discrepancy"] = report.max_discrepancy();
    return res;
}

} // namespace adjts::cli
