#include <adjts/errors.hpp>
#include <adjts/problems/aircraft.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/problems/linear_test.hpp>
#include <adjts/problems/registry.hpp>
#include <adjts/sensitivity.hpp>

#include <fmt/format.h>

namespace adjts
{

Vector ProblemSetup::param_for(const Vector &x) const
{
    return target == HVPTarget::initial_condition ? param : x;
}

ParamMap ProblemSetup::param_map_for(const Vector &x) const
{
    return target == HVPTarget::initial_condition ? ParamMap::fixed(x) : param_map;
}

double setup_cost(const ProblemSetup &s, const Vector &x)
{
    return evaluate_objective(s.problem, s.objective, s.param_map_for(x), s.config, s.param_for(x));
}

CostGradient setup_gradient(const ProblemSetup &s, const Vector &x, const StorageOptions &storage)
{
    auto rep =
        compute_gradient(s.problem, s.objective, s.param_map_for(x), s.config, s.param_for(x), s.target, storage);
    return {rep.cost, std::move(rep.gradient)};
}

Vector setup_hvp(const ProblemSetup &s, const Vector &x, const Vector &sigma, const StorageOptions &storage)
{
    return compute_hvp(s.problem, s.objective, s.param_map_for(x), s.config, s.param_for(x), sigma, s.target,
                       storage)
        .hvp;
}

std::vector<std::string> problem_names()
{
    return {"aircraft", "grayscott", "linear-test"};
}

std::unique_ptr<ProblemSetup> make_problem(const std::string &name, const ProblemOptions &opts)
{
    if (name == "aircraft") {
        AircraftOptions a;
        if (opts.method) {
            a.method = *opts.method;
        }
        if (opts.num_steps) {
            a.num_steps = *opts.num_steps;
        }
        if (opts.intervals) {
            a.intervals = *opts.intervals;
        }
        if (opts.v_max) {
            a.v_max = *opts.v_max;
        }
        a.on_leader = opts.on_leader;
        return make_aircraft(a);
    }
    if (name == "grayscott") {
        GrayScottOptions g;
        if (opts.method) {
            g.method = *opts.method;
        }
        if (opts.num_steps) {
            g.num_steps = *opts.num_steps;
        }
        if (opts.grid) {
            g.grid = *opts.grid;
        }
        if (opts.perturbation) {
            g.perturbation = *opts.perturbation;
        }
        g.D1 = opts.D1.value_or(g.D1);
        g.D2 = opts.D2.value_or(g.D2);
        g.gamma = opts.gamma.value_or(g.gamma);
        g.kappa = opts.kappa.value_or(g.kappa);
        auto gs = make_grayscott(g);
        return std::make_unique<ProblemSetup>(std::move(gs->setup));
    }
    if (name == "linear-test") {
        LinearTestOptions l;
        l.integrand = true;
        if (opts.method) {
            l.method = *opts.method;
        }
        if (opts.num_steps) {
            l.num_steps = *opts.num_steps;
        }
        auto lt = make_linear_test(l);
        return std::make_unique<ProblemSetup>(std::move(lt->setup));
    }
    throw ConfigurationError(fmt::format("unknown problem '{}'", name));
}

} // namespace adjts
