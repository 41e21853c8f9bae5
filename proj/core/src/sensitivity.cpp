#include <adjts/sensitivity.hpp>

#include <chrono>

namespace adjts
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

GradientReport compute_gradient(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                                const StepperConfig &config, const Vector &p, HVPTarget target,
                                const StorageOptions &storage)
{
    require_first_order(problem, objective);
    const Stepper stepper(problem, objective, config, p);
    StepProvider provider(stepper, param_map.initial_state(p), storage);

    GradientReport rep;
    auto t0 = Clock::now();
    const double q = provider.run_forward();
    rep.final_state = provider.final_state();
    rep.cost = evaluate_cost(objective, rep.final_state, p, q);
    rep.forward_seconds = seconds_since(t0);

    t0 = Clock::now();
    auto adj = solve_adjoint(stepper, provider);
    rep.adjoint_seconds = seconds_since(t0);

    rep.gradient =
        target == HVPTarget::initial_condition ? adj.lambda0 : assemble_gradient(param_map, p, adj.lambda0, adj.mu0);
    rep.lambda0 = std::move(adj.lambda0);
    rep.mu0 = std::move(adj.mu0);
    rep.recomputations = provider.recomputations();
    rep.predicted_recomputations = provider.schedule().predicted_recomputations;
    rep.peak_checkpoints = provider.peak_checkpoints();
    return rep;
}

HVPReport compute_hvp(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                      const StepperConfig &config, const Vector &p, const Vector &sigma, HVPTarget target,
                      const StorageOptions &storage)
{
    require_second_order(problem, objective);
    const Stepper stepper(problem, objective, config, p);
    const HVPDirections dirs = hvp_directions(param_map, p, sigma, target, problem.dim_state);
    StepProvider provider(stepper, param_map.initial_state(p), storage, TangentSeed{dirs.v1, dirs.v2});

    HVPReport rep;
    auto t0 = Clock::now();
    const double q = provider.run_forward();
    rep.cost = evaluate_cost(objective, provider.final_state(), p, q);
    rep.forward_seconds = seconds_since(t0);

    t0 = Clock::now();
    auto res = solve_hvp_sweep(stepper, param_map, provider, dirs, sigma, target);
    rep.adjoint_seconds = seconds_since(t0);

    rep.hvp = std::move(res.hvp);
    rep.gradient = std::move(res.gradient);
    rep.recomputations = provider.recomputations();
    rep.predicted_recomputations = provider.schedule().predicted_recomputations;
    return rep;
}

double evaluate_objective(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                          const StepperConfig &config, const Vector &p)
{
    return integrate(problem, objective, param_map, config, p, false).cost;
}

} // namespace adjts
