#include <adjts/errors.hpp>
#include <adjts_cli/commands.hpp>

#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

using namespace adjts::cli;

namespace
{

void add_common(CLI::App *sub, CommonOptions &c, bool problem_flag)
{
    if (problem_flag) {
        sub->add_option("--problem", c.problem, "Registered problem: aircraft, grayscott, linear-test")
            ->check(CLI::IsMember(adjts::problem_names()));
    }
    sub->add_option("--method", c.method, "theta1, theta0.5, thetaX or rk4");
    sub->add_option("--steps", c.steps, "Number of time steps");
    sub->add_option("--grid", c.grid, "Gray-Scott grid size n (n x n)");
    sub->add_option("--capacity", c.capacity, "Checkpoint slots (default: store everything)");
    sub->add_option("--mode", c.mode, "Checkpoint contents: sol or sol+stages");
    sub->add_option("--disk", c.disk_dir, "Keep checkpoints in files under this directory");
    sub->add_option("--seed", c.seed, "Seed for random directions");
    sub->add_flag("--parallel", c.parallel, "Evaluate table rows concurrently");
    sub->add_option("--D1", c.D1, "Gray-Scott diffusion of u");
    sub->add_option("--D2", c.D2, "Gray-Scott diffusion of v");
    sub->add_option("--gamma", c.gamma, "Gray-Scott feed rate");
    sub->add_option("--kappa", c.kappa, "Gray-Scott kill rate");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Discrete adjoint sensitivities for time-dependent problems"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_file;
    bool json = false;
    app.add_option("--out", out_file, "Write the result table as CSV")->expected(1);
    app.add_flag("--json", json, "Print the result as JSON");

    CommonOptions common;
    TaylorOptions taylor;
    HvpTestOptions hvp;
    OptimalControlOptions oc;
    InvertOptions inv;
    RevolveOptions rev;
    ValidateOptions val;
    bool with_tlm = false;
    std::function<CommandResult()> run;

    auto *t = app.add_subcommand("taylor-test", "Taylor remainder convergence of the adjoint gradient");
    add_common(t, common, true);
    t->add_option("--h-list", taylor.h, "Perturbation sizes")->expected(1, -1);
    t->add_option("--order-tolerance", taylor.order_tolerance, "Allowed deviation from order 2");
    t->callback([&] { run = [&] { return cmd_taylor_test(common, taylor); }; });

    auto *h = app.add_subcommand("hvp-test", "Hessian-vector product against finite differences of the gradient");
    add_common(h, common, true);
    h->add_option("--h-list", hvp.h, "Finite-difference steps")->expected(1, -1);
    h->add_option("--order-tolerance", hvp.order_tolerance, "Allowed deviation from order 2");
    h->add_flag("--zero-direction", hvp.zero_direction, "Use sigma = 0");
    h->callback([&] { run = [&] { return cmd_hvp_test(common, hvp); }; });

    auto *o = app.add_subcommand("optimal-control", "Aircraft tracking problem: L-BFGS and Newton-CG");
    add_common(o, common, false);
    o->add_option("--intervals", oc.intervals, "Control intervals K");
    o->add_option("--optimizer", oc.optimizer, "lbfgs, newton or both")
        ->check(CLI::IsMember({"lbfgs", "newton", "both"}));
    o->add_option("--gtol", oc.gtol, "Projected gradient tolerance");
    o->add_option("--compare-tol", oc.compare_tol, "Tolerance for the iteration-count comparison");
    o->add_option("--max-iter", oc.max_iter, "Iteration limit");
    o->add_option("--vmax", oc.v_max, "Upper speed bound");
    o->add_flag("--on-leader", oc.on_leader, "Start the pursuer on the leader's path");
    o->callback([&] { run = [&] { return cmd_optimal_control(common, oc); }; });

    auto *g = app.add_subcommand("grayscott-invert", "Recover the Gray-Scott initial condition with L-BFGS");
    add_common(g, common, false);
    g->add_option("--perturbation", inv.perturbation, "Amplitude of the starting-guess perturbation");
    g->add_option("--max-iter", inv.max_iter, "Iteration limit");
    g->add_option("--gtol", inv.gtol, "Gradient tolerance");
    g->add_option("--min-reduction", inv.min_reduction, "Required cost reduction factor");
    g->add_option("--ratio-limit", inv.ratio_limit, "Bound on adjoint/forward time for theta methods");
    g->callback([&] { run = [&] { return cmd_grayscott_invert(common, inv); }; });

    auto *r = app.add_subcommand("revolve-stats", "Recomputation counts of optimal checkpoint schedules");
    add_common(r, common, false);
    r->add_option("--min-steps", rev.min_steps, "Smallest N");
    r->add_option("--max-steps", rev.max_steps, "Largest N");
    r->add_option("--units", rev.units, "Memory units shared by the three curves");
    r->callback([&] { run = [&] { return cmd_revolve_stats(common, rev); }; });

    auto *i = app.add_subcommand("integrate", "Forward integration; the table is the trajectory");
    add_common(i, common, true);
    i->callback([&] { run = [&] { return cmd_integrate(common); }; });

    auto *d = app.add_subcommand("gradient", "Adjoint gradient at the problem's starting point");
    add_common(d, common, true);
    d->add_flag("--tlm", with_tlm, "Also compute the gradient with the tangent linear model");
    d->callback([&] { run = [&] { return cmd_gradient(common, with_tlm); }; });

    auto *v = app.add_subcommand("validate", "Check derivative callbacks against finite differences");
    add_common(v, common, true);
    v->add_option("--tolerance", val.tolerance, "Allowed relative discrepancy");
    v->callback([&] { run = [&] { return cmd_validate(common, val); }; });

    CLI11_PARSE(app, argc, argv);

    try {
        const CommandResult res = run();
        if (!out_file.empty()) {
            std::ofstream os(out_file);
            if (!os) {
                std::cerr << "cannot open " << out_file << '\n';
                return 2;
            }
            res.table.write_csv(os);
        }
        if (json) {
            std::cout << res.to_json().dump(2) << '\n';
        } else {
            res.print(std::cout);
        }
        return res.ok() ? 0 : 1;
    } catch (const adjts::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
