#include <adjts/checkpoint.hpp>
#include <adjts/problems/aircraft.hpp>
#include <adjts/problems/grayscott.hpp>
#include <adjts/sensitivity.hpp>

#include <benchmark/benchmark.h>

using namespace adjts;

namespace
{

Method method_of(int64_t i)
{
    switch (i) {
    case 0:
        return Method::backward_euler();
    case 1:
        return Method::crank_nicolson();
    default:
        return Method::rk4();
    }
}

std::unique_ptr<GrayScottProblem> grayscott(int64_t grid, int64_t method)
{
    GrayScottOptions g;
    g.grid = static_cast<std::size_t>(grid);
    g.method = method_of(method);
    return make_grayscott(g);
}

// Args: grid, method (0 theta1, 1 theta0.5, 2 rk4).
void BM_GrayScottForward(benchmark::State &state)
{
    const auto gs = grayscott(state.range(0), state.range(1));
    const auto &s = gs->setup;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_objective(s.problem, s.objective, s.param_map, s.config, s.param));
    }
}
BENCHMARK(BM_GrayScottForward)->ArgsProduct({{16, 32}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_GrayScottGradient(benchmark::State &state)
{
    const auto gs = grayscott(state.range(0), state.range(1));
    const auto &s = gs->setup;
    for (auto _ : state) {
        benchmark::DoNotOptimize(setup_gradient(s, s.x0).gradient.data());
    }
}
BENCHMARK(BM_GrayScottGradient)->ArgsProduct({{16, 32}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

// Args: capacity, mode (0 sol, 1 sol+stages); Gray-Scott 16x16, theta1, 40 steps.
void BM_GrayScottGradientCheckpointed(benchmark::State &state)
{
    GrayScottOptions g;
    g.grid = 16;
    g.num_steps = 40;
    g.tf = 20.0;
    const auto gs = make_grayscott(g);
    const auto &s = gs->setup;
    StorageOptions st;
    st.capacity = static_cast<std::size_t>(state.range(0));
    st.mode = state.range(1) == 0 ? CheckpointMode::solution_only : CheckpointMode::solution_and_stages;
    std::size_t recomputations = 0;
    for (auto _ : state) {
        const auto rep = compute_gradient(s.problem, s.objective, s.param_map, s.config, s.param, s.target, st);
        recomputations = rep.recomputations;
        benchmark::DoNotOptimize(rep.gradient.data());
    }
    state.counters["recomputations"] = static_cast<double>(recomputations);
}
BENCHMARK(BM_GrayScottGradientCheckpointed)->ArgsProduct({{2, 5, 40}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_GrayScottHvp(benchmark::State &state)
{
    const auto gs = grayscott(16, state.range(0));
    const auto &s = gs->setup;
    const Vector sigma = Vector::Ones(s.x0.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(setup_hvp(s, s.x0, sigma).data());
    }
}
BENCHMARK(BM_GrayScottHvp)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_AircraftGradientAndHvp(benchmark::State &state)
{
    const auto s = make_aircraft();
    const Vector sigma = Vector::Ones(s->x0.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(setup_gradient(*s, s->x0).gradient.data());
        benchmark::DoNotOptimize(setup_hvp(*s, s->x0, sigma).data());
    }
}
BENCHMARK(BM_AircraftGradientAndHvp)->Unit(benchmark::kMicrosecond);

// Args: N, capacity.
void BM_PlanSchedule(benchmark::State &state)
{
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto s = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan_schedule(N, s, CheckpointMode::solution_and_stages).actions.size());
    }
}
BENCHMARK(BM_PlanSchedule)->ArgsProduct({{100, 1000}, {5, 20}})->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
