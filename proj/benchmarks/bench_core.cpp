#include <benchmark/benchmark.h>

#include "risuav/geometry.hpp"
#include "risuav/sca.hpp"

using namespace risuav;

static void BM_SteeringVector(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const Angles a{0.6, 0.28, 0.96};
  for (auto _ : state) benchmark::DoNotOptimize(steering_vector({side, side}, {0.005, 0.005}, 0.01, a));
}
BENCHMARK(BM_SteeringVector)->Arg(4)->Arg(10)->Arg(32);

static void BM_MrtGains(benchmark::State& state) {
  const ScenarioConfig s;
  for (auto _ : state) benchmark::DoNotOptimize(mrt_effective_gains(build_channels(s, {130.0, 310.0}), s));
}
BENCHMARK(BM_MrtGains);

static void BM_PowerStep(benchmark::State& state) {
  const ScenarioConfig s;
  const SimControls c;
  const PowerStepInput in = power_step_input(s, {250.0, 250.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_step(in, c));
}
BENCHMARK(BM_PowerStep)->Unit(benchmark::kMillisecond);

static void BM_JointOptimizationThreeIterations(benchmark::State& state) {
  const ScenarioConfig s;
  SimControls c;
  c.max_iterations = 3;
  for (auto _ : state) benchmark::DoNotOptimize(run_joint_optimization(s, EnergyParams{}, c));
}
BENCHMARK(BM_JointOptimizationThreeIterations)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
