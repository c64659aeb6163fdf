// Serial reference vs OpenMP estimators on the on/off example.

#include "swctrl/fixtures.hpp"
#include "swctrl/riccati.hpp"
#include "swctrl/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace swctrl;

namespace {

constexpr int kSimSteps = 200;

const SwitchSystem& system_under_test() {
  static const SwitchSystem s = fixture("exp-3-4");
  return s;
}

const DualPolicy& feedback() {
  static const DualPolicy policy = [] {
    const auto& s = system_under_test();
    return riccati_feedback_policy(s, solve(s, RiccatiParams::control_cost(s, 1e-3)));
  }();
  return policy;
}

void BM_CostDual_Serial(benchmark::State& state) {
  const auto& s = system_under_test();
  const Vector y0 = Vector::Unit(2, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serial::mc_cost_dual(s, y0, feedback(), state.range(0), 1, kSimSteps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CostDual_Parallel(benchmark::State& state) {
  const auto& s = system_under_test();
  const Vector y0 = Vector::Unit(2, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(mc_cost_dual(s, y0, feedback(), state.range(0), 1, kSimSteps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Duality_Serial(benchmark::State& state) {
  const auto& s = system_under_test();
  const auto [primal, dual] = random_linear_policies(s, 7);
  const Vector ones = Vector::Ones(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serial::duality_check(s, ones, ones, primal, dual, state.range(0), 1, kSimSteps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Duality_Parallel(benchmark::State& state) {
  const auto& s = system_under_test();
  const auto [primal, dual] = random_linear_policies(s, 7);
  const Vector ones = Vector::Ones(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        duality_check(s, ones, ones, primal, dual, state.range(0), 1, kSimSteps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CostDual_Serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostDual_Parallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Duality_Serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Duality_Parallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
