#include <benchmark/benchmark.h>

#include "egotraj/anchors.hpp"
#include "egotraj/driftsim.hpp"
#include "egotraj/refine.hpp"

namespace egotraj {
namespace {

void BM_RefineTrajectory(benchmark::State& state) {
  ScenarioConfig config;
  config.frames = state.range(0);
  const ScenarioInputs in = make_scenario_inputs(0, config);
  const AnchorSet anchors = filter_anchors(in.candidates.candidates);
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine_trajectory(anchors, in.slam, config.refine));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RefineTrajectory)->Arg(400)->Arg(4000)->Unit(benchmark::kMicrosecond);

void BM_EndToEndScenario(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(end_to_end_scenario(seed++));
  }
}
BENCHMARK(BM_EndToEndScenario)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace egotraj
