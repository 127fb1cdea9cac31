#include <benchmark/benchmark.h>

#include "egotraj/metrics.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {
namespace {

MotionSequence motion(std::uint64_t seed, std::size_t frames) {
  Rng rng(seed);
  MotionSequence m;
  m.fps = 30.0;
  for (std::size_t f = 0; f < frames; ++f) {
    MotionFrame frame;
    frame.frame = static_cast<FrameIndex>(f);
    for (auto& j : frame.joints) j = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1.8));
    m.frames.push_back(std::move(frame));
  }
  return m;
}

void BM_MpjpePa(benchmark::State& state) {
  const MotionSequence a = motion(1, 1000);
  const MotionSequence b = motion(2, 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpjpe_pa(a, b));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MpjpePa)->Unit(benchmark::kMicrosecond);

void BM_MpjpeRigid(benchmark::State& state) {
  const MotionSequence a = motion(1, 1000);
  const MotionSequence b = motion(2, 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpjpe_rigid(a, b));
  }
}
BENCHMARK(BM_MpjpeRigid)->Unit(benchmark::kMicrosecond);

void BM_FootSliding(benchmark::State& state) {
  const MotionSequence a = motion(3, 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(foot_sliding(a, 0.0));
  }
}
BENCHMARK(BM_FootSliding)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace egotraj
