#include <vector>

#include <benchmark/benchmark.h>

#include "egotraj/geom.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {
namespace {

std::vector<SimTangent> tangents(std::size_t n) {
  Rng rng(1);
  std::vector<SimTangent> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec7 v;
    for (int k = 0; k < 7; ++k) v[k] = rng.uniform(-0.8, 0.8);
    out.push_back(SimTangent::from_vector(v));
  }
  return out;
}

void BM_Sim3Exp(benchmark::State& state) {
  const auto xs = tangents(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim3_exp(xs[i++ & 1023]));
  }
}
BENCHMARK(BM_Sim3Exp);

void BM_Sim3Log(benchmark::State& state) {
  std::vector<SimTransform> ts;
  for (const auto& x : tangents(1024)) ts.push_back(sim3_exp(x));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim3_log(ts[i++ & 1023]));
  }
}
BENCHMARK(BM_Sim3Log);

void BM_Sim3Compose(benchmark::State& state) {
  std::vector<SimTransform> ts;
  for (const auto& x : tangents(1024)) ts.push_back(sim3_exp(x));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compose(ts[i & 1023], ts[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Sim3Compose);

}  // namespace
}  // namespace egotraj
