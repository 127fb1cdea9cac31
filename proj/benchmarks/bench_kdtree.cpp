#include <vector>

#include <benchmark/benchmark.h>

#include "egotraj/kdtree.hpp"
#include "egotraj/rng.hpp"
#include "egotraj/synthdb.hpp"

namespace egotraj {
namespace {

std::vector<Vec3> random_cloud(std::size_t n) {
  Rng rng(2);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.uniform(0, 8), rng.uniform(0, 8), rng.uniform(0, 3));
  return pts;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = random_cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    KdTree tree(pts);
    benchmark::DoNotOptimize(tree.size());
  }
}
BENCHMARK(BM_KdTreeBuild)->Arg(10'000)->Arg(100'000);

void BM_KdTreeNearest(benchmark::State& state) {
  const KdTree tree(random_cloud(static_cast<std::size_t>(state.range(0))));
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.nearest(Vec3(rng.uniform(0, 8), rng.uniform(0, 8), rng.uniform(0, 3))));
  }
}
BENCHMARK(BM_KdTreeNearest)->Arg(10'000)->Arg(100'000);

void BM_SampleCameraGrid(benchmark::State& state) {
  std::vector<Vec3> pts;
  const int n = 316;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.emplace_back(4.0 * i / (n - 1), 4.0 * j / (n - 1), 0.0);
  }
  const PointCloud cloud{pts, {}};
  const KdTree index = build_index(cloud);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_camera_grid(cloud, index, {}, 1));
  }
}
BENCHMARK(BM_SampleCameraGrid)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace egotraj
