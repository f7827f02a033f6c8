#include <benchmark/benchmark.h>

#include "panoscan/evaluation.hpp"
#include "panoscan/synthetic_scenes.hpp"

using namespace panoscan;

namespace {

BinaryMask cap_mask(int w) {
  SphericalScene s;
  s.instances.push_back({1, SphericalCap{SphericalCoord(0.3, 3.0), deg_to_rad(25)}, {255, 255, 255}});
  return label_equals(render_scene(s, w, w / 2).labels, 1);
}

void BM_DistanceTransform(benchmark::State& state) {
  const BinaryMask m = cap_mask(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(squared_distance_to_boundary(m));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.pixel_count()));
}
BENCHMARK(BM_DistanceTransform)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_CorrectionClick(benchmark::State& state) {
  const BinaryMask gt = cap_mask(2048);
  BinaryMask pred = gt;
  for (int v = 0; v < 1024; v += 3) {
    for (int u = 0; u < 2048; u += 5) {
      pred.at(u, v) = 1 - pred.at(u, v);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(correction_click(pred, gt));
  }
}
BENCHMARK(BM_CorrectionClick)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
