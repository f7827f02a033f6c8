#include <benchmark/benchmark.h>

#include <random>

#include "panoscan/scan_trajectory.hpp"
#include "panoscan/viewport_projection.hpp"

using namespace panoscan;

namespace {

RgbImage noise_pano(int w) {
  RgbImage img(w, w / 2, 3);
  std::mt19937_64 rng(1);
  for (auto& x : img.data()) {
    x = static_cast<std::uint8_t>(rng());
  }
  return img;
}

void BM_BuildGrid(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const CameraIntrinsics k = intrinsics_from_fov(90, l);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_sampling_grid(Viewpoint(45, 45), k, 4096, 2048));
  }
  state.SetItemsProcessed(state.iterations() * l * l);
}
BENCHMARK(BM_BuildGrid)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_RenderViewport(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const RgbImage pano = noise_pano(4096);
  const SamplingGrid grid = build_sampling_grid(Viewpoint(45, 0), intrinsics_from_fov(90, l), 4096, 2048);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_viewport(pano, grid, Interpolation::bilinear));
  }
  state.SetItemsProcessed(state.iterations() * l * l);
}
BENCHMARK(BM_RenderViewport)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

// The full 24-frame precut of a 4K panorama with a warm grid cache.
void BM_RenderTrajectory(benchmark::State& state) {
  const RgbImage pano = noise_pano(4096);
  const ScanTrajectory t = generate_trajectory({});
  const auto vps = t.viewpoints();
  GridCache cache;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_frames(pano, vps, t.intrinsics(), &cache));
  }
}
BENCHMARK(BM_RenderTrajectory)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
