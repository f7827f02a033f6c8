#include <benchmark/benchmark.h>

#include "panoscan/mask_fusion.hpp"
#include "panoscan/scan_trajectory.hpp"
#include "panoscan/viewport_projection.hpp"

using namespace panoscan;

namespace {

void BM_FuseTrajectory(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const ScanTrajectory t = generate_trajectory({});
  std::vector<MaskImage> masks;
  for (std::size_t i = 0; i < t.size(); ++i) {
    MaskImage m(1024, 1024);
    for (int y = 300; y < 700; ++y) {
      for (int x = 200; x < 800; ++x) {
        m.at(x, y) = 1.0F;
      }
    }
    masks.push_back(std::move(m));
  }
  std::vector<FrameMaskRef> refs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    refs.push_back({&masks[i], t[i].viewpoint});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuse_masks(refs, t.intrinsics(), w, w / 2));
  }
}
BENCHMARK(BM_FuseTrajectory)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_VisibilityMask(benchmark::State& state) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(visibility_mask(Viewpoint(90, 45), k, 4096, 2048));
  }
}
BENCHMARK(BM_VisibilityMask)->Unit(benchmark::kMillisecond);

}  // namespace
