#include "panoscan/mask_fusion.hpp"

#include <algorithm>
#include <cmath>

#include "panoscan/errors.hpp"
#include "panoscan/viewport_projection.hpp"

namespace panoscan {

FusedMask fuse_masks(std::span<const FrameMaskRef> frames, const CameraIntrinsics& k,
                     int pano_width, int pano_height, double threshold) {
  if (frames.empty()) {
    throw UsageError("fusion needs at least one frame mask");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw UsageError("binarization threshold must lie in (0, 1]");
  }
  for (const FrameMaskRef& f : frames) {
    if (f.mask == nullptr || f.mask->width() != k.size_l || f.mask->height() != k.size_l ||
        f.mask->channels() != 1) {
      throw UsageError("every frame mask must be a single-channel L x L image");
    }
  }
  require_erp_shape(pano_width, pano_height);

  FusedMask fused;
  fused.threshold = threshold;
  fused.plane = MaskImage(pano_width, pano_height);
  // Frames are applied one after another; rows within a frame are disjoint,
  // so the accumulation needs no synchronisation and max keeps it order-free.
  for (const FrameMaskRef& f : frames) {
    const ViewportCamera cam(f.viewpoint, k, pano_width, pano_height);
    visit_visible_pixels(cam, [&](int v, std::span<const VisibleSample> samples) {
      auto row = fused.plane.row(v);
      for (const VisibleSample& s : samples) {
        const float value = sample_bilinear(*f.mask, s.u_hat, s.v_hat);
        row[s.u] = std::max(row[s.u], value);
      }
    });
  }

  fused.binary = BinaryMask(pano_width, pano_height);
  const auto plane = fused.plane.data();
  auto binary = fused.binary.data();
  const auto t = static_cast<float>(threshold);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    binary[i] = plane[i] >= t ? 1 : 0;
  }
  return fused;
}

double seam_stitch_check(const FusedMask& fused, const BinaryMask* gt) {
  const MaskImage& plane = fused.plane;
  const int w = plane.width();
  if (w == 0) {
    return 0.0;
  }
  if (gt != nullptr && (gt->width() != w || gt->height() != plane.height())) {
    throw UsageError("ground truth size differs from the fused mask");
  }
  double worst = 0.0;
  for (int v = 0; v < plane.height(); ++v) {
    if (gt != nullptr && gt->at(0, v) == 0 && gt->at(w - 1, v) == 0) {
      continue;
    }
    worst = std::max(worst, static_cast<double>(std::abs(plane.at(0, v) - plane.at(w - 1, v))));
  }
  return worst;
}

}  // namespace panoscan
