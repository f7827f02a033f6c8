#pragma once

#include <span>

#include "panoscan/image.hpp"
#include "panoscan/sphere_geometry.hpp"

namespace panoscan {

/// Fused panoramic mask: the real-valued max plane and its thresholded form.
struct FusedMask {
  MaskImage plane;
  BinaryMask binary;
  double threshold = 0.5;
};

/// Non-owning view of one frame's mask and the viewpoint it was rendered from.
struct FrameMaskRef {
  const MaskImage* mask = nullptr;
  Viewpoint viewpoint;
};

/// Element-wise maximum of every frame mask pulled back onto the ERP raster.
/// Each ERP pixel only takes values from frames that see it; binary is
/// plane >= threshold. Throws UsageError on an empty list, a mask that is not
/// L x L, or a threshold outside (0, 1].
FusedMask fuse_masks(std::span<const FrameMaskRef> frames, const CameraIntrinsics& k,
                     int pano_width, int pano_height, double threshold = 0.5);

/// Largest |plane(0, v) - plane(W-1, v)|. When `gt` is given, only rows where
/// the ground truth touches either border column are considered.
double seam_stitch_check(const FusedMask& fused, const BinaryMask* gt = nullptr);

}  // namespace panoscan
