#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/sphere_geometry.hpp"

namespace panoscan {

enum class Interpolation { bilinear, nearest };

/// Projection between one perspective viewport and the ERP raster.
///
/// Longitudes are handled relative to the viewpoint yaw, and the yaw offset is
/// kept on a 2^-20 pixel lattice. Shifting both the panorama and the yaw by a
/// whole number of pixels therefore reproduces every sampling coordinate
/// bit-exactly, which is what makes rendering and fusion roll-equivariant.
class ViewportCamera {
 public:
  ViewportCamera(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width, int pano_height);

  const Viewpoint& viewpoint() const noexcept { return viewpoint_; }
  const CameraIntrinsics& intrinsics() const noexcept { return intrinsics_; }
  int pano_width() const noexcept { return width_; }
  int pano_height() const noexcept { return height_; }
  Rotation rotation() const { return rotation_from_viewpoint(viewpoint_); }

  /// ERP column offset (continuous pixels) of the viewpoint yaw.
  double yaw_offset_px() const noexcept { return yaw_px_; }

  /// World ray through viewport pixel (x, y): normalize(R K^-1 [x, y, 1]).
  UnitVector ray(double x, double y) const;

  /// ERP coordinate seen by viewport pixel (x, y); u in [0, W), v in [0, H-1].
  Eigen::Vector2d erp_coordinate(double x, double y) const;

  /// Viewport coordinate of a world direction, or nullopt unless z_c > 0 and
  /// 0 <= u_hat, v_hat < L.
  std::optional<Eigen::Vector2d> project(const UnitVector& d) const;

  /// Same visibility test for an ERP coordinate (pixel-center convention).
  std::optional<Eigen::Vector2d> project_erp(double u, double v) const;

  /// Latitude-relative camera coordinates (x_c, y_c, z_c) of an ERP coordinate.
  Eigen::Vector3d erp_to_camera(double u, double v) const;

 private:
  std::optional<Eigen::Vector2d> image_point(const Eigen::Vector3d& cam) const;

  Viewpoint viewpoint_;
  CameraIntrinsics intrinsics_;
  int width_;
  int height_;
  double yaw_px_;
  double sin_pitch_;
  double cos_pitch_;
};

namespace detail {
/// Sampling coordinates for a viewpoint at yaw 0; shared by all viewpoints of
/// the same pitch row.
struct RelativeGrid {
  int size_l = 0;
  int pano_width = 0;
  int pano_height = 0;
  std::vector<double> u;
  std::vector<double> v;
};
}  // namespace detail

/// Per-pixel ERP source coordinates of one viewport.
class SamplingGrid {
 public:
  SamplingGrid(std::shared_ptr<const detail::RelativeGrid> rel, double yaw_offset_px);

  int size_l() const noexcept { return rel_->size_l; }
  int pano_width() const noexcept { return rel_->pano_width; }
  int pano_height() const noexcept { return rel_->pano_height; }

  /// In [0, pano_width).
  double u_src(int x, int y) const noexcept {
    double u = rel_->u[index(x, y)] + yaw_px_;
    const double w = rel_->pano_width;
    while (u >= w) {
      u -= w;
    }
    while (u < 0.0) {
      u += w;
    }
    return u;
  }
  /// In [0, pano_height - 1].
  double v_src(int x, int y) const noexcept { return rel_->v[index(x, y)]; }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * rel_->size_l + x;
  }

  std::shared_ptr<const detail::RelativeGrid> rel_;
  double yaw_px_;
};

/// Reuses grids across frames, prompts and sessions. Thread-safe.
class GridCache {
 public:
  SamplingGrid get(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width, int pano_height);
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<double, double, int, int, int>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const detail::RelativeGrid>> grids_;
};

SamplingGrid build_sampling_grid(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                                 int pano_height, GridCache* cache = nullptr);

/// Resamples `pano` through `grid`. Horizontal lookups wrap across the seam,
/// vertical lookups clamp at the poles. Label images only allow nearest.
RgbImage render_viewport(const RgbImage& pano, const SamplingGrid& grid, Interpolation mode);
FloatImage render_viewport(const FloatImage& pano, const SamplingGrid& grid, Interpolation mode);
LabelImage render_viewport(const LabelImage& pano, const SamplingGrid& grid, Interpolation mode);

/// One rendered perspective frame of a trajectory.
struct ViewportFrame {
  RgbImage image;
  Viewpoint viewpoint;
  CameraIntrinsics intrinsics;
  Rotation rotation;
  int frame_index = 0;
};

/// Renders one bilinear RGB frame per viewpoint; frame_index follows the input order.
std::vector<ViewportFrame> render_frames(const RgbImage& pano, std::span<const Viewpoint> viewpoints,
                                         const CameraIntrinsics& k, GridCache* cache = nullptr);

/// ERP pixel inside the footprint of a viewport, with its viewport coordinate.
struct VisibleSample {
  int u;
  double u_hat;
  double v_hat;
};

/// Calls `row_fn(v, samples)` for every ERP row that has visible pixels.
/// Rows may be visited concurrently; each row is visited once.
void visit_visible_pixels(const ViewportCamera& cam,
                          const std::function<void(int, std::span<const VisibleSample>)>& row_fn);

/// 1 where the ERP pixel center is visible in the viewport.
BinaryMask visibility_mask(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                           int pano_height);

/// Bilinear lookup with edge clamping; (x, y) in viewport pixel coordinates.
float sample_bilinear(const MaskImage& mask, double x, double y) noexcept;

/// Pulls a viewport mask back onto the ERP raster; 0 outside the footprint.
MaskImage reproject_mask(const MaskImage& frame_mask, const Viewpoint& vp, const CameraIntrinsics& k,
                         int pano_width, int pano_height);

}  // namespace panoscan
