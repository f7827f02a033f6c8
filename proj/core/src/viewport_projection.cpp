#include "panoscan/viewport_projection.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

constexpr double kLattice = 1048576.0;  // 2^20

double snap_to_lattice(double x) noexcept { return std::nearbyint(x * kLattice) / kLattice; }

void check_pano_dims(int w, int h) {
  if (h < 1 || w != 2 * h) {
    throw DomainError("ERP raster must satisfy width = 2 * height");
  }
}

// Rows of the ERP raster and the (unwrapped) column span that can contain
// pixels visible from a camera.
struct Footprint {
  int row_begin = 0;
  int row_end = 0;  // exclusive
  bool all_columns = false;
  long col_begin = 0;
  long col_end = 0;  // exclusive, may exceed the raster width before wrapping
};

bool pole_near_frame(const ViewportCamera& cam, double z) {
  const CameraIntrinsics& k = cam.intrinsics();
  const double sp = std::sin(cam.viewpoint().pitch_rad());
  const double cp = std::cos(cam.viewpoint().pitch_rad());
  const double xc = 0.0;
  const double yc = -cp * z;
  const double zc = sp * z;
  if (!(zc > 1e-9)) {
    return false;
  }
  const double u_hat = k.cx + k.focal * xc / zc;
  const double v_hat = k.cy + k.focal * yc / zc;
  const double margin = k.size_l / 4.0;
  return u_hat >= -margin && u_hat <= k.size_l + margin && v_hat >= -margin &&
         v_hat <= k.size_l + margin;
}

Footprint compute_footprint(const ViewportCamera& cam) {
  const CameraIntrinsics& k = cam.intrinsics();
  const int w = cam.pano_width();
  const int h = cam.pano_height();
  const double sp = std::sin(cam.viewpoint().pitch_rad());
  const double cp = std::cos(cam.viewpoint().pitch_rad());
  const double side = k.size_l;
  const int samples = std::max(4 * k.size_l, 4096);

  double theta_min = kPi;
  double theta_max = -kPi;
  double phi_min = kPi;
  double phi_max = -kPi;
  auto visit = [&](double x, double y) {
    const double a = (x - k.cx) / k.focal;
    const double b = (y - k.cy) / k.focal;
    const double rx = cp + sp * b;
    const double ry = -a;
    const double rz = sp - cp * b;
    const double n = std::sqrt(rx * rx + ry * ry + rz * rz);
    const double theta = std::asin(std::clamp(rz / n, -1.0, 1.0));
    const double phi = std::atan2(ry, rx);
    theta_min = std::min(theta_min, theta);
    theta_max = std::max(theta_max, theta);
    phi_min = std::min(phi_min, phi);
    phi_max = std::max(phi_max, phi);
  };
  for (int i = 0; i <= samples; ++i) {
    const double t = side * i / samples;
    visit(t, 0.0);
    visit(t, side);
    visit(0.0, t);
    visit(side, t);
  }

  const bool north = pole_near_frame(cam, 1.0);
  const bool south = pole_near_frame(cam, -1.0);
  if (north) {
    theta_max = kPi / 2;
  }
  if (south) {
    theta_min = -kPi / 2;
  }

  constexpr int kMargin = 2;
  Footprint fp;
  const double v_top = (kPi / 2 - theta_max) / kPi * h - 0.5;
  const double v_bottom = (kPi / 2 - theta_min) / kPi * h - 0.5;
  fp.row_begin = std::clamp(static_cast<int>(std::floor(v_top)) - kMargin, 0, h);
  fp.row_end = std::clamp(static_cast<int>(std::ceil(v_bottom)) + kMargin + 1, 0, h);

  if (north || south || phi_max - phi_min > 2.0 * kPi - 1e-6) {
    fp.all_columns = true;
    fp.col_begin = 0;
    fp.col_end = w;
    return fp;
  }
  const double base = w / 2.0 - 0.5 + cam.yaw_offset_px();
  fp.col_begin = static_cast<long>(std::floor(base + phi_min * w / (2.0 * kPi))) - kMargin;
  fp.col_end = static_cast<long>(std::ceil(base + phi_max * w / (2.0 * kPi))) + kMargin + 1;
  if (fp.col_end - fp.col_begin >= w) {
    fp.all_columns = true;
    fp.col_begin = 0;
    fp.col_end = w;
  }
  return fp;
}

template <typename T>
Image<T> render_impl(const Image<T>& pano, const SamplingGrid& grid, Interpolation mode) {
  if (pano.width() != grid.pano_width() || pano.height() != grid.pano_height()) {
    throw UsageError("sampling grid was built for a different panorama size");
  }
  const int side = grid.size_l();
  const int w = pano.width();
  const int h = pano.height();
  const int ch = pano.channels();
  Image<T> out(side, side, ch);

  tbb::parallel_for(tbb::blocked_range<int>(0, side), [&](const tbb::blocked_range<int>& rows) {
    for (int y = rows.begin(); y < rows.end(); ++y) {
      for (int x = 0; x < side; ++x) {
        const double u = grid.u_src(x, y);
        const double v = grid.v_src(x, y);
        if (mode == Interpolation::nearest) {
          int xi = static_cast<int>(std::floor(u + 0.5));
          if (xi >= w) {
            xi -= w;
          }
          const int yi = std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, h - 1);
          for (int c = 0; c < ch; ++c) {
            out.at(x, y, c) = pano.at(xi, yi, c);
          }
          continue;
        }
        const int x0 = static_cast<int>(std::floor(u));
        const int x1 = x0 + 1 >= w ? 0 : x0 + 1;
        const int y0 = std::clamp(static_cast<int>(std::floor(v)), 0, h - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fx = u - x0;
        const double fy = v - y0;
        for (int c = 0; c < ch; ++c) {
          const double a = pano.at(x0, y0, c);
          const double b = pano.at(x1, y0, c);
          const double d = pano.at(x0, y1, c);
          const double e = pano.at(x1, y1, c);
          const double top = a + fx * (b - a);
          const double bottom = d + fx * (e - d);
          double value = top + fy * (bottom - top);
          const double lo = std::min(std::min(a, b), std::min(d, e));
          const double hi = std::max(std::max(a, b), std::max(d, e));
          value = std::clamp(value, lo, hi);
          if constexpr (std::is_integral_v<T>) {
            out.at(x, y, c) = static_cast<T>(std::lround(value));
          } else {
            out.at(x, y, c) = static_cast<T>(value);
          }
        }
      }
    }
  });
  return out;
}

}  // namespace

ViewportCamera::ViewportCamera(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                               int pano_height)
    : viewpoint_(vp),
      intrinsics_(k),
      width_(pano_width),
      height_(pano_height),
      yaw_px_(snap_to_lattice(vp.yaw_deg() / 360.0 * pano_width)),
      sin_pitch_(std::sin(vp.pitch_rad())),
      cos_pitch_(std::cos(vp.pitch_rad())) {
  check_pano_dims(pano_width, pano_height);
  if (k.size_l < 2 || !(k.focal > 0.0)) {
    throw DomainError("invalid camera intrinsics");
  }
}

UnitVector ViewportCamera::ray(double x, double y) const {
  const Eigen::Vector3d cam((x - intrinsics_.cx) / intrinsics_.focal,
                            (y - intrinsics_.cy) / intrinsics_.focal, 1.0);
  return UnitVector::normalized(rotation().to_world(cam));
}

Eigen::Vector2d ViewportCamera::erp_coordinate(double x, double y) const {
  const double a = (x - intrinsics_.cx) / intrinsics_.focal;
  const double b = (y - intrinsics_.cy) / intrinsics_.focal;
  // Ray rotated by pitch only; yaw is applied as a column offset.
  const double rx = cos_pitch_ + sin_pitch_ * b;
  const double ry = -a;
  const double rz = sin_pitch_ - cos_pitch_ * b;
  const double n = std::sqrt(rx * rx + ry * ry + rz * rz);
  const double theta = std::asin(std::clamp(rz / n, -1.0, 1.0));
  const double phi_rel = std::atan2(ry, rx);

  const double w = width_;
  double u = snap_to_lattice(phi_rel * w / (2.0 * kPi)) + (w / 2.0 - 0.5) + yaw_px_;
  while (u >= w) {
    u -= w;
  }
  while (u < 0.0) {
    u += w;
  }
  const double v = std::clamp((kPi / 2 - theta) / kPi * height_ - 0.5, 0.0, height_ - 1.0);
  return {u, v};
}

Eigen::Vector3d ViewportCamera::erp_to_camera(double u, double v) const {
  const double w = width_;
  double n = u + 0.5 - w / 2.0 - yaw_px_;
  while (n >= w / 2.0) {
    n -= w;
  }
  while (n < -w / 2.0) {
    n += w;
  }
  const double phi_rel = n * (2.0 * kPi / w);
  const double theta = kPi / 2 - ((v + 0.5) / height_) * kPi;
  const double ct = std::cos(theta);
  const double dx = ct * std::cos(phi_rel);
  const double dy = ct * std::sin(phi_rel);
  const double dz = std::sin(theta);
  return {-dy, sin_pitch_ * dx - cos_pitch_ * dz, cos_pitch_ * dx + sin_pitch_ * dz};
}

std::optional<Eigen::Vector2d> ViewportCamera::image_point(const Eigen::Vector3d& cam) const {
  if (!(cam.z() > 0.0)) {
    return std::nullopt;
  }
  const double u_hat = intrinsics_.cx + intrinsics_.focal * cam.x() / cam.z();
  const double v_hat = intrinsics_.cy + intrinsics_.focal * cam.y() / cam.z();
  const double side = intrinsics_.size_l;
  if (u_hat >= 0.0 && u_hat < side && v_hat >= 0.0 && v_hat < side) {
    return Eigen::Vector2d(u_hat, v_hat);
  }
  return std::nullopt;
}

std::optional<Eigen::Vector2d> ViewportCamera::project(const UnitVector& d) const {
  const SphericalCoord s = vec_to_sph(d);
  const Eigen::Vector2d erp = sph_to_erp_pixel(s, width_, height_);
  return image_point(erp_to_camera(erp.x(), erp.y()));
}

std::optional<Eigen::Vector2d> ViewportCamera::project_erp(double u, double v) const {
  return image_point(erp_to_camera(u, v));
}

SamplingGrid::SamplingGrid(std::shared_ptr<const detail::RelativeGrid> rel, double yaw_offset_px)
    : rel_(std::move(rel)), yaw_px_(yaw_offset_px) {}

namespace {

std::shared_ptr<const detail::RelativeGrid> build_relative_grid(double pitch_deg,
                                                                const CameraIntrinsics& k,
                                                                int pano_width, int pano_height) {
  const ViewportCamera cam(Viewpoint(0.0, pitch_deg), k, pano_width, pano_height);
  auto grid = std::make_shared<detail::RelativeGrid>();
  grid->size_l = k.size_l;
  grid->pano_width = pano_width;
  grid->pano_height = pano_height;
  const std::size_t n = static_cast<std::size_t>(k.size_l) * k.size_l;
  grid->u.resize(n);
  grid->v.resize(n);
  tbb::parallel_for(tbb::blocked_range<int>(0, k.size_l), [&](const tbb::blocked_range<int>& rows) {
    for (int y = rows.begin(); y < rows.end(); ++y) {
      for (int x = 0; x < k.size_l; ++x) {
        const Eigen::Vector2d uv = cam.erp_coordinate(x, y);
        const std::size_t i = static_cast<std::size_t>(y) * k.size_l + x;
        grid->u[i] = uv.x();
        grid->v[i] = uv.y();
      }
    }
  });
  return grid;
}

}  // namespace

SamplingGrid GridCache::get(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                            int pano_height) {
  const Key key{vp.pitch_deg(), k.focal, k.size_l, pano_width, pano_height};
  const double yaw_px = ViewportCamera(vp, k, pano_width, pano_height).yaw_offset_px();
  {
    std::lock_guard lock(mutex_);
    if (auto it = grids_.find(key); it != grids_.end()) {
      return SamplingGrid(it->second, yaw_px);
    }
  }
  auto rel = build_relative_grid(vp.pitch_deg(), k, pano_width, pano_height);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = grids_.emplace(key, std::move(rel));
  return SamplingGrid(it->second, yaw_px);
}

std::size_t GridCache::size() const {
  std::lock_guard lock(mutex_);
  return grids_.size();
}

void GridCache::clear() {
  std::lock_guard lock(mutex_);
  grids_.clear();
}

SamplingGrid build_sampling_grid(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                                 int pano_height, GridCache* cache) {
  check_pano_dims(pano_width, pano_height);
  if (cache != nullptr) {
    return cache->get(vp, k, pano_width, pano_height);
  }
  const double yaw_px = ViewportCamera(vp, k, pano_width, pano_height).yaw_offset_px();
  return SamplingGrid(build_relative_grid(vp.pitch_deg(), k, pano_width, pano_height), yaw_px);
}

RgbImage render_viewport(const RgbImage& pano, const SamplingGrid& grid, Interpolation mode) {
  return render_impl(pano, grid, mode);
}

FloatImage render_viewport(const FloatImage& pano, const SamplingGrid& grid, Interpolation mode) {
  return render_impl(pano, grid, mode);
}

LabelImage render_viewport(const LabelImage& pano, const SamplingGrid& grid, Interpolation mode) {
  if (mode != Interpolation::nearest) {
    throw UsageError("instance label panoramas can only be rendered with nearest sampling");
  }
  return render_impl(pano, grid, mode);
}

std::vector<ViewportFrame> render_frames(const RgbImage& pano, std::span<const Viewpoint> viewpoints,
                                         const CameraIntrinsics& k, GridCache* cache) {
  require_erp_shape(pano.width(), pano.height());
  std::vector<ViewportFrame> frames(viewpoints.size());
  for (std::size_t i = 0; i < viewpoints.size(); ++i) {
    const SamplingGrid grid = build_sampling_grid(viewpoints[i], k, pano.width(), pano.height(), cache);
    ViewportFrame& f = frames[i];
    f.image = render_viewport(pano, grid, Interpolation::bilinear);
    f.viewpoint = viewpoints[i];
    f.intrinsics = k;
    f.rotation = rotation_from_viewpoint(viewpoints[i]);
    f.frame_index = static_cast<int>(i);
  }
  return frames;
}

void visit_visible_pixels(const ViewportCamera& cam,
                          const std::function<void(int, std::span<const VisibleSample>)>& row_fn) {
  const Footprint fp = compute_footprint(cam);
  const int w = cam.pano_width();
  tbb::parallel_for(tbb::blocked_range<int>(fp.row_begin, fp.row_end),
                    [&](const tbb::blocked_range<int>& rows) {
                      std::vector<VisibleSample> samples;
                      for (int v = rows.begin(); v < rows.end(); ++v) {
                        samples.clear();
                        for (long c = fp.col_begin; c < fp.col_end; ++c) {
                          const int u = static_cast<int>(((c % w) + w) % w);
                          if (auto p = cam.project_erp(u, v)) {
                            samples.push_back({u, p->x(), p->y()});
                          }
                        }
                        if (!samples.empty()) {
                          row_fn(v, samples);
                        }
                      }
                    });
}

BinaryMask visibility_mask(const Viewpoint& vp, const CameraIntrinsics& k, int pano_width,
                           int pano_height) {
  const ViewportCamera cam(vp, k, pano_width, pano_height);
  BinaryMask mask(pano_width, pano_height);
  visit_visible_pixels(cam, [&](int v, std::span<const VisibleSample> samples) {
    for (const VisibleSample& s : samples) {
      mask.at(s.u, v) = 1;
    }
  });
  return mask;
}

float sample_bilinear(const MaskImage& mask, double x, double y) noexcept {
  const int w = mask.width();
  const int h = mask.height();
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double a = mask.at(x0, y0);
  const double b = mask.at(x1, y0);
  const double c = mask.at(x0, y1);
  const double d = mask.at(x1, y1);
  const double top = a + fx * (b - a);
  const double bottom = c + fx * (d - c);
  const double value = top + fy * (bottom - top);
  const double lo = std::min(std::min(a, b), std::min(c, d));
  const double hi = std::max(std::max(a, b), std::max(c, d));
  return static_cast<float>(std::clamp(value, lo, hi));
}

MaskImage reproject_mask(const MaskImage& frame_mask, const Viewpoint& vp, const CameraIntrinsics& k,
                         int pano_width, int pano_height) {
  if (frame_mask.width() != k.size_l || frame_mask.height() != k.size_l ||
      frame_mask.channels() != 1) {
    throw UsageError("frame mask must be a single-channel L x L image");
  }
  const ViewportCamera cam(vp, k, pano_width, pano_height);
  MaskImage out(pano_width, pano_height);
  visit_visible_pixels(cam, [&](int v, std::span<const VisibleSample> samples) {
    for (const VisibleSample& s : samples) {
      out.at(s.u, v) = sample_bilinear(frame_mask, s.u_hat, s.v_hat);
    }
  });
  return out;
}

}  // namespace panoscan
