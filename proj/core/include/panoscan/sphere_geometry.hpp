#pragma once

#include <Eigen/Core>
#include <numbers>

namespace panoscan {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / kPi); }

/// Wraps an angle in radians into [-pi, pi).
double wrap_longitude(double phi) noexcept;

/// Latitude/longitude on the unit sphere, in radians.
/// theta in [-pi/2, pi/2] (north positive), phi in [-pi, pi).
class SphericalCoord {
 public:
  SphericalCoord() = default;
  /// Throws DomainError when theta leaves [-pi/2, pi/2]; phi is wrapped.
  SphericalCoord(double theta, double phi);

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

/// Direction on the unit sphere.
class UnitVector {
 public:
  UnitVector() = default;
  /// Throws DomainError unless |(x,y,z)| is 1 within 1e-6.
  UnitVector(double x, double y, double z);
  /// Normalizes `v`; throws DomainError on a (near) zero vector.
  static UnitVector normalized(const Eigen::Vector3d& v);

  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }
  const Eigen::Vector3d& vec() const noexcept { return v_; }

 private:
  struct Unchecked {};
  UnitVector(const Eigen::Vector3d& v, Unchecked) : v_(v) {}

  Eigen::Vector3d v_{1.0, 0.0, 0.0};
};

/// Camera orientation in degrees. yaw is normalized to [0, 360); roll is always zero.
class Viewpoint {
 public:
  Viewpoint() = default;
  /// Throws DomainError when |pitch| >= 90.
  Viewpoint(double yaw_deg, double pitch_deg);

  double yaw_deg() const noexcept { return yaw_deg_; }
  double pitch_deg() const noexcept { return pitch_deg_; }
  double yaw_rad() const noexcept { return deg_to_rad(yaw_deg_); }
  double pitch_rad() const noexcept { return deg_to_rad(pitch_deg_); }

  /// True when the whole frustum of vertical FoV `beta_v_deg` stays inside the poles.
  bool pole_safe(double beta_v_deg) const noexcept;

  friend bool operator==(const Viewpoint&, const Viewpoint&) = default;

 private:
  double yaw_deg_ = 0.0;
  double pitch_deg_ = 0.0;
};

/// Pinhole intrinsics of a square L x L viewport.
struct CameraIntrinsics {
  double focal = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int size_l = 0;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Camera-to-world rotation. Camera axes: x right, y down, z forward.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {}

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  Eigen::Vector3d to_world(const Eigen::Vector3d& cam) const { return m_ * cam; }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const { return m_.transpose() * world; }

 private:
  Eigen::Matrix3d m_;
};

/// ERP pixel (pixel-center convention, u to the right, v downward) to angles.
/// Throws DomainError for pixels outside the raster or a non 2:1 raster.
SphericalCoord erp_pixel_to_sph(double u, double v, int width, int height);

/// Exact inverse of erp_pixel_to_sph; u is wrapped into [-0.5, width - 0.5).
Eigen::Vector2d sph_to_erp_pixel(const SphericalCoord& c, int width, int height);

UnitVector sph_to_vec(const SphericalCoord& c);

/// theta = asin(z), phi = atan2(y, x); phi is 0 at the poles.
SphericalCoord vec_to_sph(const UnitVector& d);

/// focal = (L - 1) / (2 tan(beta / 2)), principal point at the raster center.
CameraIntrinsics intrinsics_from_fov(double beta_deg, int size_l);

/// Yaw about world z, then pitch about the rotated lateral axis, no roll.
/// The returned matrix maps camera forward (0,0,1) onto sph_to_vec(pitch, yaw).
Rotation rotation_from_viewpoint(const Viewpoint& vp);

}  // namespace panoscan
