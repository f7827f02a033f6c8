#include "panoscan/sphere_geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <string>

#include "panoscan/errors.hpp"

namespace panoscan {

double wrap_longitude(double phi) noexcept {
  if (phi >= -kPi && phi < kPi) {
    return phi;
  }
  double wrapped = std::fmod(phi + kPi, 2.0 * kPi);
  if (wrapped < 0.0) {
    wrapped += 2.0 * kPi;
  }
  wrapped -= kPi;
  // fmod can land exactly on +pi after the shift back.
  return wrapped >= kPi ? -kPi : wrapped;
}

SphericalCoord::SphericalCoord(double theta, double phi) : theta_(theta), phi_(wrap_longitude(phi)) {
  if (!(theta >= -kPi / 2 && theta <= kPi / 2)) {
    throw DomainError("latitude outside [-pi/2, pi/2]: " + std::to_string(theta));
  }
  if (!std::isfinite(phi)) {
    throw DomainError("longitude is not finite");
  }
}

UnitVector::UnitVector(double x, double y, double z) : v_(x, y, z) {
  const double n = v_.norm();
  if (!(std::abs(n - 1.0) <= 1e-6)) {
    throw DomainError("vector is not unit length (norm " + std::to_string(n) + ")");
  }
}

UnitVector UnitVector::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 1e-300) || !std::isfinite(n)) {
    throw DomainError("cannot normalize a zero or non-finite vector");
  }
  return UnitVector(v / n, Unchecked{});
}

Viewpoint::Viewpoint(double yaw_deg, double pitch_deg) : pitch_deg_(pitch_deg) {
  if (!std::isfinite(yaw_deg) || !(std::abs(pitch_deg) < 90.0)) {
    throw DomainError("viewpoint pitch must lie strictly inside (-90, 90) degrees");
  }
  yaw_deg_ = std::fmod(yaw_deg, 360.0);
  if (yaw_deg_ < 0.0) {
    yaw_deg_ += 360.0;
  }
  if (yaw_deg_ >= 360.0) {
    yaw_deg_ = 0.0;
  }
}

bool Viewpoint::pole_safe(double beta_v_deg) const noexcept {
  return std::abs(pitch_deg_) <= 90.0 - beta_v_deg / 2.0 + 1e-12;
}

SphericalCoord erp_pixel_to_sph(double u, double v, int width, int height) {
  if (height < 1 || width != 2 * height) {
    throw DomainError("ERP raster must satisfy width = 2 * height");
  }
  if (!(u >= 0.0 && u < width && v >= 0.0 && v < height)) {
    throw DomainError("ERP pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") outside raster");
  }
  const double phi = ((u + 0.5) / width) * 2.0 * kPi - kPi;
  const double theta = kPi / 2 - ((v + 0.5) / height) * kPi;
  return SphericalCoord(theta, phi);
}

Eigen::Vector2d sph_to_erp_pixel(const SphericalCoord& c, int width, int height) {
  const double u = (c.phi() + kPi) / (2.0 * kPi) * width - 0.5;
  const double v = (kPi / 2 - c.theta()) / kPi * height - 0.5;
  return {u, v};
}

UnitVector sph_to_vec(const SphericalCoord& c) {
  const double ct = std::cos(c.theta());
  return UnitVector::normalized(
      Eigen::Vector3d(ct * std::cos(c.phi()), ct * std::sin(c.phi()), std::sin(c.theta())));
}

SphericalCoord vec_to_sph(const UnitVector& d) {
  const double theta = std::asin(std::clamp(d.z(), -1.0, 1.0));
  const double phi = (d.x() == 0.0 && d.y() == 0.0) ? 0.0 : std::atan2(d.y(), d.x());
  return SphericalCoord(theta, phi);
}

CameraIntrinsics intrinsics_from_fov(double beta_deg, int size_l) {
  if (!(beta_deg > 0.0 && beta_deg < 180.0)) {
    throw DomainError("field of view must lie in (0, 180) degrees");
  }
  if (size_l < 2) {
    throw DomainError("viewport side must be at least 2 pixels");
  }
  CameraIntrinsics k;
  k.size_l = size_l;
  k.focal = (size_l - 1) / (2.0 * std::tan(deg_to_rad(beta_deg) / 2.0));
  k.cx = (size_l - 1) / 2.0;
  k.cy = k.cx;
  return k;
}

Rotation rotation_from_viewpoint(const Viewpoint& vp) {
  // Camera (right, down, forward) expressed in the unrotated body frame
  // (forward = +x, left = +y, up = +z).
  Eigen::Matrix3d camera_to_body;
  camera_to_body << 0, 0, 1,
                   -1, 0, 0,
                    0, -1, 0;
  const Eigen::Matrix3d yaw = Eigen::AngleAxisd(vp.yaw_rad(), Eigen::Vector3d::UnitZ()).matrix();
  const Eigen::Matrix3d pitch =
      Eigen::AngleAxisd(-vp.pitch_rad(), Eigen::Vector3d::UnitY()).matrix();
  return Rotation(yaw * pitch * camera_to_body);
}

}  // namespace panoscan
