#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "oracles.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/sphere_geometry.hpp"

using namespace panoscan;

TEST(ErpMapping, ImageCenterIsSphereFront) {
  const SphericalCoord c = erp_pixel_to_sph(2047.5, 1023.5, 4096, 2048);
  EXPECT_NEAR(c.theta(), 0.0, 1e-15);
  EXPECT_NEAR(c.phi(), 0.0, 1e-15);
}

TEST(ErpMapping, TopLeftPixelCenter) {
  const SphericalCoord c = erp_pixel_to_sph(0, 0, 4096, 2048);
  EXPECT_NEAR(c.phi(), -kPi + kPi / 4096, 1e-12);
  EXPECT_NEAR(c.theta(), kPi / 2 - kPi / 4096, 1e-12);
}

TEST(ErpMapping, RejectsOutOfRangeAndBadAspect) {
  EXPECT_THROW(erp_pixel_to_sph(-0.1, 5, 64, 32), DomainError);
  EXPECT_THROW(erp_pixel_to_sph(64, 5, 64, 32), DomainError);
  EXPECT_THROW(erp_pixel_to_sph(3, 32, 64, 32), DomainError);
  EXPECT_THROW(erp_pixel_to_sph(3, 3, 60, 32), DomainError);
}

TEST(ErpMapping, InverseAtFrontAndPole) {
  const Eigen::Vector2d front = sph_to_erp_pixel(SphericalCoord(0, 0), 4096, 2048);
  EXPECT_DOUBLE_EQ(front.x(), 2047.5);
  EXPECT_DOUBLE_EQ(front.y(), 1023.5);
  const Eigen::Vector2d north = sph_to_erp_pixel(SphericalCoord(kPi / 2 - 1e-12, 1.0), 4096, 2048);
  EXPECT_GE(north.y(), -0.5);
  EXPECT_LT(north.y(), -0.5 + 1e-6);
}

TEST(ErpMapping, SeamWrapsModuloWidth) {
  const int w = 4096;
  for (const double eps : {1e-3, 1e-6, 1e-9}) {
    const double u = sph_to_erp_pixel(SphericalCoord(0.2, kPi - eps), w, w / 2).x();
    // Reference: (phi + pi) / 2pi * W - 0.5, reduced into [-0.5, W - 0.5).
    double expect = (kPi - eps + kPi) / (2 * kPi) * w - 0.5;
    expect = std::fmod(expect + 0.5, double(w)) - 0.5;
    EXPECT_NEAR(u, expect, 1e-6);
    EXPECT_LT(u, w - 0.5);
  }
  // phi = pi is the same meridian as -pi and lands on the left edge.
  EXPECT_NEAR(sph_to_erp_pixel(SphericalCoord(0.0, kPi), w, w / 2).x(), -0.5, 1e-9);
}

TEST(ErpMapping, RandomRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uu(0.0, 4096.0);
  std::uniform_real_distribution<double> vv(1.0, 2047.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = uu(rng);
    const double v = vv(rng);
    const Eigen::Vector2d back = sph_to_erp_pixel(erp_pixel_to_sph(u, v, 4096, 2048), 4096, 2048);
    double du = std::abs(back.x() - u);
    du = std::min(du, 4096.0 - du);
    worst = std::max({worst, du, std::abs(back.y() - v)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(UnitVectorMapping, AxisExamples) {
  const UnitVector a = sph_to_vec(SphericalCoord(0, 0));
  EXPECT_DOUBLE_EQ(a.x(), 1.0);
  EXPECT_DOUBLE_EQ(a.y(), 0.0);
  EXPECT_DOUBLE_EQ(a.z(), 0.0);
  const UnitVector b = sph_to_vec(SphericalCoord(kPi / 2, 1.3));
  EXPECT_NEAR(b.x(), 0.0, 1e-15);
  EXPECT_NEAR(b.y(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(b.z(), 1.0);
  const UnitVector c = sph_to_vec(SphericalCoord(0, kPi / 2));
  EXPECT_NEAR(c.x(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.y(), 1.0);
}

TEST(UnitVectorMapping, InverseExamples) {
  const SphericalCoord a = vec_to_sph(UnitVector(0, 1, 0));
  EXPECT_DOUBLE_EQ(a.theta(), 0.0);
  EXPECT_DOUBLE_EQ(a.phi(), kPi / 2);
  const SphericalCoord s = vec_to_sph(UnitVector(0, 0, -1));
  EXPECT_DOUBLE_EQ(s.theta(), -kPi / 2);
  EXPECT_DOUBLE_EQ(s.phi(), 0.0);
  EXPECT_THROW(UnitVector(1.0, 0.1, 0.0), DomainError);
}

TEST(UnitVectorMapping, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(-kPi / 2 + 1e-3, kPi / 2 - 1e-3);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const SphericalCoord c(th(rng), ph(rng));
    const SphericalCoord back = vec_to_sph(sph_to_vec(c));
    double dphi = std::abs(back.phi() - c.phi());
    dphi = std::min(dphi, 2 * kPi - dphi);
    worst = std::max({worst, std::abs(back.theta() - c.theta()), dphi});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Intrinsics, FromFov) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 1024);
  EXPECT_NEAR(k.focal, 511.5, 1e-12);
  EXPECT_DOUBLE_EQ(k.cx, 511.5);
  EXPECT_DOUBLE_EQ(k.cy, 511.5);
  EXPECT_NEAR(intrinsics_from_fov(90, 2).focal, 0.5, 1e-15);
  EXPECT_NEAR(intrinsics_from_fov(60, 1024).focal, 511.5 / std::tan(oracle::kPi / 6), 1e-9);
  EXPECT_THROW(intrinsics_from_fov(0, 1024), DomainError);
  EXPECT_THROW(intrinsics_from_fov(180, 1024), DomainError);
  EXPECT_THROW(intrinsics_from_fov(90, 1), DomainError);
}

TEST(Rotation, ForwardAxisHitsViewpointCenter) {
  const struct {
    double yaw, pitch, x, y, z;
  } cases[] = {{0, 0, 1, 0, 0}, {90, 0, 0, 1, 0}, {0, 45, std::sqrt(0.5), 0, std::sqrt(0.5)}};
  for (const auto& c : cases) {
    const Eigen::Vector3d f = rotation_from_viewpoint(Viewpoint(c.yaw, c.pitch)).to_world({0, 0, 1});
    EXPECT_NEAR(f.x(), c.x, 1e-12);
    EXPECT_NEAR(f.y(), c.y, 1e-12);
    EXPECT_NEAR(f.z(), c.z, 1e-12);
  }
}

TEST(Rotation, OrthonormalNoRollAndMatchesOracleBasis) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> yaw(0, 360);
  std::uniform_real_distribution<double> pitch(-45, 45);
  for (int i = 0; i < 1000; ++i) {
    const Viewpoint vp(yaw(rng), pitch(rng));
    const Eigen::Matrix3d r = rotation_from_viewpoint(vp).matrix();
    EXPECT_LT((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
    // Camera x axis stays horizontal: zero roll.
    EXPECT_NEAR(r(2, 0), 0.0, 1e-12);
    const oracle::Camera cam(vp.yaw_deg(), vp.pitch_deg(), 90, 16);
    EXPECT_NEAR(r(0, 0), cam.right.x, 1e-12);
    EXPECT_NEAR(r(1, 0), cam.right.y, 1e-12);
    EXPECT_NEAR(r(0, 1), cam.down.x, 1e-12);
    EXPECT_NEAR(r(2, 1), cam.down.z, 1e-12);
    EXPECT_NEAR(r(2, 2), cam.forward.z, 1e-12);
  }
}

TEST(Viewpoint, NormalizesYawAndGuardsPitch) {
  EXPECT_DOUBLE_EQ(Viewpoint(-45, 0).yaw_deg(), 315.0);
  EXPECT_DOUBLE_EQ(Viewpoint(720, 0).yaw_deg(), 0.0);
  EXPECT_THROW(Viewpoint(0, 90), DomainError);
  EXPECT_TRUE(Viewpoint(0, 45).pole_safe(90));
  EXPECT_FALSE(Viewpoint(0, 50).pole_safe(90));
}

TEST(SphericalCoord, WrapsLongitudeAndChecksLatitude) {
  EXPECT_DOUBLE_EQ(SphericalCoord(0, kPi).phi(), -kPi);
  EXPECT_NEAR(SphericalCoord(0, 3 * kPi / 2).phi(), -kPi / 2, 1e-15);
  EXPECT_THROW(SphericalCoord(2.0, 0), DomainError);
}
