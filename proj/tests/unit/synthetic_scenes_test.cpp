#include <gtest/gtest.h>

#include "oracles.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/synthetic_scenes.hpp"

using namespace panoscan;

namespace {

// Share of the sphere covered by pixels with label `id`, each weighted by its solid angle.
double solid_angle_share(const LabelImage& labels, std::uint16_t id) {
  const int w = labels.width();
  const int h = labels.height();
  double s = 0.0;
  for (int v = 0; v < h; ++v) {
    const double cell = std::cos(oracle::erp_theta(v, h)) * (oracle::kPi / h) * (2 * oracle::kPi / w);
    for (int u = 0; u < w; ++u) {
      if (labels.at(u, v) == id) {
        s += cell;
      }
    }
  }
  return s / (4 * oracle::kPi);
}

}  // namespace

TEST(RenderScene, CapAreaMatchesAnalyticShare) {
  for (const double radius_deg : {5.0, 20.0, 45.0}) {
    for (const double lat : {0.0, 50.0, -75.0}) {
      SphericalScene scene;
      scene.instances.push_back(
          {7, SphericalCap{SphericalCoord(deg_to_rad(lat), deg_to_rad(100)), deg_to_rad(radius_deg)}, {1, 2, 3}});
      const RenderedScene r = render_scene(scene, 2048, 1024);
      const double expect = oracle::cap_fraction(deg_to_rad(radius_deg));
      EXPECT_NEAR(solid_angle_share(r.labels, 7) / expect, 1.0, radius_deg < 10 ? 0.02 : 0.005)
          << radius_deg << " " << lat;
    }
  }
}

TEST(RenderScene, PixelMembershipMatchesAngularDistance) {
  SphericalScene scene;
  const double radius = deg_to_rad(25);
  scene.instances.push_back({3, SphericalCap{SphericalCoord(0.3, 2.0), radius}, {9, 9, 9}});
  const RenderedScene r = render_scene(scene, 512, 256);
  const oracle::Vec3 c = oracle::direction(0.3, 2.0);
  for (int v = 0; v < 256; ++v) {
    for (int u = 0; u < 512; ++u) {
      const double ang = std::acos(std::clamp(
          oracle::dot(c, oracle::direction(oracle::erp_theta(v, 256), oracle::erp_phi(u, 512))), -1.0, 1.0));
      if (std::abs(ang - radius) > 1e-9) {
        EXPECT_EQ(r.labels.at(u, v) == 3, ang < radius) << u << " " << v;
      }
    }
  }
  EXPECT_EQ(r.rgb.at(0, 0, 0), 32);
}

TEST(RenderScene, SeamRectangleWrapsAndPoleBandSpansAllColumns) {
  SphericalScene scene;
  scene.instances.push_back({1, LatLonRect{deg_to_rad(-10), deg_to_rad(10), deg_to_rad(170), deg_to_rad(-170)}, {255, 0, 0}});
  scene.instances.push_back({2, LatitudeBand{deg_to_rad(80), deg_to_rad(90)}, {0, 0, 255}});
  const RenderedScene r = render_scene(scene, 720, 360);
  EXPECT_EQ(r.labels.at(0, 180), 1);
  EXPECT_EQ(r.labels.at(719, 180), 1);
  EXPECT_EQ(r.labels.at(360, 180), 0);
  EXPECT_EQ(r.labels.at(20, 180), 0);
  for (int u = 0; u < 720; ++u) {
    EXPECT_EQ(r.labels.at(u, 0), 2);
    EXPECT_EQ(r.labels.at(u, 19), 2);
    EXPECT_EQ(r.labels.at(u, 20), 0);
  }
  EXPECT_EQ(r.rgb.at(0, 180, 0), 255);
  EXPECT_EQ(r.rgb.at(5, 5, 2), 255);
  // 20 degrees of longitude across the seam at 2 px per degree.
  int row_count = 0;
  for (int u = 0; u < 720; ++u) {
    row_count += r.labels.at(u, 180) == 1;
  }
  EXPECT_EQ(row_count, 40);
}

TEST(RenderScene, LaterInstancesOcclude) {
  SphericalScene scene;
  scene.instances.push_back({1, SphericalCap{SphericalCoord(0, 0), deg_to_rad(30)}, {1, 1, 1}});
  scene.instances.push_back({2, SphericalCap{SphericalCoord(0, 0), deg_to_rad(10)}, {2, 2, 2}});
  const RenderedScene r = render_scene(scene, 256, 128);
  EXPECT_EQ(r.labels.at(127, 63), 2);
}

TEST(RenderScene, RejectsBadScenes) {
  SphericalScene dup;
  dup.instances.push_back({1, SphericalCap{SphericalCoord(0, 0), 0.1}, {}});
  dup.instances.push_back({1, SphericalCap{SphericalCoord(0, 1), 0.1}, {}});
  EXPECT_THROW(render_scene(dup, 64, 32), DataError);
  SphericalScene zero;
  zero.instances.push_back({0, SphericalCap{SphericalCoord(0, 0), 0.1}, {}});
  EXPECT_THROW(render_scene(zero, 64, 32), DataError);
  SphericalScene flat;
  flat.instances.push_back({4, LatitudeBand{0.2, 0.2}, {}});
  EXPECT_THROW(render_scene(flat, 64, 32), DataError);
  EXPECT_THROW(render_scene(SphericalScene{}, 64, 30), DataError);
}

TEST(SizeBuckets, BoundaryAreasAtReferenceResolution) {
  EXPECT_EQ(classify_area(1, 4096, 2048), SizeBucket::small);
  EXPECT_EQ(classify_area(4096, 4096, 2048), SizeBucket::small);
  EXPECT_EQ(classify_area(4097, 4096, 2048), SizeBucket::medium);
  EXPECT_EQ(classify_area(36864, 4096, 2048), SizeBucket::medium);
  EXPECT_EQ(classify_area(36865, 4096, 2048), SizeBucket::large);
  EXPECT_THROW(classify_area(0, 4096, 2048), DomainError);
}

TEST(SizeBuckets, ThresholdsScaleWithPixelCount) {
  EXPECT_EQ(classify_area(1024, 2048, 1024), SizeBucket::small);
  EXPECT_EQ(classify_area(1025, 2048, 1024), SizeBucket::medium);
  EXPECT_EQ(classify_area(9216, 2048, 1024), SizeBucket::medium);
  EXPECT_EQ(classify_area(9217, 2048, 1024), SizeBucket::large);
  const SizeThresholds t = size_thresholds(8192, 4096);
  EXPECT_DOUBLE_EQ(t.small_max, 4096.0 * 4);
  EXPECT_DOUBLE_EQ(t.medium_max, 36864.0 * 4);
}

TEST(SizeBuckets, CensusCountsEachInstance) {
  LabelImage labels(256, 128);
  // Thresholds here are 16 and 144 pixels.
  for (int i = 0; i < 16; ++i) {
    labels.data()[i] = 1;
  }
  for (int i = 100; i < 100 + 144; ++i) {
    labels.data()[i] = 2;
  }
  for (int i = 1000; i < 1000 + 145; ++i) {
    labels.data()[i] = 5;
  }
  const SizeCensus c = scene_size_census(labels);
  ASSERT_EQ(c.instances.size(), 3u);
  EXPECT_EQ(c.instances[0].bucket, SizeBucket::small);
  EXPECT_EQ(c.instances[1].bucket, SizeBucket::medium);
  EXPECT_EQ(c.instances[2].id, 5);
  EXPECT_EQ(c.instances[2].bucket, SizeBucket::large);
  EXPECT_EQ(c.counts, (std::array<int, 3>{1, 1, 1}));
  EXPECT_EQ(to_string(SizeBucket::medium), "medium");
}

TEST(RandomScene, DeterministicAndHonoursLayout) {
  RandomSceneOptions opt;
  opt.instance_count = 6;
  opt.seam_crossing = 2;
  opt.pole_adjacent = 1;
  const SphericalScene a = random_scene(42, opt);
  const SphericalScene b = random_scene(42, opt);
  const RenderedScene ra = render_scene(a, 1024, 512);
  const RenderedScene rb = render_scene(b, 1024, 512);
  EXPECT_TRUE(ra.labels == rb.labels);
  EXPECT_TRUE(ra.rgb == rb.rgb);
  ASSERT_EQ(a.instances.size(), 6u);
  // Every instance survives in the label plane (no overlap).
  const SizeCensus census = scene_size_census(ra.labels);
  EXPECT_EQ(census.instances.size(), 6u);
  int seam = 0;
  for (const auto& inst : a.instances) {
    bool left = false;
    bool right = false;
    for (int v = 0; v < 512; ++v) {
      left = left || ra.labels.at(0, v) == inst.id;
      right = right || ra.labels.at(1023, v) == inst.id;
    }
    seam += left && right;
  }
  EXPECT_GE(seam, 2);
  const RenderedScene rc = render_scene(random_scene(43, opt), 1024, 512);
  EXPECT_FALSE(ra.labels == rc.labels);
}

TEST(RandomScene, RejectsImpossibleMix) {
  RandomSceneOptions opt;
  opt.instance_count = 2;
  opt.seam_crossing = 2;
  opt.pole_adjacent = 1;
  EXPECT_THROW(random_scene(1, opt), DataError);
}
