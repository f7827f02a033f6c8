#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/prompt_projection.hpp"
#include "panoscan/viewport_projection.hpp"

using namespace panoscan;

TEST(ProjectPrompt, CenterLandsOnPrincipalPoint) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 1024);
  const auto fp = project_prompt({2047.5, 1023.5, PromptLabel::positive}, Viewpoint(0, 0), k, 4096, 2048, 3);
  ASSERT_TRUE(fp);
  EXPECT_NEAR(fp->u_hat, 511.5, 1e-9);
  EXPECT_NEAR(fp->v_hat, 511.5, 1e-9);
  EXPECT_EQ(fp->frame_index, 3);
  EXPECT_EQ(fp->label, PromptLabel::positive);
}

TEST(ProjectPrompt, BehindCameraIsInvisible) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 1024);
  EXPECT_FALSE(project_prompt({0.0, 1023.5, PromptLabel::positive}, Viewpoint(0, 0), k, 4096, 2048));
  EXPECT_FALSE(project_prompt({4095.0, 1023.5, PromptLabel::negative}, Viewpoint(0, 0), k, 4096, 2048));
}

TEST(ProjectPrompt, FortyFiveDegreesOffCenterHitsEdgeColumns) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 1024);
  // Pixel centers at u = 2047.5 +- 512 are exactly 45 degrees either side of yaw 0.
  std::vector<double> edges;
  for (const double u : {2047.5 - 512.0, 2047.5 + 512.0}) {
    const auto fp = project_prompt({u, 1023.5, PromptLabel::positive}, Viewpoint(0, 0), k, 4096, 2048);
    ASSERT_TRUE(fp.has_value());
    EXPECT_NEAR(fp->v_hat, 511.5, 1e-6);
    edges.push_back(fp->u_hat);
  }
  std::sort(edges.begin(), edges.end());
  EXPECT_NEAR(edges[0], 0.0, 1e-6);
  EXPECT_NEAR(edges[1], 1023.0, 1e-6);
}

TEST(ProjectPrompt, RejectsOutOfBoundsClick) {
  const CameraIntrinsics k = intrinsics_from_fov(90, 64);
  EXPECT_THROW(project_prompt({-1, 5, PromptLabel::positive}, Viewpoint(0, 0), k, 128, 64), DomainError);
  EXPECT_THROW(project_prompt({5, 64, PromptLabel::positive}, Viewpoint(0, 0), k, 128, 64), DomainError);
}

TEST(VisibleFrames, EquatorFrameCenterMatchesBruteForce) {
  const ScanTrajectory t = generate_trajectory({});
  const CameraIntrinsics k = t.intrinsics();
  // Frame 4 is (yaw 45, pitch 0).
  ASSERT_EQ(t[4].viewpoint, Viewpoint(45, 0));
  const PromptPoint p{(45.0 + 180.0) / 360.0 * 4096 - 0.5, 1023.5, PromptLabel::positive};
  const auto vis = visible_frames(p, t, k, 4096, 2048);
  std::vector<int> expect;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const oracle::Camera cam(t[i].viewpoint.yaw_deg(), t[i].viewpoint.pitch_deg(), 90, 1024);
    if (cam.project(oracle::direction(oracle::erp_theta(p.v, 4096 / 2), oracle::erp_phi(p.u, 4096)))) {
      expect.push_back(static_cast<int>(i));
    }
  }
  std::vector<int> got;
  for (const auto& fp : vis) {
    got.push_back(fp.frame_index);
  }
  EXPECT_EQ(got, expect);
  EXPECT_TRUE(std::find(got.begin(), got.end(), 4) != got.end());
  EXPECT_GE(got.size(), 5u);
}

TEST(VisibleFrames, PoleAdjacentPromptSeenByTopRow) {
  const ScanTrajectory t = generate_trajectory({});
  const CameraIntrinsics k = t.intrinsics();
  const double v = (90.0 - 85.0) / 180.0 * 2048 - 0.5;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uu(0, 4095);
  for (int trial = 0; trial < 50; ++trial) {
    const PromptPoint p{uu(rng), v, PromptLabel::positive};
    const auto vis = visible_frames(p, t, k, 4096, 2048);
    std::vector<int> expect;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const oracle::Camera cam(t[i].viewpoint.yaw_deg(), t[i].viewpoint.pitch_deg(), 90, 1024);
      if (cam.project(oracle::direction(oracle::erp_theta(p.v, 2048), oracle::erp_phi(p.u, 4096)))) {
        expect.push_back(static_cast<int>(i));
      }
    }
    ASSERT_EQ(vis.size(), expect.size());
    for (std::size_t j = 0; j < vis.size(); ++j) {
      EXPECT_EQ(vis[j].frame_index, expect[j]);
      EXPECT_EQ(t[vis[j].frame_index].row, 1);
    }
  }
}

TEST(VisibleFrames, RandomPromptsAgreeWithReference) {
  const ScanTrajectory t = generate_trajectory({});
  const CameraIntrinsics k = t.intrinsics();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uu(0, 2047);
  std::uniform_real_distribution<double> vv(0, 1023);
  for (int trial = 0; trial < 500; ++trial) {
    const PromptPoint p{uu(rng), vv(rng), PromptLabel::positive};
    const auto vis = visible_frames(p, t, k, 2048, 1024);
    std::size_t expect = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const oracle::Camera cam(t[i].viewpoint.yaw_deg(), t[i].viewpoint.pitch_deg(), 90, 1024);
      const auto ref = cam.project(oracle::direction(oracle::erp_theta(p.v, 1024), oracle::erp_phi(p.u, 2048)));
      const auto got = project_prompt(p, t[i].viewpoint, k, 2048, 1024);
      ASSERT_EQ(ref.has_value(), got.has_value());
      if (ref) {
        ++expect;
        EXPECT_NEAR(got->u_hat, (*ref)[0], 1e-7);
        EXPECT_NEAR(got->v_hat, (*ref)[1], 1e-7);
      }
    }
    EXPECT_EQ(vis.size(), expect);
  }
}

TEST(VisibleFrames, AgreesWithVisibilityMask) {
  const ScanTrajectory t = generate_trajectory({90, 90, 0.5, 128});
  const CameraIntrinsics k = t.intrinsics();
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> uu(0, 511);
  std::uniform_int_distribution<int> vv(0, 255);
  for (std::size_t i = 0; i < t.size(); i += 5) {
    const BinaryMask vis = visibility_mask(t[i].viewpoint, k, 512, 256);
    for (int trial = 0; trial < 500; ++trial) {
      const int u = uu(rng);
      const int v = vv(rng);
      const bool p = project_prompt({double(u), double(v), PromptLabel::positive}, t[i].viewpoint, k, 512, 256)
                         .has_value();
      EXPECT_EQ(p, vis.at(u, v) == 1);
    }
  }
}

TEST(VisibleFrames, RenderedColorMatchesErpColor) {
  const int w = 1024;
  RgbImage pano(w, w / 2, 3);
  for (int v = 0; v < w / 2; ++v) {
    for (int u = 0; u < w; ++u) {
      // Smooth, seam-continuous content.
      const double phi = oracle::erp_phi(u, w);
      const double th = oracle::erp_theta(v, w / 2);
      pano.at(u, v, 0) = static_cast<std::uint8_t>(127.5 + 120 * std::sin(phi));
      pano.at(u, v, 1) = static_cast<std::uint8_t>(127.5 + 120 * std::cos(2 * th));
      pano.at(u, v, 2) = static_cast<std::uint8_t>(127.5 + 120 * std::cos(phi) * std::cos(th));
    }
  }
  const ScanTrajectory t = generate_trajectory({90, 90, 0.5, 256});
  const CameraIntrinsics k = t.intrinsics();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> uu(0, w - 1);
  std::uniform_int_distribution<int> vv(w / 8, 3 * w / 8);
  for (int trial = 0; trial < 40; ++trial) {
    const PromptPoint p{double(uu(rng)), double(vv(rng)), PromptLabel::positive};
    for (const auto& fp : visible_frames(p, t, k, w, w / 2)) {
      // Stay about two degrees clear of frame edges.
      if (fp.u_hat < 6 || fp.v_hat < 6 || fp.u_hat > 249 || fp.v_hat > 249) {
        continue;
      }
      const FloatImage ch = [&] {
        FloatImage f(w, w / 2);
        for (std::size_t i = 0; i < f.pixel_count(); ++i) {
          f.data()[i] = pano.data()[3 * i] / 255.0F;
        }
        return f;
      }();
      const FloatImage frame = render_viewport(ch, build_sampling_grid(t[fp.frame_index].viewpoint, k, w, w / 2),
                                               Interpolation::bilinear);
      MaskImage fm(frame.width(), frame.height());
      std::copy(frame.data().begin(), frame.data().end(), fm.data().begin());
      const float seen = sample_bilinear(fm, fp.u_hat, fp.v_hat);
      const float truth = ch.at(static_cast<int>(p.u), static_cast<int>(p.v));
      EXPECT_NEAR(seen, truth, 2.0 / 255 + 1e-4);
    }
  }
}

TEST(ReorderStart, Examples) {
  const std::vector<FramePrompt> a{{0, 1, 1, PromptLabel::positive}, {1, 2, 2, PromptLabel::positive}};
  const ReorderedVideo r0 = reorder_start(24, a);
  EXPECT_EQ(r0.start, 0);
  for (int i = 0; i < 24; ++i) {
    EXPECT_EQ(r0.order[i], i);
  }
  const std::vector<FramePrompt> b{{5, 10, 10, PromptLabel::positive}};
  const ReorderedVideo r5 = reorder_start(24, b);
  EXPECT_EQ(r5.start, 5);
  EXPECT_EQ(r5.order.front(), 5);
  EXPECT_EQ(r5.order[18], 23);
  EXPECT_EQ(r5.order[19], 0);
  EXPECT_EQ(r5.order.back(), 4);
  EXPECT_EQ(r5.prompts[0].frame_index, 0);
  EXPECT_DOUBLE_EQ(r5.prompts[0].u_hat, 10.0);
}

TEST(ReorderStart, IsRotationWithEarliestAtZero) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    std::vector<FramePrompt> vis;
    const int count = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < count; ++i) {
      vis.push_back({static_cast<int>(rng() % n), 0, 0, PromptLabel::positive});
    }
    const ReorderedVideo r = reorder_start(n, vis);
    std::vector<int> sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(sorted[i], i);
      EXPECT_EQ(r.order[i], (r.start + i) % n);
    }
    int earliest = n;
    for (const auto& fp : r.prompts) {
      EXPECT_LT(fp.frame_index, n);
      earliest = std::min(earliest, fp.frame_index);
    }
    EXPECT_EQ(earliest, 0);
  }
  EXPECT_THROW(reorder_start(24, {}), UsageError);
}

TEST(PromptLabel, StringRoundTrip) {
  EXPECT_EQ(prompt_label_from_string(to_string(PromptLabel::negative)), PromptLabel::negative);
  EXPECT_EQ(prompt_label_from_string("positive"), PromptLabel::positive);
  EXPECT_THROW(prompt_label_from_string("maybe"), DataError);
}
