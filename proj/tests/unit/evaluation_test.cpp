#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/evaluation.hpp"

using namespace panoscan;

namespace {

// A few random ellipses, some of them straddling the left/right border.
BinaryMask random_blobs(int w, int h, std::mt19937_64& rng) {
  BinaryMask m(w, h);
  const int blobs = 1 + static_cast<int>(rng() % 4);
  for (int b = 0; b < blobs; ++b) {
    const double cu = static_cast<double>(rng() % w);
    const double cv = static_cast<double>(rng() % h);
    const double ru = 2 + static_cast<double>(rng() % (w / 4));
    const double rv = 2 + static_cast<double>(rng() % (h / 3));
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        double du = std::abs(u - cu);
        du = std::min(du, w - du);
        if ((du / ru) * (du / ru) + ((v - cv) / rv) * ((v - cv) / rv) <= 1.0) {
          m.at(u, v) = 1;
        }
      }
    }
  }
  return m;
}

BinaryMask perturb(const BinaryMask& gt, std::mt19937_64& rng) {
  BinaryMask p = gt;
  std::mt19937_64 copy = rng;
  const BinaryMask extra = random_blobs(gt.width(), gt.height(), copy);
  rng.discard(7);
  for (std::size_t i = 0; i < p.pixel_count(); ++i) {
    if (extra.data()[i]) {
      p.data()[i] = (rng() % 3 == 0) ? 1 - p.data()[i] : p.data()[i];
    }
  }
  return p;
}

void fill_rect(BinaryMask& m, int u0, int v0, int w, int h, std::uint8_t value = 1) {
  for (int v = v0; v < v0 + h; ++v) {
    for (int u = u0; u < u0 + w; ++u) {
      m.at(u % m.width(), v) = value;
    }
  }
}

}  // namespace

TEST(Iou, Examples) {
  BinaryMask a(8, 4);
  BinaryMask b(8, 4);
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0);
  fill_rect(a, 0, 0, 4, 2);
  EXPECT_DOUBLE_EQ(iou(a, b), 0.0);
  fill_rect(b, 2, 0, 4, 2);
  EXPECT_DOUBLE_EQ(iou(a, b), 4.0 / 12.0);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_THROW(iou(a, BinaryMask(4, 2)), UsageError);
}

TEST(DistanceTransform, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask m = random_blobs(128, 64, rng);
    EXPECT_EQ(squared_distance_to_boundary(m), oracle::brute_distance(m)) << trial;
  }
}

TEST(DistanceTransform, SinglePixelAndFullMask) {
  BinaryMask one(16, 8);
  one.at(0, 4) = 1;
  const auto d = squared_distance_to_boundary(one);
  EXPECT_EQ(d[4 * 16 + 0], 1);
  BinaryMask full(16, 8, 1, 1);
  const auto f = squared_distance_to_boundary(full);
  // Only the virtual rows above and below are outside.
  EXPECT_EQ(f[0], 1);
  EXPECT_EQ(f[3 * 16 + 5], 16);
  EXPECT_EQ(f[4 * 16 + 5], 16);
  EXPECT_EQ(f[7 * 16 + 9], 1);
}

TEST(Components, MatchUnionFindAndWrap) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask m = random_blobs(128, 64, rng);
    const Components c = connected_components(m);
    const auto ref = oracle::brute_components(m);
    ASSERT_EQ(c.sizes.size(), ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_EQ(c.sizes[k], ref[k].size());
      for (const int i : ref[k]) {
        EXPECT_EQ(c.labels[i], static_cast<int>(k));
      }
    }
  }
  BinaryMask seam(16, 8);
  seam.at(0, 3) = 1;
  seam.at(15, 3) = 1;
  EXPECT_EQ(connected_components(seam).sizes.size(), 1u);
  BinaryMask diag(16, 8);
  diag.at(4, 3) = 1;
  diag.at(5, 4) = 1;
  EXPECT_EQ(connected_components(diag, Connectivity::eight).sizes.size(), 1u);
  EXPECT_EQ(connected_components(diag, Connectivity::four).sizes.size(), 2u);
}

TEST(InitialClick, FarthestPixelWithRowMajorTies) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask m = random_blobs(128, 64, rng);
    const auto ref = oracle::brute_farthest(m);
    const PromptPoint p = initial_click(m);
    EXPECT_EQ(p.u, (*ref)[0]);
    EXPECT_EQ(p.v, (*ref)[1]);
    EXPECT_EQ(p.label, PromptLabel::positive);
  }
  BinaryMask square(32, 16);
  fill_rect(square, 10, 5, 4, 4);
  // Four pixels tie at distance 2; the top-left one wins.
  const PromptPoint p = initial_click(square);
  EXPECT_EQ(p.u, 11);
  EXPECT_EQ(p.v, 6);
  EXPECT_THROW(initial_click(BinaryMask(32, 16)), DomainError);
}

TEST(InitialClick, SeamStraddlingMaskUsesWrappedDistance) {
  BinaryMask m(64, 32);
  fill_rect(m, 60, 10, 9, 9);  // columns 60..63 and 0..4
  const PromptPoint p = initial_click(m);
  EXPECT_EQ(p.u, 0);
  EXPECT_EQ(p.v, 14);
}

TEST(CorrectionClick, MatchesReference) {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask gt = random_blobs(128, 64, rng);
    const BinaryMask pred = perturb(gt, rng);
    const auto got = correction_click(pred, gt);
    const auto ref = oracle::brute_correction(pred, gt);
    ASSERT_EQ(got.has_value(), ref.has_value());
    if (got) {
      EXPECT_EQ(*got, *ref) << trial;
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(CorrectionClick, LargestRegionWinsAndTiesPreferFalseNegative) {
  BinaryMask gt(64, 32);
  BinaryMask pred(64, 32);
  fill_rect(gt, 2, 2, 8, 5);     // 40-pixel miss
  fill_rect(pred, 30, 10, 37, 1);  // 37-pixel spurious strip, wraps the seam
  auto c = correction_click(pred, gt);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->label, PromptLabel::positive);
  EXPECT_EQ(c->v, 4);

  fill_rect(pred, 30, 11, 3, 1);  // spurious region now 40 pixels: a tie
  c = correction_click(pred, gt);
  EXPECT_EQ(c->label, PromptLabel::positive);
  c = correction_click(pred, gt, {Connectivity::eight, false});
  EXPECT_EQ(c->label, PromptLabel::negative);

  fill_rect(pred, 40, 20, 1, 1);
  fill_rect(pred, 30, 12, 1, 1);  // 41 pixels now
  c = correction_click(pred, gt);
  EXPECT_EQ(c->label, PromptLabel::negative);
  EXPECT_FALSE(correction_click(gt, gt));
}

TEST(Protocol, OracleLikeSegmenterScoresOne) {
  auto labels = std::make_shared<LabelImage>(128, 64);
  for (int v = 10; v < 30; ++v) {
    for (int u = 20; u < 50; ++u) {
      labels->at(u, v) = 3;
    }
  }
  const std::vector<BenchmarkItem> bench{{"a", std::make_shared<RgbImage>(128, 64, 3), labels, 3}};
  int calls = 0;
  const auto perfect = [&](const BenchmarkItem& item, std::span<const PromptPoint>) {
    ++calls;
    return label_equals(*item.labels, item.instance_id);
  };
  const BenchmarkReport r = run_protocol(bench, 3, perfect);
  EXPECT_EQ(calls, 1);
  ASSERT_TRUE(r.miou);
  EXPECT_DOUBLE_EQ(*r.miou, 1.0);
  EXPECT_EQ(r.round_miou, (std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_EQ(r.bucket_counts[static_cast<int>(SizeBucket::large)], 1);
  EXPECT_FALSE(r.bucket_miou[0]);
}

TEST(Protocol, EmptySegmenterAndFailuresAreReported) {
  auto labels = std::make_shared<LabelImage>(128, 64);
  for (int v = 10; v < 14; ++v) {
    for (int u = 20; u < 24; ++u) {
      labels->at(u, v) = 1;
    }
  }
  const auto rgb = std::make_shared<RgbImage>(128, 64, 3);
  const std::vector<BenchmarkItem> bench{{"small", rgb, labels, 1}, {"absent", rgb, labels, 9}};
  std::vector<std::size_t> clicks_seen;
  const auto empty = [&](const BenchmarkItem& item, std::span<const PromptPoint> clicks) {
    clicks_seen.push_back(clicks.size());
    return BinaryMask(item.labels->width(), item.labels->height());
  };
  const BenchmarkReport r = run_protocol(bench, 3, empty);
  EXPECT_EQ(clicks_seen, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(r.failed, 1);
  ASSERT_TRUE(r.miou);
  EXPECT_DOUBLE_EQ(*r.miou, 0.0);
  EXPECT_TRUE(r.instances[1].failed);
  const auto throwing = [](const BenchmarkItem&, std::span<const PromptPoint>) -> BinaryMask {
    throw TransportError("down", "segmenter.propagate");
  };
  const BenchmarkReport f = run_protocol(bench, 1, throwing);
  EXPECT_EQ(f.failed, 2);
  EXPECT_FALSE(f.miou);
  const nlohmann::json j = report_to_json(r);
  EXPECT_EQ(j["rounds"], 3);
  EXPECT_NE(format_report_table(r).find("Overall"), std::string::npos);
  EXPECT_THROW(run_protocol(bench, 0, empty), UsageError);
}
