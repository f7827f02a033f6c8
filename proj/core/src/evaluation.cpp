#include "panoscan/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <limits>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw UsageError("masks differ in size");
  }
}

// Lower envelope of parabolas (q - p)^2 + f[p]; returns the minimum at every q.
void envelope_1d(std::span<const std::int64_t> f, std::span<std::int64_t> out, std::vector<int>& hull,
                 std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  hull.assign(n, 0);
  bounds.assign(n + 1, 0.0);
  auto intersect = [&](int a, int b) {
    const double fa = static_cast<double>(f[a]) + static_cast<double>(a) * a;
    const double fb = static_cast<double>(f[b]) + static_cast<double>(b) * b;
    return (fb - fa) / (2.0 * (b - a));
  };
  int k = 0;
  bounds[0] = -std::numeric_limits<double>::infinity();
  bounds[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = intersect(hull[k], q);
    while (k > 0 && s <= bounds[k]) {
      --k;
      s = intersect(hull[k], q);
    }
    ++k;
    hull[k] = q;
    bounds[k] = s;
    bounds[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (bounds[k + 1] < q) {
      ++k;
    }
    const std::int64_t d = q - hull[k];
    out[q] = d * d + f[hull[k]];
  }
}

struct Argmax {
  int u = -1;
  int v = -1;
};

// Raster-order scan keeps the first maximum, i.e. smallest row then column.
Argmax farthest_pixel(const BinaryMask& mask) {
  const std::vector<std::int64_t> dist = squared_distance_to_boundary(mask);
  Argmax best;
  std::int64_t best_d = -1;
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (mask.at(u, v) == 0) {
        continue;
      }
      const std::int64_t d = dist[static_cast<std::size_t>(v) * mask.width() + u];
      if (d > best_d) {
        best_d = d;
        best = {u, v};
      }
    }
  }
  return best;
}

}  // namespace

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt);
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto p = pred.data();
  const auto g = gt.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0;
    const bool b = g[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::int64_t> squared_distance_to_boundary(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::int64_t> column_pass(static_cast<std::size_t>(w) * h);

  // Vertical: distance to the nearest outside pixel in the same column,
  // with virtual outside rows at v = -1 and v = h.
  std::vector<int> up(h);
  for (int u = 0; u < w; ++u) {
    int last = -1;
    for (int v = 0; v < h; ++v) {
      if (mask.at(u, v) == 0) {
        last = v;
      }
      up[v] = v - last;
    }
    last = h;
    for (int v = h - 1; v >= 0; --v) {
      if (mask.at(u, v) == 0) {
        last = v;
      }
      const std::int64_t d = std::min(up[v], last - v);
      column_pass[static_cast<std::size_t>(v) * w + u] = d * d;
    }
  }

  // Horizontal: the row is laid out three times so the envelope sees
  // neighbours across the seam.
  std::vector<std::int64_t> out(column_pass.size());
  std::vector<std::int64_t> tripled(3 * static_cast<std::size_t>(w));
  std::vector<std::int64_t> result(tripled.size());
  std::vector<int> hull;
  std::vector<double> bounds;
  for (int v = 0; v < h; ++v) {
    const auto row = std::span<const std::int64_t>(column_pass).subspan(static_cast<std::size_t>(v) * w, w);
    for (int r = 0; r < 3; ++r) {
      std::copy(row.begin(), row.end(), tripled.begin() + static_cast<std::ptrdiff_t>(r) * w);
    }
    envelope_1d(tripled, result, hull, bounds);
    std::copy_n(result.begin() + w, w, out.begin() + static_cast<std::ptrdiff_t>(v) * w);
  }
  return out;
}

Components connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Components comps;
  comps.labels.assign(mask.pixel_count(), -1);
  std::deque<std::pair<int, int>> queue;
  const bool eight = connectivity == Connectivity::eight;
  for (int v0 = 0; v0 < h; ++v0) {
    for (int u0 = 0; u0 < w; ++u0) {
      const std::size_t i0 = static_cast<std::size_t>(v0) * w + u0;
      if (mask.at(u0, v0) == 0 || comps.labels[i0] != -1) {
        continue;
      }
      const int id = static_cast<int>(comps.sizes.size());
      comps.sizes.push_back(0);
      comps.labels[i0] = id;
      queue.emplace_back(u0, v0);
      while (!queue.empty()) {
        const auto [u, v] = queue.front();
        queue.pop_front();
        ++comps.sizes[id];
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            if ((du == 0 && dv == 0) || (!eight && du != 0 && dv != 0)) {
              continue;
            }
            const int nv = v + dv;
            if (nv < 0 || nv >= h) {
              continue;
            }
            const int nu = (u + du + w) % w;
            const std::size_t ni = static_cast<std::size_t>(nv) * w + nu;
            if (mask.at(nu, nv) != 0 && comps.labels[ni] == -1) {
              comps.labels[ni] = id;
              queue.emplace_back(nu, nv);
            }
          }
        }
      }
    }
  }
  return comps;
}

PromptPoint initial_click(const BinaryMask& gt) {
  const Argmax best = farthest_pixel(gt);
  if (best.u < 0) {
    throw DomainError("cannot place a click in an empty mask");
  }
  return {static_cast<double>(best.u), static_cast<double>(best.v), PromptLabel::positive};
}

std::optional<PromptPoint> correction_click(const BinaryMask& pred, const BinaryMask& gt,
                                            const ClickOptions& options) {
  require_same_shape(pred, gt);
  const int w = gt.width();
  const int h = gt.height();
  BinaryMask fn(w, h);
  BinaryMask fp(w, h);
  bool differs = false;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const bool p = pred.data()[i] != 0;
    const bool g = gt.data()[i] != 0;
    fn.data()[i] = (g && !p) ? 1 : 0;
    fp.data()[i] = (p && !g) ? 1 : 0;
    differs = differs || p != g;
  }
  if (!differs) {
    return std::nullopt;
  }

  const Components fn_comps = connected_components(fn, options.connectivity);
  const Components fp_comps = connected_components(fp, options.connectivity);
  // Components are numbered in raster order, so the first maximum is the one
  // whose first pixel comes first.
  auto largest = [](const Components& c) {
    const auto it = std::max_element(c.sizes.begin(), c.sizes.end());
    return it == c.sizes.end() ? std::make_pair(-1, std::size_t{0})
                               : std::make_pair(static_cast<int>(it - c.sizes.begin()), *it);
  };
  const auto [fn_id, fn_size] = largest(fn_comps);
  const auto [fp_id, fp_size] = largest(fp_comps);
  bool pick_fn = fn_size > fp_size;
  if (fn_size == fp_size) {
    pick_fn = options.prefer_false_negative_on_tie;
  }
  const Components& chosen = pick_fn ? fn_comps : fp_comps;
  const int chosen_id = pick_fn ? fn_id : fp_id;

  BinaryMask region(w, h);
  for (std::size_t i = 0; i < region.pixel_count(); ++i) {
    region.data()[i] = chosen.labels[i] == chosen_id ? 1 : 0;
  }
  const Argmax best = farthest_pixel(region);
  return PromptPoint{static_cast<double>(best.u), static_cast<double>(best.v),
                     pick_fn ? PromptLabel::positive : PromptLabel::negative};
}

BenchmarkReport run_protocol(std::span<const BenchmarkItem> bench, int rounds, const PanoramaSegmentFn& segment,
                             const ClickOptions& options) {
  if (rounds < 1) {
    throw UsageError("the protocol needs at least one round");
  }
  BenchmarkReport report;
  report.rounds = rounds;
  std::vector<double> round_sums(rounds, 0.0);
  std::array<double, 3> bucket_sums{};
  double total = 0.0;
  int scored = 0;

  for (const BenchmarkItem& item : bench) {
    if (!item.rgb || !item.labels) {
      throw UsageError("benchmark item \"" + item.name + "\" lacks its images");
    }
    InstanceRecord rec;
    rec.name = item.name;
    rec.instance_id = item.instance_id;
    const BinaryMask gt = label_equals(*item.labels, item.instance_id);
    rec.area = static_cast<std::size_t>(std::count(gt.data().begin(), gt.data().end(), std::uint8_t{1}));
    if (rec.area == 0) {
      rec.failed = true;
      rec.failure = "instance " + std::to_string(item.instance_id) + " is absent from the label plane";
      report.instances.push_back(std::move(rec));
      ++report.failed;
      continue;
    }
    rec.bucket = classify_area(rec.area, gt.width(), gt.height());

    try {
      rec.clicks.push_back(initial_click(gt));
      BinaryMask pred = segment(item, rec.clicks);
      rec.iou_per_round.push_back(iou(pred, gt));
      for (int r = 1; r < rounds; ++r) {
        const auto click = correction_click(pred, gt, options);
        if (!click) {
          rec.iou_per_round.push_back(rec.iou_per_round.back());
          continue;
        }
        rec.clicks.push_back(*click);
        pred = segment(item, rec.clicks);
        rec.iou_per_round.push_back(iou(pred, gt));
      }
    } catch (const Error& e) {
      rec.failed = true;
      rec.failure = e.what();
    }

    if (rec.failed) {
      ++report.failed;
    } else {
      for (int r = 0; r < rounds; ++r) {
        round_sums[r] += rec.iou_per_round[r];
      }
      const double final_iou = rec.iou_per_round.back();
      total += final_iou;
      bucket_sums[static_cast<std::size_t>(rec.bucket)] += final_iou;
      ++report.bucket_counts[static_cast<std::size_t>(rec.bucket)];
      ++scored;
    }
    report.instances.push_back(std::move(rec));
  }

  if (scored > 0) {
    report.miou = total / scored;
    for (int r = 0; r < rounds; ++r) {
      report.round_miou.push_back(round_sums[r] / scored);
    }
  }
  for (std::size_t b = 0; b < 3; ++b) {
    if (report.bucket_counts[b] > 0) {
      report.bucket_miou[b] = bucket_sums[b] / report.bucket_counts[b];
    }
  }
  return report;
}

nlohmann::json report_to_json(const BenchmarkReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json instances = nlohmann::json::array();
  for (const InstanceRecord& rec : report.instances) {
    nlohmann::json clicks = nlohmann::json::array();
    for (const PromptPoint& p : rec.clicks) {
      clicks.push_back({{"u", p.u}, {"v", p.v}, {"label", std::string(to_string(p.label))}});
    }
    nlohmann::json entry = {{"name", rec.name},
                            {"instance_id", rec.instance_id},
                            {"area", rec.area},
                            {"bucket", std::string(to_string(rec.bucket))},
                            {"iou_per_round", rec.iou_per_round},
                            {"clicks", clicks},
                            {"failed", rec.failed}};
    if (rec.failed) {
      entry["failure"] = rec.failure;
    }
    instances.push_back(std::move(entry));
  }
  return {{"rounds", report.rounds},
          {"miou", opt(report.miou)},
          {"buckets",
           {{"small", {{"miou", opt(report.bucket_miou[0])}, {"count", report.bucket_counts[0]}}},
            {"medium", {{"miou", opt(report.bucket_miou[1])}, {"count", report.bucket_counts[1]}}},
            {"large", {{"miou", opt(report.bucket_miou[2])}, {"count", report.bucket_counts[2]}}}}},
          {"round_miou", report.round_miou},
          {"failed", report.failed},
          {"instances", instances}};
}

std::string format_report_table(const BenchmarkReport& report) {
  auto pct = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", 100.0 * *v) : std::string("-"); };
  const std::string protocol = report.rounds == 1 ? "1-click" : fmt::format("{}-click", report.rounds);
  std::string out;
  out += fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "Protocol", "Overall", "Small", "Medium", "Large");
  out += fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", protocol, pct(report.miou), pct(report.bucket_miou[0]),
                     pct(report.bucket_miou[1]), pct(report.bucket_miou[2]));
  const int total = report.bucket_counts[0] + report.bucket_counts[1] + report.bucket_counts[2];
  out += fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "instances", total, report.bucket_counts[0],
                     report.bucket_counts[1], report.bucket_counts[2]);
  for (std::size_t r = 0; r < report.round_miou.size(); ++r) {
    out += fmt::format("round {:<6}{:>10.2f}\n", r + 1, 100.0 * report.round_miou[r]);
  }
  if (report.failed > 0) {
    out += fmt::format("warning: {} instance(s) failed and were excluded\n", report.failed);
  }
  return out;
}

}  // namespace panoscan
