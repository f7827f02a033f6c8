#pragma once

// Reference implementations used only by tests. They are written for
// clarity, not speed, and share no code with the library beyond plain types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/prompt_projection.hpp"

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x, y, z;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 direction(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), std::sin(theta)};
}

inline double erp_phi(double u, int w) { return ((u + 0.5) / w) * 2.0 * kPi - kPi; }
inline double erp_theta(double v, int h) { return kPi / 2.0 - ((v + 0.5) / h) * kPi; }

/// Pinhole camera built from explicit basis vectors: right, down, forward.
struct Camera {
  Vec3 right, down, forward;
  double f, c;
  int l;

  Camera(double yaw_deg, double pitch_deg, double fov_deg, int size_l) : l(size_l) {
    const double phi = yaw_deg * kPi / 180.0;
    const double theta = pitch_deg * kPi / 180.0;
    forward = direction(theta, phi);
    right = {std::sin(phi), -std::cos(phi), 0.0};
    down = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), -std::cos(theta)};
    f = (size_l - 1) / (2.0 * std::tan(fov_deg * kPi / 360.0));
    c = (size_l - 1) / 2.0;
  }

  /// (u_hat, v_hat) if the direction passes the visibility test.
  std::optional<std::array<double, 2>> project(const Vec3& d) const {
    const double zc = dot(d, forward);
    if (!(zc > 0.0)) {
      return std::nullopt;
    }
    const double u = f * dot(d, right) / zc + c;
    const double v = f * dot(d, down) / zc + c;
    if (!(u >= 0.0 && u < l && v >= 0.0 && v < l)) {
      return std::nullopt;
    }
    return std::array<double, 2>{u, v};
  }

  Vec3 ray(double x, double y) const {
    const double a = (x - c) / f;
    const double b = (y - c) / f;
    Vec3 r{forward.x + a * right.x + b * down.x, forward.y + a * right.y + b * down.y,
           forward.z + a * right.z + b * down.z};
    const double n = std::sqrt(dot(r, r));
    return {r.x / n, r.y / n, r.z / n};
  }
};

/// Uniform random direction on the sphere.
inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(dot(v, v));
    if (n > 1e-9) {
      return {v.x / n, v.y / n, v.z / n};
    }
  }
}

/// Squared distance to the nearest outside pixel by exhaustive search over
/// outside pixels, row by row away from v. Columns wrap; rows -1 and h count
/// as outside.
inline std::vector<std::int64_t> brute_distance(const panoscan::BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<std::vector<int>> outside_by_row(h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (m.at(u, v) == 0) {
        outside_by_row[v].push_back(u);
      }
    }
  }
  std::vector<std::int64_t> d(static_cast<std::size_t>(w) * h, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (m.at(u, v) == 0) {
        continue;
      }
      std::int64_t best = std::min<std::int64_t>(std::int64_t(v + 1) * (v + 1), std::int64_t(h - v) * (h - v));
      for (int dv = 0; std::int64_t(dv) * dv < best && dv < h; ++dv) {
        for (const int ov : {v - dv, v + dv}) {
          if (ov < 0 || ov >= h || (dv == 0 && ov != v)) {
            continue;
          }
          for (const int ou : outside_by_row[ov]) {
            const int du0 = std::abs(u - ou);
            const std::int64_t du = std::min(du0, w - du0);
            best = std::min(best, du * du + std::int64_t(dv) * dv);
          }
        }
      }
      d[static_cast<std::size_t>(v) * w + u] = best;
    }
  }
  return d;
}

/// First pixel (row-major) of maximal distance; nullopt for an empty mask.
inline std::optional<std::array<int, 2>> brute_farthest(const panoscan::BinaryMask& m) {
  const auto d = brute_distance(m);
  std::optional<std::array<int, 2>> best;
  std::int64_t best_d = 0;
  for (int v = 0; v < m.height(); ++v) {
    for (int u = 0; u < m.width(); ++u) {
      const std::int64_t x = d[static_cast<std::size_t>(v) * m.width() + u];
      if (m.at(u, v) != 0 && (!best || x > best_d)) {
        best = {u, v};
        best_d = x;
      }
    }
  }
  return best;
}

/// Components via union-find over all 8-neighbour pairs (columns wrap).
/// Returned in order of each component's first pixel.
inline std::vector<std::vector<int>> brute_components(const panoscan::BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<int> parent(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < parent.size(); ++i) {
    parent[i] = static_cast<int>(i);
  }
  auto root = [&](int i) {
    while (parent[i] != i) {
      i = parent[i] = parent[parent[i]];
    }
    return i;
  };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (m.at(u, v) == 0) {
        continue;
      }
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int nv = v + dv;
          const int nu = ((u + du) % w + w) % w;
          if (nv < 0 || nv >= h || m.at(nu, nv) == 0) {
            continue;
          }
          const int a = root(v * w + u);
          const int b = root(nv * w + nu);
          parent[std::max(a, b)] = std::min(a, b);
        }
      }
    }
  }
  std::vector<std::vector<int>> comps;
  std::vector<int> slot(parent.size(), -1);
  for (int i = 0; i < w * h; ++i) {
    if (m.data()[i] == 0) {
      continue;
    }
    const int r = root(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[slot[r]].push_back(i);
  }
  return comps;
}

/// Reference correction click: largest FN/FP component (FN wins ties, then the
/// component found first), its farthest pixel.
inline std::optional<panoscan::PromptPoint> brute_correction(const panoscan::BinaryMask& pred,
                                                             const panoscan::BinaryMask& gt) {
  const int w = gt.width();
  const int h = gt.height();
  panoscan::BinaryMask fn(w, h);
  panoscan::BinaryMask fp(w, h);
  bool differs = false;
  for (int i = 0; i < w * h; ++i) {
    fn.data()[i] = gt.data()[i] && !pred.data()[i];
    fp.data()[i] = pred.data()[i] && !gt.data()[i];
    differs = differs || fn.data()[i] || fp.data()[i];
  }
  if (!differs) {
    return std::nullopt;
  }
  const auto fn_c = brute_components(fn);
  const auto fp_c = brute_components(fp);
  const std::vector<int>* chosen = nullptr;
  bool positive = true;
  for (const auto& c : fn_c) {
    if (!chosen || c.size() > chosen->size()) {
      chosen = &c;
    }
  }
  for (const auto& c : fp_c) {
    if (!chosen || c.size() > chosen->size()) {
      chosen = &c;
      positive = false;
    }
  }
  panoscan::BinaryMask region(w, h);
  for (const int i : *chosen) {
    region.data()[i] = 1;
  }
  const auto p = brute_farthest(region);
  return panoscan::PromptPoint{double((*p)[0]), double((*p)[1]),
                               positive ? panoscan::PromptLabel::positive : panoscan::PromptLabel::negative};
}

/// Area of a spherical cap of angular radius r as a share of the sphere.
inline double cap_fraction(double r) { return (1.0 - std::cos(r)) / 2.0; }

}  // namespace oracle
