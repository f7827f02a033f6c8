#include "panoscan/synthetic_scenes.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

constexpr double kReferencePixels = 4096.0 * 2048.0;

Eigen::Vector3d direction(const SphericalCoord& c) { return sph_to_vec(c).vec(); }

double angle_between(const SphericalCoord& a, const SphericalCoord& b) {
  return std::acos(std::clamp(direction(a).dot(direction(b)), -1.0, 1.0));
}

bool longitude_inside(double phi, double lon_min, double lon_max) {
  if (lon_min <= lon_max) {
    return phi >= lon_min && phi <= lon_max;
  }
  return phi >= lon_min || phi <= lon_max;
}

// Precomputed form of a shape for the per-pixel test.
struct CompiledShape {
  enum class Kind { cap, rect, band } kind;
  Eigen::Vector3d center;
  double cos_radius = 0.0;
  LatLonRect rect;
  LatitudeBand band;

  bool contains(const Eigen::Vector3d& d, double theta, double phi) const {
    switch (kind) {
      case Kind::cap:
        return d.dot(center) >= cos_radius;
      case Kind::rect:
        return theta >= rect.lat_min && theta <= rect.lat_max &&
               longitude_inside(phi, rect.lon_min, rect.lon_max);
      case Kind::band:
        return theta >= band.lat_min && theta <= band.lat_max;
    }
    return false;
  }
};

CompiledShape compile(const SceneShape& shape) {
  CompiledShape out{};
  if (const auto* cap = std::get_if<SphericalCap>(&shape)) {
    out.kind = CompiledShape::Kind::cap;
    out.center = direction(cap->center);
    out.cos_radius = std::cos(cap->radius);
  } else if (const auto* rect = std::get_if<LatLonRect>(&shape)) {
    out.kind = CompiledShape::Kind::rect;
    out.rect = *rect;
  } else {
    out.kind = CompiledShape::Kind::band;
    out.band = std::get<LatitudeBand>(shape);
  }
  return out;
}

// Smallest cap around `center` that holds the rectangle, found by sampling its outline.
double rect_bounding_radius(const LatLonRect& r, const SphericalCoord& center) {
  const double span = r.lon_min <= r.lon_max ? r.lon_max - r.lon_min : r.lon_max + 2 * kPi - r.lon_min;
  double worst = 0.0;
  constexpr int kSteps = 64;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = static_cast<double>(i) / kSteps;
    const double lon = r.lon_min + t * span;
    const double lat = r.lat_min + t * (r.lat_max - r.lat_min);
    worst = std::max(worst, angle_between(center, SphericalCoord(r.lat_min, lon)));
    worst = std::max(worst, angle_between(center, SphericalCoord(r.lat_max, lon)));
    worst = std::max(worst, angle_between(center, SphericalCoord(lat, r.lon_min)));
    worst = std::max(worst, angle_between(center, SphericalCoord(lat, r.lon_max)));
  }
  return worst;
}

}  // namespace

void SphericalScene::validate() const {
  std::set<std::uint16_t> seen;
  for (const SceneInstance& inst : instances) {
    if (inst.id == 0) {
      throw DataError("instance id 0 is reserved for background");
    }
    if (!seen.insert(inst.id).second) {
      throw DataError("duplicate instance id " + std::to_string(inst.id));
    }
    if (const auto* cap = std::get_if<SphericalCap>(&inst.shape)) {
      if (!(cap->radius > 0.0 && cap->radius < kPi / 2)) {
        throw DataError("cap radius must lie in (0, 90) degrees");
      }
    } else if (const auto* rect = std::get_if<LatLonRect>(&inst.shape)) {
      if (!(rect->lat_min < rect->lat_max) || rect->lat_min < -kPi / 2 || rect->lat_max > kPi / 2) {
        throw DataError("rectangle latitude bounds are invalid");
      }
      if (rect->lon_min < -kPi || rect->lon_min > kPi || rect->lon_max < -kPi || rect->lon_max > kPi) {
        throw DataError("rectangle longitude bounds must lie in [-180, 180] degrees");
      }
    } else {
      const auto& band = std::get<LatitudeBand>(inst.shape);
      if (!(band.lat_min < band.lat_max) || band.lat_min < -kPi / 2 || band.lat_max > kPi / 2) {
        throw DataError("band latitude bounds are invalid");
      }
    }
  }
}

bool contains(const SceneShape& shape, const SphericalCoord& c) {
  return compile(shape).contains(direction(c), c.theta(), c.phi());
}

RenderedScene render_scene(const SphericalScene& scene, int width, int height) {
  require_erp_shape(width, height);
  scene.validate();
  std::vector<CompiledShape> shapes;
  shapes.reserve(scene.instances.size());
  for (const SceneInstance& inst : scene.instances) {
    shapes.push_back(compile(inst.shape));
  }

  RenderedScene out{RgbImage(width, height, 3), LabelImage(width, height)};
  tbb::parallel_for(tbb::blocked_range<int>(0, height), [&](const tbb::blocked_range<int>& rows) {
    for (int v = rows.begin(); v < rows.end(); ++v) {
      const double theta = kPi / 2 - ((v + 0.5) / height) * kPi;
      const double ct = std::cos(theta);
      const double st = std::sin(theta);
      for (int u = 0; u < width; ++u) {
        const double phi = ((u + 0.5) / width) * 2.0 * kPi - kPi;
        const Eigen::Vector3d d(ct * std::cos(phi), ct * std::sin(phi), st);
        Rgb8 color = scene.background;
        std::uint16_t id = 0;
        for (std::size_t i = shapes.size(); i-- > 0;) {
          if (shapes[i].contains(d, theta, phi)) {
            color = scene.instances[i].color;
            id = scene.instances[i].id;
            break;
          }
        }
        out.labels.at(u, v) = id;
        out.rgb.at(u, v, 0) = color.r;
        out.rgb.at(u, v, 1) = color.g;
        out.rgb.at(u, v, 2) = color.b;
      }
    }
  });
  return out;
}

std::string_view to_string(SizeBucket bucket) noexcept {
  switch (bucket) {
    case SizeBucket::small:
      return "small";
    case SizeBucket::medium:
      return "medium";
    case SizeBucket::large:
      return "large";
  }
  return "unknown";
}

SizeThresholds size_thresholds(int width, int height) {
  const double scale = static_cast<double>(width) * height / kReferencePixels;
  return {64.0 * 64.0 * scale, 192.0 * 192.0 * scale};
}

SizeBucket classify_area(std::size_t area, int width, int height) {
  if (area == 0) {
    throw DomainError("an instance must cover at least one pixel");
  }
  const SizeThresholds t = size_thresholds(width, height);
  const auto a = static_cast<double>(area);
  if (a <= t.small_max) {
    return SizeBucket::small;
  }
  if (a <= t.medium_max) {
    return SizeBucket::medium;
  }
  return SizeBucket::large;
}

SizeCensus scene_size_census(const LabelImage& labels) {
  std::map<std::uint16_t, std::size_t> areas;
  for (const std::uint16_t id : labels.data()) {
    if (id != 0) {
      ++areas[id];
    }
  }
  SizeCensus census;
  for (const auto& [id, area] : areas) {
    const SizeBucket b = classify_area(area, labels.width(), labels.height());
    census.instances.push_back({id, area, b});
    ++census.counts[static_cast<std::size_t>(b)];
  }
  return census;
}

SphericalScene random_scene(std::uint64_t seed, const RandomSceneOptions& options) {
  if (options.instance_count < 0 || options.seam_crossing < 0 || options.pole_adjacent < 0 ||
      options.seam_crossing + options.pole_adjacent > options.instance_count) {
    throw DataError("random scene options request an impossible instance mix");
  }
  if (!(options.min_radius_deg > 0.0 && options.max_radius_deg >= options.min_radius_deg &&
        options.max_radius_deg < 60.0)) {
    throw DataError("random scene radii must satisfy 0 < min <= max < 60 degrees");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  SphericalScene scene;
  scene.background = Rgb8{20, 20, 24};
  struct Footprint {
    SphericalCoord center;
    double radius;
  };
  std::vector<Footprint> placed;
  constexpr double kGap = deg_to_rad(2.0);
  constexpr int kAttempts = 4000;

  for (int i = 0; i < options.instance_count; ++i) {
    const bool seam = i < options.seam_crossing;
    const bool pole = !seam && i < options.seam_crossing + options.pole_adjacent;
    bool done = false;
    for (int attempt = 0; attempt < kAttempts && !done; ++attempt) {
      const double radius = deg_to_rad(uniform(options.min_radius_deg, options.max_radius_deg));
      double lat = 0.0;
      double lon = 0.0;
      if (pole) {
        lat = deg_to_rad(uniform(72.0, 82.0)) * (uniform(0.0, 1.0) < 0.5 ? 1.0 : -1.0);
        lon = uniform(-kPi, kPi);
      } else {
        lat = std::asin(uniform(std::sin(deg_to_rad(-60.0)), std::sin(deg_to_rad(60.0))));
        lon = seam ? kPi + uniform(-0.3, 0.3) * radius / std::cos(lat) : uniform(-kPi, kPi);
      }
      const SphericalCoord center(lat, lon);

      const bool rect = !pole && uniform(0.0, 1.0) < options.rect_fraction;
      SceneShape shape;
      double bound = radius;
      if (rect) {
        const double half_lat = radius * uniform(0.5, 1.0);
        const double half_lon = std::min(radius * uniform(0.5, 1.0) / std::cos(lat), deg_to_rad(60.0));
        LatLonRect r;
        r.lat_min = std::max(lat - half_lat, deg_to_rad(-85.0));
        r.lat_max = std::min(lat + half_lat, deg_to_rad(85.0));
        r.lon_min = wrap_longitude(center.phi() - half_lon);
        r.lon_max = wrap_longitude(center.phi() + half_lon);
        shape = r;
        bound = rect_bounding_radius(r, center);
      } else {
        shape = SphericalCap{center, radius};
      }

      bool clear = true;
      for (const Footprint& other : placed) {
        if (angle_between(center, other.center) < bound + other.radius + kGap) {
          clear = false;
          break;
        }
      }
      if (!clear) {
        continue;
      }
      placed.push_back({center, bound});
      Rgb8 color;
      do {
        color = Rgb8{static_cast<std::uint8_t>(uniform(60.0, 255.0)),
                     static_cast<std::uint8_t>(uniform(60.0, 255.0)),
                     static_cast<std::uint8_t>(uniform(60.0, 255.0))};
      } while (std::any_of(scene.instances.begin(), scene.instances.end(),
                           [&](const SceneInstance& s) { return s.color == color; }));
      scene.instances.push_back({static_cast<std::uint16_t>(i + 1), shape, color});
      done = true;
    }
    if (!done) {
      throw DataError("could not place instance " + std::to_string(i + 1) + " without overlap");
    }
  }
  return scene;
}

}  // namespace panoscan
