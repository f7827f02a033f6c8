#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/sphere_geometry.hpp"

namespace panoscan {

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Directions within `radius` (radians) of `center`.
struct SphericalCap {
  SphericalCoord center;
  double radius = 0.0;
};

/// Latitude/longitude box in radians. lon_min > lon_max wraps across the seam.
struct LatLonRect {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

/// Latitude band in radians, all longitudes.
struct LatitudeBand {
  double lat_min = 0.0;
  double lat_max = 0.0;
};

using SceneShape = std::variant<SphericalCap, LatLonRect, LatitudeBand>;

struct SceneInstance {
  std::uint16_t id = 0;
  SceneShape shape;
  Rgb8 color;
};

/// Instances are drawn in list order; later ones occlude earlier ones.
struct SphericalScene {
  Rgb8 background{32, 32, 32};
  std::vector<SceneInstance> instances;

  /// Throws DataError for duplicate or zero ids and degenerate shapes.
  void validate() const;
};

/// Membership of a direction in a shape, evaluated analytically.
bool contains(const SceneShape& shape, const SphericalCoord& c);

struct RenderedScene {
  RgbImage rgb;
  LabelImage labels;
};

/// Evaluates every ERP pixel center against the instances; no anti-aliasing.
RenderedScene render_scene(const SphericalScene& scene, int width, int height);

enum class SizeBucket { small, medium, large };

std::string_view to_string(SizeBucket bucket) noexcept;

/// Area thresholds in pixels for a raster: small <= small_max < medium <= medium_max < large.
/// The reference values 64^2 and 192^2 hold at 4096 x 2048 and scale with pixel count.
struct SizeThresholds {
  double small_max = 0.0;
  double medium_max = 0.0;
};

SizeThresholds size_thresholds(int width, int height);
/// Throws DomainError for area 0.
SizeBucket classify_area(std::size_t area, int width, int height);

struct InstanceStats {
  std::uint16_t id = 0;
  std::size_t area = 0;
  SizeBucket bucket = SizeBucket::small;
};

struct SizeCensus {
  std::vector<InstanceStats> instances;  ///< sorted by id
  std::array<int, 3> counts{};           ///< indexed by SizeBucket
};

SizeCensus scene_size_census(const LabelImage& labels);

/// Knobs for random scenes. Instances never overlap, so every instance keeps
/// its full analytic shape in the label plane.
struct RandomSceneOptions {
  int instance_count = 5;
  int seam_crossing = 1;     ///< how many of the instances straddle longitude +-180
  int pole_adjacent = 0;     ///< how many sit with their center above |latitude| 70
  double min_radius_deg = 6.0;
  double max_radius_deg = 30.0;
  double rect_fraction = 0.4;  ///< share of lat/lon rectangles among instances
};

/// Deterministic in `seed`. Throws DataError if the requested layout cannot
/// be packed without overlap.
SphericalScene random_scene(std::uint64_t seed, const RandomSceneOptions& options = {});

}  // namespace panoscan
