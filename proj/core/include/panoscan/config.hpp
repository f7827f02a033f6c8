#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "panoscan/scan_trajectory.hpp"
#include "panoscan/segmenter_gateway.hpp"

namespace panoscan {

enum class SegmenterKind { oracle, external };

std::string_view to_string(SegmenterKind kind) noexcept;
/// Throws ConfigError for anything but "oracle" / "external".
SegmenterKind segmenter_kind_from_string(std::string_view text);

struct PipelineConfig {
  TrajectoryConfig trajectory;
  SegmenterKind segmenter = SegmenterKind::oracle;
  EndpointConfig endpoint;
  double threshold = 0.5;
  int threads = 0;                   ///< 0 lets the scheduler decide
  std::filesystem::path cache_dir;   ///< empty keeps rendered frames in memory only
  bool keep_frame_masks = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads a key/value document:
///
///   [trajectory]  beta_h, beta_v, overlap, size_l
///   [segmenter]   kind, endpoint, timeout_s, retries
///   [pipeline]    threshold, threads, cache_dir, keep_frame_masks
///
/// '#' and ';' start comment lines; string values may be quoted. Keys not
/// listed here are rejected. Missing keys keep their defaults.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace panoscan
