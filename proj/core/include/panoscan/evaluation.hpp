#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/prompt_projection.hpp"
#include "panoscan/synthetic_scenes.hpp"

namespace panoscan {

/// |P & G| / |P | G|; two empty masks score 1. Throws UsageError on size mismatch.
double iou(const BinaryMask& pred, const BinaryMask& gt);

/// Squared Euclidean distance from every pixel to the nearest pixel outside
/// the mask. Columns wrap across the seam; the rows just above the top and
/// below the bottom edge count as outside. Zero outside the mask.
std::vector<std::int64_t> squared_distance_to_boundary(const BinaryMask& mask);

enum class Connectivity { four = 4, eight = 8 };

/// Connected components with horizontal wraparound.
struct Components {
  std::vector<int> labels;         ///< -1 outside the mask, else component index
  std::vector<std::size_t> sizes;  ///< indexed by component, numbered in raster order
};

Components connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::eight);

struct ClickOptions {
  Connectivity connectivity = Connectivity::eight;
  bool prefer_false_negative_on_tie = true;
};

/// Positive click at the pixel farthest from the mask boundary; ties go to
/// the smallest row, then column. Throws DomainError for an empty mask.
PromptPoint initial_click(const BinaryMask& gt);

/// Click inside the largest false-negative or false-positive component, at its
/// point farthest from the component boundary. Positive for a false negative.
/// Returns nullopt when pred equals gt.
std::optional<PromptPoint> correction_click(const BinaryMask& pred, const BinaryMask& gt,
                                            const ClickOptions& options = {});

/// One benchmark entry: a panorama, its label plane and the instance to segment.
struct BenchmarkItem {
  std::string name;
  std::shared_ptr<const RgbImage> rgb;
  std::shared_ptr<const LabelImage> labels;
  std::uint16_t instance_id = 0;
};

/// Segments `item.rgb` from the accumulated clicks; returns a binary ERP mask.
using PanoramaSegmentFn = std::function<BinaryMask(const BenchmarkItem&, std::span<const PromptPoint>)>;

struct InstanceRecord {
  std::string name;
  std::uint16_t instance_id = 0;
  std::size_t area = 0;
  SizeBucket bucket = SizeBucket::small;
  std::vector<double> iou_per_round;
  std::vector<PromptPoint> clicks;
  bool failed = false;
  std::string failure;
};

struct BenchmarkReport {
  int rounds = 1;
  std::optional<double> miou;                      ///< over all scored instances
  std::array<std::optional<double>, 3> bucket_miou;  ///< indexed by SizeBucket
  std::array<int, 3> bucket_counts{};
  std::vector<double> round_miou;                  ///< mIoU after each round
  int failed = 0;
  std::vector<InstanceRecord> instances;
};

/// Interactive protocol: an initial click, then rounds - 1 corrective clicks,
/// re-segmenting with all accumulated clicks each time. Once a prediction is
/// exact, later rounds repeat its score. Instances whose segmentation throws
/// are reported as failed and left out of every mean.
BenchmarkReport run_protocol(std::span<const BenchmarkItem> bench, int rounds, const PanoramaSegmentFn& segment,
                             const ClickOptions& options = {});

nlohmann::json report_to_json(const BenchmarkReport& report);
/// Overall / Small / Medium / Large table in percent.
std::string format_report_table(const BenchmarkReport& report);

}  // namespace panoscan
