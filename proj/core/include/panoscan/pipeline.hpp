#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "panoscan/config.hpp"
#include "panoscan/evaluation.hpp"
#include "panoscan/frame_cache.hpp"
#include "panoscan/mask_fusion.hpp"
#include "panoscan/prompt_projection.hpp"
#include "panoscan/scan_trajectory.hpp"
#include "panoscan/segmenter_gateway.hpp"

namespace panoscan {

/// One executed pipeline step.
struct StageTiming {
  std::string stage;  ///< precut, project, reorder, propagate, fuse
  double millis = 0.0;
  std::string detail;
};

struct SegmentationResult {
  FusedMask fused;
  std::vector<PromptPoint> prompts;
  std::vector<FramePrompt> visible;   ///< every (frame, click) pair, trajectory indices
  ReorderedVideo video;               ///< start frame, video order and remapped clicks
  std::vector<MaskImage> frame_masks; ///< video order; only kept when configured
  std::vector<StageTiming> trace;
  std::string segmenter;
};

/// Hex digest of a panorama's dimensions and pixels; keys the frame cache.
std::string panorama_digest(const RgbImage& pano);

class Pipeline {
 public:
  /// Throws ConfigError for an invalid config, UsageError without a segmenter.
  Pipeline(PipelineConfig cfg, std::shared_ptr<VideoSegmenter> segmenter,
           std::shared_ptr<FrameCache> frames = nullptr);

  const PipelineConfig& config() const noexcept { return cfg_; }
  const ScanTrajectory& trajectory() const noexcept { return trajectory_; }
  FrameCache& frame_cache() noexcept { return *frames_; }
  GridCache& grid_cache() noexcept { return grids_; }

  /// Pre-cut frames, project every click, rotate the video to the first
  /// prompted frame, run the segmenter, pull the masks back and max-fuse.
  /// Needs at least one positive click. Backend failures surface as
  /// BackendError whose stage() names the segmenter call.
  SegmentationResult segment(const RgbImage& pano, std::span<const PromptPoint> prompts,
                             const std::string& pano_digest = {});

  /// Runs segment() again with `prior`'s clicks plus `extra`.
  SegmentationResult interactive_round(const RgbImage& pano, const SegmentationResult& prior,
                                       const PromptPoint& extra, const std::string& pano_digest = {});

 private:
  PipelineConfig cfg_;
  ScanTrajectory trajectory_;
  std::shared_ptr<VideoSegmenter> segmenter_;
  std::shared_ptr<FrameCache> frames_;
  GridCache grids_;
};

/// One-shot convenience over Pipeline.
SegmentationResult segment_panorama(const RgbImage& pano, std::span<const PromptPoint> prompts,
                                    const PipelineConfig& cfg, VideoSegmenter& segmenter);

/// The segmenter named by `cfg`; the oracle needs `labels`.
std::shared_ptr<VideoSegmenter> make_segmenter(const PipelineConfig& cfg, std::shared_ptr<const LabelImage> labels);

/// Adapter running the full pipeline for each benchmark item, as run_protocol expects.
PanoramaSegmentFn make_protocol_segment_fn(const PipelineConfig& cfg);

nlohmann::json result_to_json(const SegmentationResult& result);

}  // namespace panoscan
