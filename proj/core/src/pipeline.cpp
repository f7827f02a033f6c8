#include "panoscan/pipeline.hpp"

#include <fmt/format.h>
#include <tbb/global_control.h>

#include <algorithm>
#include <chrono>
#include <optional>

#include "panoscan/codec.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/json_io.hpp"

namespace panoscan {
namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& trace) : trace_(trace) {}

  void done(std::string stage, std::string detail) {
    const auto now = std::chrono::steady_clock::now();
    trace_.push_back({std::move(stage), std::chrono::duration<double, std::milli>(now - start_).count(),
                      std::move(detail)});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& trace_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Keeps the dynamic error type while filling in the stage.
[[noreturn]] void rethrow_with_stage(const BackendError& e, const std::string& stage) {
  const std::string& s = e.stage().empty() ? stage : e.stage();
  if (dynamic_cast<const FrameCountMismatch*>(&e)) {
    throw FrameCountMismatch(e.what(), s);
  }
  if (dynamic_cast<const ProtocolError*>(&e)) {
    throw ProtocolError(e.what(), s);
  }
  if (dynamic_cast<const TransportError*>(&e)) {
    throw TransportError(e.what(), s);
  }
  throw BackendError(e.what(), s);
}

}  // namespace

std::string panorama_digest(const RgbImage& pano) {
  const std::string header = fmt::format("{}x{}x{}:", pano.width(), pano.height(), pano.channels());
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), pano.data().begin(), pano.data().end());
  return sha256_hex(bytes);
}

Pipeline::Pipeline(PipelineConfig cfg, std::shared_ptr<VideoSegmenter> segmenter, std::shared_ptr<FrameCache> frames)
    : cfg_(std::move(cfg)),
      trajectory_((cfg_.validate(), generate_trajectory(cfg_.trajectory))),
      segmenter_(std::move(segmenter)),
      frames_(frames ? std::move(frames) : std::make_shared<FrameCache>(cfg_.cache_dir)) {
  if (!segmenter_) {
    throw UsageError("a pipeline needs a segmenter");
  }
}

SegmentationResult Pipeline::segment(const RgbImage& pano, std::span<const PromptPoint> prompts,
                                     const std::string& digest) {
  require_erp_shape(pano.width(), pano.height());
  if (std::none_of(prompts.begin(), prompts.end(),
                   [](const PromptPoint& p) { return p.label == PromptLabel::positive; })) {
    throw UsageError("segmentation needs at least one positive click");
  }
  std::optional<tbb::global_control> threads;
  if (cfg_.threads > 0) {
    threads.emplace(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(cfg_.threads));
  }

  SegmentationResult result;
  result.prompts.assign(prompts.begin(), prompts.end());
  result.segmenter = segmenter_->contract().identity;
  StageClock clock(result.trace);
  const int w = pano.width();
  const int h = pano.height();
  const CameraIntrinsics k = trajectory_.intrinsics();
  const int n = static_cast<int>(trajectory_.size());

  // 1. Pre-cut the frames along the trajectory.
  const auto frames =
      frames_->get_or_render(pano, digest.empty() ? panorama_digest(pano) : digest, trajectory_, &grids_);
  clock.done("precut", fmt::format("{} frames of {} px", n, k.size_l));

  // 2. Every click goes to every frame that sees it.
  for (const PromptPoint& p : prompts) {
    const std::vector<FramePrompt> vis = visible_frames(p, trajectory_, k, w, h);
    result.visible.insert(result.visible.end(), vis.begin(), vis.end());
  }
  std::stable_sort(result.visible.begin(), result.visible.end(),
                   [](const FramePrompt& a, const FramePrompt& b) { return a.frame_index < b.frame_index; });
  clock.done("project", fmt::format("{} click(s) on {} frame(s)", prompts.size(), result.visible.size()));

  // 3. Start the video at the first frame holding a click.
  result.video = reorder_start(n, result.visible);
  clock.done("reorder", fmt::format("start frame {}", result.video.start));

  // 4. Init, add points, propagate.
  std::vector<MaskImage> masks;
  try {
    std::vector<std::shared_ptr<const ViewportFrame>> video;
    video.reserve(n);
    for (const int idx : result.video.order) {
      video.push_back(frames->frames.at(idx));
    }
    SegmentationSession session(std::move(video));
    for (const FramePrompt& fp : result.video.prompts) {
      session.add_point(fp);
    }
    masks = segmenter_->propagate(session);
    validate_masks(masks, session);
  } catch (const BackendError& e) {
    rethrow_with_stage(e, "segmenter.propagate");
  }
  clock.done("propagate", result.segmenter);

  // 5. Pull every mask back onto the panorama and keep the maximum.
  std::vector<FrameMaskRef> refs;
  refs.reserve(n);
  for (int j = 0; j < n; ++j) {
    refs.push_back({&masks[j], trajectory_[result.video.order[j]].viewpoint});
  }
  result.fused = fuse_masks(refs, k, w, h, cfg_.threshold);
  const auto fg = std::count(result.fused.binary.data().begin(), result.fused.binary.data().end(), std::uint8_t{1});
  clock.done("fuse", fmt::format("{} foreground pixels", fg));

  if (cfg_.keep_frame_masks) {
    result.frame_masks = std::move(masks);
  }
  return result;
}

SegmentationResult Pipeline::interactive_round(const RgbImage& pano, const SegmentationResult& prior,
                                               const PromptPoint& extra, const std::string& digest) {
  std::vector<PromptPoint> prompts = prior.prompts;
  prompts.push_back(extra);
  return segment(pano, prompts, digest);
}

SegmentationResult segment_panorama(const RgbImage& pano, std::span<const PromptPoint> prompts,
                                    const PipelineConfig& cfg, VideoSegmenter& segmenter) {
  // Non-owning handle; the caller keeps the segmenter alive.
  Pipeline pipeline(cfg, std::shared_ptr<VideoSegmenter>(std::shared_ptr<void>(), &segmenter));
  return pipeline.segment(pano, prompts);
}

std::shared_ptr<VideoSegmenter> make_segmenter(const PipelineConfig& cfg, std::shared_ptr<const LabelImage> labels) {
  if (cfg.segmenter == SegmenterKind::external) {
    return std::make_shared<HttpSegmenter>(cfg.endpoint);
  }
  if (!labels) {
    throw UsageError("the oracle segmenter needs a label plane");
  }
  return std::make_shared<OracleSegmenter>(std::move(labels));
}

PanoramaSegmentFn make_protocol_segment_fn(const PipelineConfig& cfg) {
  struct State {
    PipelineConfig cfg;
    std::shared_ptr<FrameCache> frames;
    std::shared_ptr<VideoSegmenter> external;
    const LabelImage* labels = nullptr;  // item whose pipeline is cached below
    std::shared_ptr<Pipeline> pipeline;
    const RgbImage* rgb = nullptr;
    std::string digest;
  };
  auto state = std::make_shared<State>();
  state->cfg = cfg;
  state->cfg.validate();
  state->frames = std::make_shared<FrameCache>(cfg.cache_dir, 1);
  if (cfg.segmenter == SegmenterKind::external) {
    state->external = make_segmenter(cfg, nullptr);
  }
  return [state](const BenchmarkItem& item, std::span<const PromptPoint> clicks) {
    if (item.rgb->width() != item.labels->width() || item.rgb->height() != item.labels->height()) {
      throw DataError("\"" + item.name + "\": panorama and label plane differ in size");
    }
    if (!state->pipeline || state->labels != item.labels.get()) {
      auto segmenter = state->external ? state->external : make_segmenter(state->cfg, item.labels);
      state->pipeline = std::make_shared<Pipeline>(state->cfg, segmenter, state->frames);
      state->labels = item.labels.get();
    }
    if (state->rgb != item.rgb.get()) {
      state->digest = panorama_digest(*item.rgb);
      state->rgb = item.rgb.get();
    }
    return state->pipeline->segment(*item.rgb, clicks, state->digest).fused.binary;
  };
}

nlohmann::json result_to_json(const SegmentationResult& result) {
  nlohmann::json visible = nlohmann::json::array();
  for (const FramePrompt& p : result.visible) {
    visible.push_back(frame_prompt_to_json(p));
  }
  nlohmann::json video_prompts = nlohmann::json::array();
  for (const FramePrompt& p : result.video.prompts) {
    video_prompts.push_back(frame_prompt_to_json(p));
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const StageTiming& s : result.trace) {
    trace.push_back({{"stage", s.stage}, {"millis", s.millis}, {"detail", s.detail}});
  }
  const auto& binary = result.fused.binary;
  return {{"width", binary.width()},
          {"height", binary.height()},
          {"threshold", result.fused.threshold},
          {"foreground_pixels", std::count(binary.data().begin(), binary.data().end(), std::uint8_t{1})},
          {"segmenter", result.segmenter},
          {"prompts", prompts_to_json(result.prompts)["points"]},
          {"visible_frames", visible},
          {"start_frame", result.video.start},
          {"video_order", result.video.order},
          {"video_prompts", video_prompts},
          {"trace", trace}};
}

}  // namespace panoscan
