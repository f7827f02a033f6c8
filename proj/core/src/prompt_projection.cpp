#include "panoscan/prompt_projection.hpp"

#include <algorithm>
#include <string>

#include "panoscan/errors.hpp"
#include "panoscan/viewport_projection.hpp"

namespace panoscan {

std::string_view to_string(PromptLabel label) noexcept {
  return label == PromptLabel::positive ? "positive" : "negative";
}

PromptLabel prompt_label_from_string(std::string_view text) {
  if (text == "positive") {
    return PromptLabel::positive;
  }
  if (text == "negative") {
    return PromptLabel::negative;
  }
  throw DataError("prompt label must be \"positive\" or \"negative\", got \"" + std::string(text) + "\"");
}

std::optional<FramePrompt> project_prompt(const PromptPoint& p, const Viewpoint& vp,
                                          const CameraIntrinsics& k, int pano_width,
                                          int pano_height, int frame_index) {
  // Validates bounds and the 2:1 raster.
  (void)erp_pixel_to_sph(p.u, p.v, pano_width, pano_height);
  const ViewportCamera cam(vp, k, pano_width, pano_height);
  const auto hit = cam.project_erp(p.u, p.v);
  if (!hit) {
    return std::nullopt;
  }
  return FramePrompt{frame_index, hit->x(), hit->y(), p.label};
}

std::vector<FramePrompt> visible_frames(const PromptPoint& p, const ScanTrajectory& t,
                                        const CameraIntrinsics& k, int pano_width, int pano_height) {
  std::vector<FramePrompt> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (auto fp = project_prompt(p, t[i].viewpoint, k, pano_width, pano_height, static_cast<int>(i))) {
      out.push_back(*fp);
    }
  }
  if (out.empty()) {
    throw InvariantError("prompt (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                         ") is not visible in any frame; the trajectory does not cover it");
  }
  return out;
}

ReorderedVideo reorder_start(int frame_count, std::span<const FramePrompt> visible) {
  if (visible.empty()) {
    throw UsageError("cannot choose a start frame without visible prompts");
  }
  if (frame_count < 1) {
    throw UsageError("video must contain at least one frame");
  }
  ReorderedVideo video;
  video.start = std::min_element(visible.begin(), visible.end(), [](const auto& a, const auto& b) {
                  return a.frame_index < b.frame_index;
                })->frame_index;
  if (video.start < 0 || video.start >= frame_count) {
    throw UsageError("frame index outside the trajectory");
  }
  video.order.resize(frame_count);
  for (int j = 0; j < frame_count; ++j) {
    video.order[j] = (video.start + j) % frame_count;
  }
  video.prompts.reserve(visible.size());
  for (FramePrompt fp : visible) {
    if (fp.frame_index < 0 || fp.frame_index >= frame_count) {
      throw UsageError("frame index outside the trajectory");
    }
    fp.frame_index = ((fp.frame_index - video.start) % frame_count + frame_count) % frame_count;
    video.prompts.push_back(fp);
  }
  return video;
}

}  // namespace panoscan
