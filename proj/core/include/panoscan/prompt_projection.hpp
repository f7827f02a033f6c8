#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "panoscan/scan_trajectory.hpp"
#include "panoscan/sphere_geometry.hpp"

namespace panoscan {

enum class PromptLabel { positive, negative };

std::string_view to_string(PromptLabel label) noexcept;
/// Accepts "positive" / "negative"; throws DataError otherwise.
PromptLabel prompt_label_from_string(std::string_view text);

/// Click on the ERP raster (pixel coordinates, pixel centers at integers).
struct PromptPoint {
  double u = 0.0;
  double v = 0.0;
  PromptLabel label = PromptLabel::positive;

  friend bool operator==(const PromptPoint&, const PromptPoint&) = default;
};

/// A prompt expressed in the pixel coordinates of one trajectory frame.
struct FramePrompt {
  int frame_index = 0;
  double u_hat = 0.0;
  double v_hat = 0.0;
  PromptLabel label = PromptLabel::positive;

  friend bool operator==(const FramePrompt&, const FramePrompt&) = default;
};

/// Projects an ERP click into a frame; nullopt unless the click is in front of
/// the camera and lands inside [0, L) x [0, L).
std::optional<FramePrompt> project_prompt(const PromptPoint& p, const Viewpoint& vp,
                                          const CameraIntrinsics& k, int pano_width,
                                          int pano_height, int frame_index = 0);

/// Every frame of `t` that sees the click, in trajectory order.
/// Throws InvariantError when no frame sees it (the trajectory leaves a gap).
std::vector<FramePrompt> visible_frames(const PromptPoint& p, const ScanTrajectory& t,
                                        const CameraIntrinsics& k, int pano_width, int pano_height);

/// Video order after rotating the trajectory to the first prompted frame.
struct ReorderedVideo {
  int start = 0;                     ///< smallest visible trajectory index
  std::vector<int> order;            ///< trajectory index of each video frame
  std::vector<FramePrompt> prompts;  ///< frame_index remapped to video position
};

/// Throws UsageError when `visible` is empty.
ReorderedVideo reorder_start(int frame_count, std::span<const FramePrompt> visible);

}  // namespace panoscan
