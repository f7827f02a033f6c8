#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/prompt_projection.hpp"
#include "panoscan/viewport_projection.hpp"

namespace panoscan {

/// Frames of one pseudo-video plus the clicks attached to them.
///
/// Construction plays the role of the segmenter's init call: frames must be
/// given in video order, i.e. as a rotation k', k'+1, ..., k'-1 of the
/// trajectory. Point frame indices refer to video positions.
class SegmentationSession {
 public:
  /// Throws UsageError when the frames are empty, not in video order, or not
  /// all the same square size.
  explicit SegmentationSession(std::vector<std::shared_ptr<const ViewportFrame>> frames);

  /// Throws UsageError for an unknown frame or a click outside [0, L).
  void add_point(const FramePrompt& prompt);

  int frame_count() const noexcept { return static_cast<int>(frames_.size()); }
  int size_l() const noexcept { return frames_.front()->intrinsics.size_l; }
  const ViewportFrame& frame(int video_index) const { return *frames_.at(video_index); }
  std::span<const FramePrompt> points() const noexcept { return points_; }

 private:
  std::vector<std::shared_ptr<const ViewportFrame>> frames_;
  std::vector<FramePrompt> points_;
};

enum class MaskValues { binary, real };

/// What a segmenter promises about itself.
struct SegmenterContract {
  std::string identity;
  int max_frames = 0;  ///< 0 = no limit
  MaskValues values = MaskValues::real;
  bool deterministic = false;
};

/// Promptable video segmenter: one call per session returns a mask per frame.
class VideoSegmenter {
 public:
  virtual ~VideoSegmenter() = default;
  virtual SegmenterContract contract() const = 0;
  /// Returns one L x L mask in [0,1] per session frame, in video order.
  virtual std::vector<MaskImage> propagate(const SegmentationSession& session) = 0;
};

/// Throws FrameCountMismatch / ProtocolError unless `masks` fits `session`.
void validate_masks(std::span<const MaskImage> masks, const SegmentationSession& session);

/// Ground-truth segmenter over a rendered label plane. The target is the
/// instance under the first positive click; it ignores every other click.
std::vector<MaskImage> oracle_segment(const SegmentationSession& session, const LabelImage& labels,
                                      GridCache* cache = nullptr);

class OracleSegmenter final : public VideoSegmenter {
 public:
  explicit OracleSegmenter(std::shared_ptr<const LabelImage> labels);

  SegmenterContract contract() const override;
  std::vector<MaskImage> propagate(const SegmentationSession& session) override;

  /// Label plane of a viewpoint, rendered once and reused.
  std::shared_ptr<const LabelImage> label_frame(const Viewpoint& vp, const CameraIntrinsics& k);

 private:
  std::shared_ptr<const LabelImage> labels_;
  GridCache grids_;
  std::mutex mutex_;
  std::map<std::tuple<double, double, int>, std::shared_ptr<const LabelImage>> frames_;
};

/// Remote service settings.
struct EndpointConfig {
  std::string base_url;    ///< e.g. http://127.0.0.1:9000
  double timeout_s = 60.0;
  int retries = 1;         ///< extra attempts after a transport failure
};

/// Client for an external segmentation service speaking the HTTP/JSON wire protocol:
///   POST /v1/session                 -> {"session_id"}
///   POST /v1/session/{id}/frames     frames_request()
///   POST /v1/session/{id}/points     point_request(), once per click
///   POST /v1/session/{id}/propagate  -> masks_response()
class HttpSegmenter final : public VideoSegmenter {
 public:
  explicit HttpSegmenter(EndpointConfig config);

  SegmenterContract contract() const override;
  std::vector<MaskImage> propagate(const SegmentationSession& session) override;

 private:
  EndpointConfig config_;
};

/// JSON bodies of the wire protocol. Images travel as base64 PNG.
namespace wire {

nlohmann::json frames_request(const SegmentationSession& session);
nlohmann::json point_request(const FramePrompt& prompt);
nlohmann::json masks_response(std::span<const MaskImage> masks);

struct FramesPayload {
  int size_l = 0;
  std::vector<RgbImage> frames;
  std::vector<Viewpoint> viewpoints;
  std::vector<int> trajectory_index;
};

FramesPayload parse_frames_request(const nlohmann::json& body);
nlohmann::json frames_request(const FramesPayload& payload);
FramePrompt parse_point_request(const nlohmann::json& body);

/// Throws ProtocolError / FrameCountMismatch on malformed content.
std::vector<MaskImage> parse_masks_response(const nlohmann::json& body, int expected_count, int size_l);

}  // namespace wire

}  // namespace panoscan
