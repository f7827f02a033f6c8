#include "panoscan/segmenter_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panoscan/codec.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/image_io.hpp"

namespace panoscan {

SegmentationSession::SegmentationSession(std::vector<std::shared_ptr<const ViewportFrame>> frames)
    : frames_(std::move(frames)) {
  if (frames_.empty()) {
    throw UsageError("a session needs at least one frame");
  }
  const int n = static_cast<int>(frames_.size());
  const CameraIntrinsics& k = frames_.front()->intrinsics;
  const int first = frames_.front()->frame_index;
  for (int i = 0; i < n; ++i) {
    const ViewportFrame& f = *frames_[i];
    if (f.frame_index != (first + i) % n) {
      throw UsageError("frames must be submitted in video order (position " + std::to_string(i) +
                       " holds trajectory frame " + std::to_string(f.frame_index) + ")");
    }
    if (!(f.intrinsics == k) || f.image.width() != k.size_l || f.image.height() != k.size_l) {
      throw UsageError("all frames must share the same L x L intrinsics");
    }
  }
}

void SegmentationSession::add_point(const FramePrompt& prompt) {
  if (prompt.frame_index < 0 || prompt.frame_index >= frame_count()) {
    throw UsageError("point refers to video frame " + std::to_string(prompt.frame_index) +
                     " outside the session");
  }
  const double side = size_l();
  if (!(prompt.u_hat >= 0.0 && prompt.u_hat < side && prompt.v_hat >= 0.0 && prompt.v_hat < side)) {
    throw UsageError("point lies outside the frame");
  }
  points_.push_back(prompt);
}

void validate_masks(std::span<const MaskImage> masks, const SegmentationSession& session) {
  if (static_cast<int>(masks.size()) != session.frame_count()) {
    throw FrameCountMismatch("segmenter returned " + std::to_string(masks.size()) + " masks for " +
                             std::to_string(session.frame_count()) + " frames");
  }
  for (const MaskImage& m : masks) {
    if (m.width() != session.size_l() || m.height() != session.size_l() || m.channels() != 1) {
      throw ProtocolError("mask size " + std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                          " does not match the " + std::to_string(session.size_l()) + " px frames");
    }
    for (const float v : m.data()) {
      if (!(v >= 0.0F && v <= 1.0F)) {
        throw ProtocolError("mask values must lie in [0, 1]");
      }
    }
  }
}

namespace {

std::uint16_t oracle_target(const SegmentationSession& session, const LabelImage& labels) {
  const auto points = session.points();
  const auto first_positive = std::find_if(points.begin(), points.end(), [](const FramePrompt& p) {
    return p.label == PromptLabel::positive;
  });
  if (first_positive == points.end()) {
    return 0;
  }
  const ViewportFrame& frame = session.frame(first_positive->frame_index);
  const ViewportCamera cam(frame.viewpoint, frame.intrinsics, labels.width(), labels.height());
  const Eigen::Vector2d erp = cam.erp_coordinate(first_positive->u_hat, first_positive->v_hat);
  int u = static_cast<int>(std::floor(erp.x() + 0.5));
  if (u >= labels.width()) {
    u -= labels.width();
  }
  const int v = std::clamp(static_cast<int>(std::floor(erp.y() + 0.5)), 0, labels.height() - 1);
  return labels.at(u, v);
}

MaskImage equality_mask(const LabelImage& frame_labels, std::uint16_t target) {
  MaskImage mask(frame_labels.width(), frame_labels.height());
  const auto src = frame_labels.data();
  auto dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] == target ? 1.0F : 0.0F;
  }
  return mask;
}

}  // namespace

std::vector<MaskImage> oracle_segment(const SegmentationSession& session, const LabelImage& labels,
                                      GridCache* cache) {
  require_erp_shape(labels.width(), labels.height());
  const std::uint16_t target = oracle_target(session, labels);
  std::vector<MaskImage> masks;
  masks.reserve(session.frame_count());
  for (int i = 0; i < session.frame_count(); ++i) {
    const ViewportFrame& f = session.frame(i);
    if (target == 0) {
      masks.emplace_back(f.intrinsics.size_l, f.intrinsics.size_l);
      continue;
    }
    const SamplingGrid grid =
        build_sampling_grid(f.viewpoint, f.intrinsics, labels.width(), labels.height(), cache);
    masks.push_back(equality_mask(render_viewport(labels, grid, Interpolation::nearest), target));
  }
  return masks;
}

OracleSegmenter::OracleSegmenter(std::shared_ptr<const LabelImage> labels) : labels_(std::move(labels)) {
  if (!labels_) {
    throw UsageError("oracle segmenter needs a label plane");
  }
  require_erp_shape(labels_->width(), labels_->height());
}

SegmenterContract OracleSegmenter::contract() const {
  return {"oracle/label-plane", 0, MaskValues::binary, true};
}

std::shared_ptr<const LabelImage> OracleSegmenter::label_frame(const Viewpoint& vp,
                                                               const CameraIntrinsics& k) {
  const auto key = std::make_tuple(vp.yaw_deg(), vp.pitch_deg(), k.size_l);
  {
    std::lock_guard lock(mutex_);
    if (auto it = frames_.find(key); it != frames_.end()) {
      return it->second;
    }
  }
  const SamplingGrid grid = build_sampling_grid(vp, k, labels_->width(), labels_->height(), &grids_);
  auto rendered = std::make_shared<const LabelImage>(render_viewport(*labels_, grid, Interpolation::nearest));
  std::lock_guard lock(mutex_);
  return frames_.emplace(key, std::move(rendered)).first->second;
}

std::vector<MaskImage> OracleSegmenter::propagate(const SegmentationSession& session) {
  const std::uint16_t target = oracle_target(session, *labels_);
  std::vector<MaskImage> masks;
  masks.reserve(session.frame_count());
  for (int i = 0; i < session.frame_count(); ++i) {
    const ViewportFrame& f = session.frame(i);
    if (target == 0) {
      masks.emplace_back(f.intrinsics.size_l, f.intrinsics.size_l);
    } else {
      masks.push_back(equality_mask(*label_frame(f.viewpoint, f.intrinsics), target));
    }
  }
  return masks;
}

namespace wire {

nlohmann::json frames_request(const SegmentationSession& session) {
  FramesPayload payload;
  payload.size_l = session.size_l();
  for (int i = 0; i < session.frame_count(); ++i) {
    const ViewportFrame& f = session.frame(i);
    payload.frames.push_back(f.image);
    payload.viewpoints.push_back(f.viewpoint);
    payload.trajectory_index.push_back(f.frame_index);
  }
  return frames_request(payload);
}

nlohmann::json frames_request(const FramesPayload& payload) {
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t i = 0; i < payload.frames.size(); ++i) {
    frames.push_back({
        {"index", static_cast<int>(i)},
        {"trajectory_index", payload.trajectory_index.at(i)},
        {"yaw_deg", payload.viewpoints.at(i).yaw_deg()},
        {"pitch_deg", payload.viewpoints.at(i).pitch_deg()},
        {"png", base64_encode(encode_png(payload.frames[i]))},
    });
  }
  return {{"size_l", payload.size_l}, {"count", static_cast<int>(payload.frames.size())}, {"frames", frames}};
}

nlohmann::json point_request(const FramePrompt& prompt) {
  return {{"frame_index", prompt.frame_index},
          {"u", prompt.u_hat},
          {"v", prompt.v_hat},
          {"label", std::string(to_string(prompt.label))}};
}

nlohmann::json masks_response(std::span<const MaskImage> masks) {
  nlohmann::json list = nlohmann::json::array();
  for (const MaskImage& m : masks) {
    list.push_back(base64_encode(encode_mask_png(m)));
  }
  return {{"masks", list}};
}

FramesPayload parse_frames_request(const nlohmann::json& body) {
  try {
    FramesPayload payload;
    payload.size_l = body.at("size_l").get<int>();
    const int count = body.at("count").get<int>();
    const auto& frames = body.at("frames");
    if (!frames.is_array() || static_cast<int>(frames.size()) != count) {
      throw DataError("frame count does not match the frame list");
    }
    for (const auto& f : frames) {
      RgbImage img = decode_rgb(base64_decode(f.at("png").get<std::string>()));
      if (img.width() != payload.size_l || img.height() != payload.size_l) {
        throw DataError("frame is not " + std::to_string(payload.size_l) + " px square");
      }
      payload.frames.push_back(std::move(img));
      payload.viewpoints.emplace_back(f.at("yaw_deg").get<double>(), f.at("pitch_deg").get<double>());
      payload.trajectory_index.push_back(f.at("trajectory_index").get<int>());
    }
    return payload;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed frames request: ") + e.what());
  }
}

FramePrompt parse_point_request(const nlohmann::json& body) {
  try {
    return FramePrompt{body.at("frame_index").get<int>(), body.at("u").get<double>(),
                       body.at("v").get<double>(),
                       prompt_label_from_string(body.at("label").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed point request: ") + e.what());
  }
}

std::vector<MaskImage> parse_masks_response(const nlohmann::json& body, int expected_count, int size_l) {
  if (!body.is_object() || !body.contains("masks") || !body["masks"].is_array()) {
    throw ProtocolError("propagate response lacks a \"masks\" array");
  }
  const auto& list = body["masks"];
  if (static_cast<int>(list.size()) != expected_count) {
    throw FrameCountMismatch("service returned " + std::to_string(list.size()) + " masks for " +
                             std::to_string(expected_count) + " frames");
  }
  std::vector<MaskImage> masks;
  masks.reserve(list.size());
  for (const auto& item : list) {
    if (!item.is_string()) {
      throw ProtocolError("mask entries must be base64 PNG strings");
    }
    MaskImage m;
    try {
      m = decode_mask_png(base64_decode(item.get<std::string>()));
    } catch (const DataError& e) {
      throw ProtocolError(std::string("undecodable mask: ") + e.what());
    }
    if (m.width() != size_l || m.height() != size_l) {
      throw ProtocolError("mask size " + std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                          " does not match the " + std::to_string(size_l) + " px frames");
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

}  // namespace wire

}  // namespace panoscan
