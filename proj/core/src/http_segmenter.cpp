// Eigen must come before httplib: <resolv.h> defines a _res macro.
#include "panoscan/segmenter_gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <string>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

class Connection {
 public:
  explicit Connection(const EndpointConfig& cfg) : client_(cfg.base_url), retries_(cfg.retries) {
    if (!client_.is_valid()) {
      throw TransportError("invalid segmenter endpoint \"" + cfg.base_url + "\"");
    }
    const auto timeout = std::chrono::milliseconds(static_cast<long>(std::ceil(cfg.timeout_s * 1000.0)));
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_write_timeout(timeout);
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body, const std::string& stage) {
    const std::string payload = body.dump();
    httplib::Result res;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
      res = client_.Post(path, payload, "application/json");
      if (res) {
        break;
      }
    }
    if (!res) {
      throw TransportError("POST " + path + " failed: " + httplib::to_string(res.error()), stage);
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProtocolError("POST " + path + " returned HTTP " + std::to_string(res->status) + ": " + res->body,
                          stage);
    }
    try {
      return res->body.empty() ? nlohmann::json::object() : nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("POST " + path + " returned invalid JSON: " + e.what(), stage);
    }
  }

 private:
  httplib::Client client_;
  int retries_;
};

}  // namespace

HttpSegmenter::HttpSegmenter(EndpointConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw UsageError("external segmenter requires an endpoint URL");
  }
  if (config_.retries < 0 || !(config_.timeout_s > 0.0)) {
    throw UsageError("timeout must be positive and retries non-negative");
  }
}

SegmenterContract HttpSegmenter::contract() const {
  return {"http:" + config_.base_url, 0, MaskValues::real, false};
}

std::vector<MaskImage> HttpSegmenter::propagate(const SegmentationSession& session) {
  // Serialize before touching the network so malformed input never leaves the process.
  const nlohmann::json frames = wire::frames_request(session);
  std::vector<nlohmann::json> points;
  for (const FramePrompt& p : session.points()) {
    points.push_back(wire::point_request(p));
  }

  Connection conn(config_);
  const nlohmann::json created = conn.post("/v1/session", nlohmann::json::object(), "segmenter.init");
  if (!created.contains("session_id") || !created["session_id"].is_string()) {
    throw ProtocolError("session creation did not return a session_id", "segmenter.init");
  }
  const std::string base = "/v1/session/" + created["session_id"].get<std::string>();
  conn.post(base + "/frames", frames, "segmenter.init");
  for (const nlohmann::json& p : points) {
    conn.post(base + "/points", p, "segmenter.add_point");
  }
  const nlohmann::json response = conn.post(base + "/propagate", nlohmann::json::object(), "segmenter.propagate");
  try {
    std::vector<MaskImage> masks = wire::parse_masks_response(response, session.frame_count(), session.size_l());
    validate_masks(masks, session);
    return masks;
  } catch (const FrameCountMismatch& e) {
    throw FrameCountMismatch(e.what(), "segmenter.propagate");
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.what(), "segmenter.propagate");
  }
}

}  // namespace panoscan
