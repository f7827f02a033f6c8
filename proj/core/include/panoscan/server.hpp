#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "panoscan/config.hpp"

namespace panoscan {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;                 ///< 0 picks a free port
  double idle_timeout_s = 900.0;   ///< sessions untouched this long are dropped
  int overlay_max_width = 1024;    ///< overlays are downscaled to at most this width
  int thumbnail_size = 256;
};

/// HTTP/JSON front end for interactive sessions.
///
///   GET    /api/health
///   POST   /api/sessions                           multipart "panorama" [+ "labels"] or a raw image body
///   GET    /api/sessions/{id}                      session state and prompt history
///   DELETE /api/sessions/{id}
///   GET    /api/sessions/{id}/trajectory
///   GET    /api/sessions/{id}/frames/{k}/thumbnail PNG, ?size= overrides the default side
///   POST   /api/sessions/{id}/prompts              {"u", "v", "label"}; segments with every click so far
///   POST   /api/sessions/{id}/corrections          same, but needs an earlier round
///   GET    /api/sessions/{id}/overlay              reduced-resolution mask PNG
///   GET    /api/sessions/{id}/mask                 full-resolution mask PNG (0/255)
///
/// Errors come back as {"error": ..., "stage"?: ...}: 400 for bad input,
/// 404 for unknown sessions, 409 for out-of-order calls, 502/503 when the
/// segmenter backend fails.
class SegmentationServer {
 public:
  SegmentationServer(PipelineConfig cfg, ServeOptions options);
  ~SegmentationServer();
  SegmentationServer(const SegmentationServer&) = delete;
  SegmentationServer& operator=(const SegmentationServer&) = delete;

  /// Binds the socket and returns the port. Throws UsageError when binding fails.
  int bind();
  /// Serves until stop(); binds first if needed.
  void run();
  /// Serves on a background thread; returns the bound port.
  int start();
  void stop();

  std::size_t session_count() const;
  /// Drops sessions idle for longer than the timeout; returns how many.
  std::size_t collect_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace panoscan
