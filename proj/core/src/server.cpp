#include "panoscan/server.hpp"

// Eigen (through pipeline.hpp) must come before httplib: <resolv.h> defines a _res macro.
#include "panoscan/pipeline.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "panoscan/codec.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/image_io.hpp"
#include "panoscan/json_io.hpp"

namespace panoscan {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct HttpError {
  int status;
  std::string message;
};

struct Session {
  std::string id;
  std::shared_ptr<const RgbImage> pano;
  std::shared_ptr<const LabelImage> labels;
  std::string digest;
  std::unique_ptr<Pipeline> pipeline;
  std::vector<PromptPoint> prompts;
  std::optional<SegmentationResult> last;
  int round = 0;
  std::mutex mutex;  // one segmentation at a time per session
  Clock::time_point last_access = Clock::now();
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_png(httplib::Response& res, const Bytes& png) {
  res.status = 200;
  res.set_content(std::string(png.begin(), png.end()), "image/png");
}

// Runs a handler and turns every failure into a JSON error response.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const HttpError& e) {
    send_json(res, e.status, {{"error", e.message}});
  } catch (const TransportError& e) {
    send_json(res, 503, {{"error", e.what()}, {"stage", e.stage()}});
  } catch (const BackendError& e) {
    send_json(res, 502, {{"error", e.what()}, {"stage", e.stage()}});
  } catch (const InvariantError& e) {
    send_json(res, 422, {{"error", e.what()}});
  } catch (const Error& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  return fmt::format("{:016x}{:016x}", rng(), rng());
}

// Box average down to side x side.
RgbImage thumbnail(const RgbImage& img, int side) {
  RgbImage out(side, side, 3);
  const double scale = static_cast<double>(img.width()) / side;
  for (int y = 0; y < side; ++y) {
    const int y0 = static_cast<int>(y * scale);
    const int y1 = std::max(y0 + 1, static_cast<int>((y + 1) * scale));
    for (int x = 0; x < side; ++x) {
      const int x0 = static_cast<int>(x * scale);
      const int x1 = std::max(x0 + 1, static_cast<int>((x + 1) * scale));
      for (int c = 0; c < 3; ++c) {
        unsigned sum = 0;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xx = x0; xx < x1; ++xx) {
            sum += img.at(xx, yy, c);
          }
        }
        const unsigned n = static_cast<unsigned>((y1 - y0) * (x1 - x0));
        out.at(x, y, c) = static_cast<std::uint8_t>((sum + n / 2) / n);
      }
    }
  }
  return out;
}

// A reduced pixel is set when any full-resolution pixel it covers is set,
// so small objects stay visible.
BinaryMask reduce_mask(const BinaryMask& mask, int max_width) {
  const int factor = std::max(1, (mask.width() + max_width - 1) / max_width);
  const int w = (mask.width() + factor - 1) / factor;
  const int h = (mask.height() + factor - 1) / factor;
  BinaryMask out(w, h);
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (mask.at(u, v) != 0) {
        out.at(u / factor, v / factor) = 1;
      }
    }
  }
  return out;
}

}  // namespace

struct SegmentationServer::Impl {
  PipelineConfig cfg;
  ServeOptions options;
  httplib::Server http;
  int port = -1;
  std::thread worker;
  std::thread janitor;
  std::mutex janitor_mutex;
  std::condition_variable janitor_cv;
  bool stopping = false;
  std::shared_ptr<FrameCache> frames;
  std::shared_ptr<VideoSegmenter> external;

  mutable std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  Impl(PipelineConfig c, ServeOptions o) : cfg(std::move(c)), options(std::move(o)) {
    cfg.validate();
    if (options.overlay_max_width < 1 || options.thumbnail_size < 1 || !(options.idle_timeout_s > 0.0)) {
      throw UsageError("overlay width, thumbnail size and idle timeout must be positive");
    }
    frames = std::make_shared<FrameCache>(cfg.cache_dir, 4);
    if (cfg.segmenter == SegmenterKind::external) {
      external = make_segmenter(cfg, nullptr);
    }
    http.set_payload_max_length(std::size_t{512} << 20);
    routes();
  }

  std::shared_ptr<Session> find(const httplib::Request& req) {
    const std::string& id = req.path_params.at("id");
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw HttpError{404, "no session \"" + id + "\""};
    }
    it->second->last_access = Clock::now();
    return it->second;
  }

  json session_state(const Session& s) const {
    return {{"session_id", s.id},
            {"width", s.pano->width()},
            {"height", s.pano->height()},
            {"round", s.round},
            {"has_labels", s.labels != nullptr},
            {"segmenter", std::string(to_string(cfg.segmenter))},
            {"prompts", prompts_to_json(s.prompts)["points"]}};
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    Bytes pano_bytes;
    std::optional<Bytes> label_bytes;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("panorama")) {
        throw HttpError{400, "multipart upload lacks a \"panorama\" part"};
      }
      const std::string p = req.get_file_value("panorama").content;
      pano_bytes.assign(p.begin(), p.end());
      if (req.has_file("labels")) {
        const std::string l = req.get_file_value("labels").content;
        label_bytes.emplace(l.begin(), l.end());
      }
    } else {
      pano_bytes.assign(req.body.begin(), req.body.end());
    }
    if (pano_bytes.empty()) {
      throw HttpError{400, "empty panorama upload"};
    }

    auto s = std::make_shared<Session>();
    s->pano = std::make_shared<const RgbImage>(decode_rgb(pano_bytes));
    require_erp_shape(s->pano->width(), s->pano->height());
    if (label_bytes) {
      s->labels = std::make_shared<const LabelImage>(decode_label_png(*label_bytes));
      if (s->labels->width() != s->pano->width() || s->labels->height() != s->pano->height()) {
        throw HttpError{400, "label plane and panorama differ in size"};
      }
    }
    if (cfg.segmenter == SegmenterKind::oracle && !s->labels) {
      throw HttpError{400, "the oracle backend needs a \"labels\" part"};
    }
    s->id = new_session_id();
    s->digest = panorama_digest(*s->pano);
    s->pipeline = std::make_unique<Pipeline>(cfg, external ? external : make_segmenter(cfg, s->labels), frames);
    json body = session_state(*s);
    body["trajectory"] = trajectory_to_json(s->pipeline->trajectory());
    {
      std::lock_guard lock(sessions_mutex);
      sessions.emplace(s->id, s);
    }
    send_json(res, 201, body);
  }

  void post_click(const httplib::Request& req, httplib::Response& res, bool correction) {
    const auto s = find(req);
    const json body = json::parse(req.body);
    const PromptPoint click{body.at("u").get<double>(), body.at("v").get<double>(),
                            prompt_label_from_string(body.value("label", std::string("positive")))};
    std::lock_guard lock(s->mutex);
    if (correction && s->round == 0) {
      throw HttpError{409, "corrections need an earlier round"};
    }
    const ScanTrajectory& traj = s->pipeline->trajectory();
    const CameraIntrinsics k = traj.intrinsics();
    std::vector<FramePrompt> projections = visible_frames(click, traj, k, s->pano->width(), s->pano->height());

    // The click joins the history only once segmentation succeeds.
    std::vector<PromptPoint> prompts = s->prompts;
    prompts.push_back(click);
    SegmentationResult result = s->pipeline->segment(*s->pano, prompts, s->digest);
    s->prompts = std::move(prompts);
    ++s->round;

    // Most central view of the click first.
    std::stable_sort(projections.begin(), projections.end(), [&](const FramePrompt& a, const FramePrompt& b) {
      return std::hypot(a.u_hat - k.cx, a.v_hat - k.cy) < std::hypot(b.u_hat - k.cx, b.v_hat - k.cy);
    });
    const int n = static_cast<int>(traj.size());
    json frame_prompts = json::array();
    for (const FramePrompt& fp : projections) {
      json j = frame_prompt_to_json(fp);
      j["video_index"] = ((fp.frame_index - result.video.start) % n + n) % n;
      j["yaw_deg"] = traj[fp.frame_index].viewpoint.yaw_deg();
      j["pitch_deg"] = traj[fp.frame_index].viewpoint.pitch_deg();
      frame_prompts.push_back(std::move(j));
    }
    const BinaryMask overlay = reduce_mask(result.fused.binary, options.overlay_max_width);
    json out = session_state(*s);
    out["frame_prompts"] = frame_prompts;
    out["start_frame"] = result.video.start;
    out["foreground_pixels"] =
        std::count(result.fused.binary.data().begin(), result.fused.binary.data().end(), std::uint8_t{1});
    out["overlay"] = {{"width", overlay.width()},
                      {"height", overlay.height()},
                      {"png", base64_encode(encode_binary_png(overlay))}};
    out["mask_url"] = "/api/sessions/" + s->id + "/mask";
    out["trace"] = result_to_json(result)["trace"];
    s->last = std::move(result);
    send_json(res, 200, out);
  }

  const SegmentationResult& last_result(Session& s) {
    if (!s.last) {
      throw HttpError{409, "no segmentation yet; post a prompt first"};
    }
    return *s.last;
  }

  void routes() {
    http.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}, {"segmenter", std::string(to_string(cfg.segmenter))}});
    });
    http.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { create_session(req, res); });
    });
    http.Get("/api/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto s = find(req);
        std::lock_guard lock(s->mutex);
        send_json(res, 200, session_state(*s));
      });
    });
    http.Delete("/api/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        find(req);
        std::lock_guard lock(sessions_mutex);
        sessions.erase(req.path_params.at("id"));
        res.status = 204;
      });
    });
    http.Get("/api/sessions/:id/trajectory", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, trajectory_to_json(find(req)->pipeline->trajectory())); });
    });
    http.Get("/api/sessions/:id/frames/:k/thumbnail", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto s = find(req);
        const ScanTrajectory& traj = s->pipeline->trajectory();
        const int k = std::stoi(req.path_params.at("k"));
        if (k < 0 || k >= static_cast<int>(traj.size())) {
          throw HttpError{404, "no frame " + std::to_string(k)};
        }
        int side = options.thumbnail_size;
        if (req.has_param("size")) {
          side = std::stoi(req.get_param_value("size"));
        }
        side = std::clamp(side, 1, traj.config().size_l);
        const auto set =
            s->pipeline->frame_cache().get_or_render(*s->pano, s->digest, traj, &s->pipeline->grid_cache());
        send_png(res, encode_png(thumbnail(set->frames.at(k)->image, side)));
      });
    });
    http.Post("/api/sessions/:id/prompts", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_click(req, res, false); });
    });
    http.Post("/api/sessions/:id/corrections", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_click(req, res, true); });
    });
    http.Get("/api/sessions/:id/overlay", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto s = find(req);
        std::lock_guard lock(s->mutex);
        send_png(res, encode_binary_png(reduce_mask(last_result(*s).fused.binary, options.overlay_max_width)));
      });
    });
    http.Get("/api/sessions/:id/mask", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto s = find(req);
        std::lock_guard lock(s->mutex);
        send_png(res, encode_binary_png(last_result(*s).fused.binary));
      });
    });
  }

  std::size_t collect_idle() {
    const auto cutoff = Clock::now() - std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(options.idle_timeout_s));
    std::lock_guard lock(sessions_mutex);
    return std::erase_if(sessions, [&](const auto& kv) { return kv.second->last_access < cutoff; });
  }

  void start_janitor() {
    janitor = std::thread([this] {
      const auto period = std::chrono::duration<double>(std::clamp(options.idle_timeout_s / 4.0, 0.05, 30.0));
      std::unique_lock lock(janitor_mutex);
      while (!janitor_cv.wait_for(lock, period, [this] { return stopping; })) {
        collect_idle();
      }
    });
  }
};

SegmentationServer::SegmentationServer(PipelineConfig cfg, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(options))) {}

SegmentationServer::~SegmentationServer() { stop(); }

int SegmentationServer::bind() {
  if (impl_->port >= 0) {
    return impl_->port;
  }
  const int port = impl_->options.port == 0 ? impl_->http.bind_to_any_port(impl_->options.host)
                                            : (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)
                                                   ? impl_->options.port
                                                   : -1);
  if (port < 0) {
    throw UsageError(fmt::format("cannot bind {}:{}", impl_->options.host, impl_->options.port));
  }
  impl_->port = port;
  return port;
}

void SegmentationServer::run() {
  bind();
  if (!impl_->janitor.joinable()) {
    impl_->start_janitor();
  }
  impl_->http.listen_after_bind();
}

int SegmentationServer::start() {
  const int port = bind();
  impl_->start_janitor();
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void SegmentationServer::stop() {
  impl_->http.stop();
  {
    std::lock_guard lock(impl_->janitor_mutex);
    impl_->stopping = true;
  }
  impl_->janitor_cv.notify_all();
  if (impl_->worker.joinable()) {
    impl_->worker.join();
  }
  if (impl_->janitor.joinable()) {
    impl_->janitor.join();
  }
}

std::size_t SegmentationServer::session_count() const {
  std::lock_guard lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

std::size_t SegmentationServer::collect_idle() { return impl_->collect_idle(); }

}  // namespace panoscan
