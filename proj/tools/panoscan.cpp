// panoscan: command line front end.
//
//   panoscan trajectory               print the scanning trajectory as JSON
//   panoscan project  --pano P        render the trajectory frames
//   panoscan segment  --pano P ...    segment from a prompt file
//   panoscan synth    --out D         analytic scene with ground truth
//   panoscan eval     --manifest M    click protocol over a benchmark
//   panoscan serve    --bind H:P      HTTP session server
//
// Exit codes: 0 success, 1 usage, 2 data, 3 segmenter backend.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "panoscan/config.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/evaluation.hpp"
#include "panoscan/image_io.hpp"
#include "panoscan/json_io.hpp"
#include "panoscan/pipeline.hpp"
#include "panoscan/server.hpp"
#include "panoscan/synthetic_scenes.hpp"

namespace fs = std::filesystem;
using namespace panoscan;

namespace {

struct ConfigOptions {
  std::string config_file;
  std::optional<double> beta_h;
  std::optional<double> beta_v;
  std::optional<double> overlap;
  std::optional<int> size_l;
  std::optional<std::string> segmenter;
  std::optional<std::string> endpoint;
  std::optional<double> timeout;
  std::optional<int> retries;
  std::optional<double> threshold;
  std::optional<int> threads;
  std::optional<std::string> cache_dir;
};

void add_trajectory_options(CLI::App* app, ConfigOptions& o) {
  app->add_option("--config", o.config_file, "Config file ([trajectory], [segmenter], [pipeline])")
      ->check(CLI::ExistingFile);
  app->add_option("--beta-h", o.beta_h, "Horizontal field of view, degrees");
  app->add_option("--beta-v", o.beta_v, "Vertical field of view, degrees");
  app->add_option("--overlap", o.overlap, "Overlap ratio r in [0, 1)");
  app->add_option("--size-l", o.size_l, "Viewport side L in pixels");
}

void add_pipeline_options(CLI::App* app, ConfigOptions& o) {
  add_trajectory_options(app, o);
  app->add_option("--segmenter", o.segmenter, "oracle or external")->check(CLI::IsMember({"oracle", "external"}));
  app->add_option("--endpoint", o.endpoint, "External segmenter base URL");
  app->add_option("--timeout", o.timeout, "Segmenter request timeout, seconds");
  app->add_option("--retries", o.retries, "Extra attempts after a transport failure");
  app->add_option("--threshold", o.threshold, "Fusion threshold in (0, 1]");
  app->add_option("--threads", o.threads, "Worker threads (0 = automatic)");
  app->add_option("--cache-dir", o.cache_dir, "Directory for cached frame renders");
}

PipelineConfig resolve_config(const ConfigOptions& o) {
  PipelineConfig cfg = o.config_file.empty() ? PipelineConfig{} : load_config(o.config_file);
  if (o.beta_h) cfg.trajectory.beta_h = *o.beta_h;
  if (o.beta_v) cfg.trajectory.beta_v = *o.beta_v;
  if (o.overlap) cfg.trajectory.overlap = *o.overlap;
  if (o.size_l) cfg.trajectory.size_l = *o.size_l;
  if (o.segmenter) cfg.segmenter = segmenter_kind_from_string(*o.segmenter);
  if (o.endpoint) cfg.endpoint.base_url = *o.endpoint;
  if (o.timeout) cfg.endpoint.timeout_s = *o.timeout;
  if (o.retries) cfg.endpoint.retries = *o.retries;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.threads) cfg.threads = *o.threads;
  if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
  cfg.validate();
  return cfg;
}

std::shared_ptr<const LabelImage> load_labels_for(const PipelineConfig& cfg, const std::string& path,
                                                  const RgbImage& pano) {
  if (path.empty()) {
    if (cfg.segmenter == SegmenterKind::oracle) {
      throw UsageError("the oracle segmenter needs --labels");
    }
    return nullptr;
  }
  auto labels = std::make_shared<const LabelImage>(read_label_png(path));
  if (labels->width() != pano.width() || labels->height() != pano.height()) {
    throw DataError("label plane and panorama differ in size");
  }
  return labels;
}

// ---- subcommands ----

void run_trajectory(const ConfigOptions& o) {
  const PipelineConfig cfg = resolve_config(o);
  std::cout << trajectory_to_json(generate_trajectory(cfg.trajectory)).dump(2) << '\n';
}

void run_project(const ConfigOptions& o, const std::string& pano_path, const std::string& out_dir) {
  const PipelineConfig cfg = resolve_config(o);
  const RgbImage pano = read_rgb(pano_path);
  require_erp_shape(pano.width(), pano.height());
  const ScanTrajectory t = generate_trajectory(cfg.trajectory);
  fs::create_directories(out_dir);
  GridCache grids;
  const std::vector<Viewpoint> viewpoints = t.viewpoints();
  for (const ViewportFrame& f : render_frames(pano, viewpoints, t.intrinsics(), &grids)) {
    write_png(fs::path(out_dir) / fmt::format("frame_{:03d}.png", f.frame_index), f.image);
  }
  write_json_file(fs::path(out_dir) / "trajectory.json", trajectory_to_json(t));
  fmt::print("{} frames written to {}\n", t.size(), out_dir);
}

struct SegmentArgs {
  std::string pano;
  std::string prompts;
  std::string labels;
  std::string out;
  std::string result;
  std::string plane;
};

void run_segment(const ConfigOptions& o, const SegmentArgs& a) {
  const PipelineConfig cfg = resolve_config(o);
  const RgbImage pano = read_rgb(a.pano);
  require_erp_shape(pano.width(), pano.height());
  const std::vector<PromptPoint> prompts = prompts_from_json(read_json_file(a.prompts));
  Pipeline pipeline(cfg, make_segmenter(cfg, load_labels_for(cfg, a.labels, pano)));
  const SegmentationResult result = pipeline.segment(pano, prompts);
  write_binary_png(a.out, result.fused.binary);
  if (!a.plane.empty()) {
    write_plane_png16(a.plane, result.fused.plane);
  }
  if (!a.result.empty()) {
    write_json_file(a.result, result_to_json(result));
  }
  for (const StageTiming& s : result.trace) {
    fmt::print(stderr, "{:<10}{:>10.1f} ms  {}\n", s.stage, s.millis, s.detail);
  }
}

struct SynthArgs {
  std::string out;
  std::string scene;
  std::uint64_t seed = 1;
  int width = 2048;
  RandomSceneOptions random;
};

void run_synth(const SynthArgs& a) {
  if (a.width < 2 || a.width % 2 != 0) {
    throw UsageError("--width must be even and at least 2");
  }
  const SphericalScene scene =
      a.scene.empty() ? random_scene(a.seed, a.random) : scene_from_json(read_json_file(a.scene));
  const RenderedScene r = render_scene(scene, a.width, a.width / 2);
  const fs::path out(a.out);
  fs::create_directories(out);
  write_png(out / "rgb.png", r.rgb);
  write_label_png(out / "labels.png", r.labels);
  write_json_file(out / "scene.json", scene_to_json(scene));

  const SizeCensus census = scene_size_census(r.labels);
  nlohmann::json instances = nlohmann::json::array();
  std::vector<ManifestEntry> manifest;
  for (const SceneInstance& inst : scene.instances) {
    nlohmann::json j = {{"id", inst.id}, {"area", 0}, {"bucket", nullptr}, {"prompt", nullptr}};
    const auto it = std::find_if(census.instances.begin(), census.instances.end(),
                                 [&](const InstanceStats& s) { return s.id == inst.id; });
    if (it != census.instances.end()) {
      const PromptPoint p = initial_click(label_equals(r.labels, inst.id));
      j["area"] = it->area;
      j["bucket"] = std::string(to_string(it->bucket));
      j["prompt"] = {{"u", p.u}, {"v", p.v}, {"label", "positive"}};
      manifest.push_back({"rgb.png", "labels.png", inst.id});
    }
    instances.push_back(std::move(j));
  }
  write_json_file(out / "instances.json", instances);
  write_json_file(out / "manifest.json", manifest_to_json(manifest));
  fmt::print("{} instances ({} small, {} medium, {} large) written to {}\n", scene.instances.size(),
             census.counts[0], census.counts[1], census.counts[2], a.out);
}

void run_eval(const ConfigOptions& o, const std::string& manifest_path, int rounds, const std::string& report_path) {
  const PipelineConfig cfg = resolve_config(o);
  const auto entries = manifest_from_json(read_json_file(manifest_path), fs::path(manifest_path).parent_path());
  std::map<fs::path, std::shared_ptr<const RgbImage>> rgbs;
  std::map<fs::path, std::shared_ptr<const LabelImage>> labels;
  std::vector<BenchmarkItem> bench;
  for (const ManifestEntry& e : entries) {
    auto& rgb = rgbs[e.rgb_path];
    if (!rgb) {
      rgb = std::make_shared<const RgbImage>(read_rgb(e.rgb_path));
      require_erp_shape(rgb->width(), rgb->height());
    }
    auto& lab = labels[e.label_path];
    if (!lab) {
      lab = std::make_shared<const LabelImage>(read_label_png(e.label_path));
    }
    bench.push_back({fmt::format("{}#{}", e.rgb_path.filename().string(), e.instance_id), rgb, lab, e.instance_id});
  }
  const BenchmarkReport report = run_protocol(bench, rounds, make_protocol_segment_fn(cfg));
  std::cout << format_report_table(report);
  for (const InstanceRecord& rec : report.instances) {
    if (rec.failed) {
      fmt::print(stderr, "warning: {} failed: {}\n", rec.name, rec.failure);
    }
  }
  if (!report_path.empty()) {
    write_json_file(report_path, report_to_json(report));
  }
}

struct ServeArgs {
  std::string bind = "127.0.0.1:8080";
  ServeOptions options;
};

void run_serve(const ConfigOptions& o, ServeArgs a) {
  const PipelineConfig cfg = resolve_config(o);
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) {
    throw UsageError("--bind expects host:port");
  }
  a.options.host = a.bind.substr(0, colon);
  try {
    a.options.port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--bind expects host:port");
  }
  SegmentationServer server(cfg, a.options);
  const int port = server.bind();
  fmt::print("serving on http://{}:{}\n", a.options.host, port);
  std::fflush(stdout);
  server.run();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Promptable panoramic segmentation through perspective scanning"};
  app.require_subcommand(1);

  ConfigOptions traj_opts;
  auto* traj_cmd = app.add_subcommand("trajectory", "Print the scanning trajectory as JSON");
  add_trajectory_options(traj_cmd, traj_opts);

  ConfigOptions project_opts;
  std::string project_pano;
  std::string project_out;
  auto* project_cmd = app.add_subcommand("project", "Render trajectory frames and trajectory.json");
  add_trajectory_options(project_cmd, project_opts);
  project_cmd->add_option("--pano", project_pano, "Equirectangular panorama (PNG/JPEG)")->required();
  project_cmd->add_option("--out", project_out, "Output directory")->required();

  ConfigOptions segment_opts;
  SegmentArgs segment_args;
  auto* segment_cmd = app.add_subcommand("segment", "Segment a panorama from click prompts");
  add_pipeline_options(segment_cmd, segment_opts);
  segment_cmd->add_option("--pano", segment_args.pano, "Equirectangular panorama (PNG/JPEG)")->required();
  segment_cmd->add_option("--prompts", segment_args.prompts, "Prompt JSON {\"points\": [...]}")->required();
  segment_cmd->add_option("--labels", segment_args.labels, "16-bit label PNG (oracle segmenter)");
  segment_cmd->add_option("--out", segment_args.out, "Output mask PNG")->required();
  segment_cmd->add_option("--result", segment_args.result, "Result JSON with trace and frame prompts");
  segment_cmd->add_option("--plane", segment_args.plane, "Fused real-valued plane as 16-bit PNG");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Render an analytic scene with exact labels");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--scene", synth_args.scene, "Scene JSON; random scene when absent");
  synth_cmd->add_option("--seed", synth_args.seed, "Random scene seed");
  synth_cmd->add_option("--width", synth_args.width, "Panorama width (height is half)");
  synth_cmd->add_option("--instances", synth_args.random.instance_count, "Random scene instance count");
  synth_cmd->add_option("--seam", synth_args.random.seam_crossing, "Instances crossing the seam");
  synth_cmd->add_option("--pole", synth_args.random.pole_adjacent, "Instances next to a pole");

  ConfigOptions eval_opts;
  std::string eval_manifest;
  int eval_rounds = 1;
  std::string eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "Run the 1-click or 3-click protocol over a manifest");
  add_pipeline_options(eval_cmd, eval_opts);
  eval_cmd->add_option("--manifest", eval_manifest, "JSON list of {rgb_path, label_path, instance_id}")->required();
  eval_cmd->add_option("--rounds", eval_rounds, "Click rounds")->check(CLI::IsMember({1, 3}));
  eval_cmd->add_option("--report", eval_report, "Report JSON");

  ConfigOptions serve_opts;
  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  add_pipeline_options(serve_cmd, serve_opts);
  serve_cmd->add_option("--bind", serve_args.bind, "host:port (port 0 picks a free one)");
  serve_cmd->add_option("--idle-timeout", serve_args.options.idle_timeout_s, "Seconds before idle sessions are dropped");
  serve_cmd->add_option("--overlay-width", serve_args.options.overlay_max_width, "Maximum overlay width");
  serve_cmd->add_option("--thumbnail-size", serve_args.options.thumbnail_size, "Frame thumbnail side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*traj_cmd) {
      run_trajectory(traj_opts);
    } else if (*project_cmd) {
      run_project(project_opts, project_pano, project_out);
    } else if (*segment_cmd) {
      run_segment(segment_opts, segment_args);
    } else if (*synth_cmd) {
      run_synth(synth_args);
    } else if (*eval_cmd) {
      run_eval(eval_opts, eval_manifest, eval_rounds, eval_report);
    } else if (*serve_cmd) {
      run_serve(serve_opts, serve_args);
    }
  } catch (const BackendError& e) {
    fmt::print(stderr, "panoscan: segmenter error{}: {}\n", e.stage().empty() ? "" : " in " + e.stage(), e.what());
    return static_cast<int>(ExitCode::backend);
  } catch (const std::exception& e) {
    fmt::print(stderr, "panoscan: {}\n", e.what());
    return static_cast<int>(exit_code_for(e));
  }
  return 0;
}
