#include "panoscan/json_io.hpp"

#include <fstream>
#include <variant>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

using nlohmann::json;

json color_json(const Rgb8& c) { return json::array({c.r, c.g, c.b}); }

Rgb8 color_from(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw DataError("colors are [r, g, b] arrays");
  }
  auto channel = [](const json& v) {
    const int x = v.get<int>();
    if (x < 0 || x > 255) {
      throw DataError("color channel out of range 0..255");
    }
    return static_cast<std::uint8_t>(x);
  };
  return {channel(j[0]), channel(j[1]), channel(j[2])};
}

// Wraps nlohmann's exceptions so callers only ever see DataError.
template <class F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

json trajectory_config_to_json(const TrajectoryConfig& cfg) {
  return {{"beta_h_deg", cfg.beta_h},
          {"beta_v_deg", cfg.beta_v},
          {"overlap", cfg.overlap},
          {"size_l", cfg.size_l},
          {"yaw_step_deg", cfg.yaw_step()},
          {"pitch_step_deg", cfg.pitch_step()}};
}

json trajectory_to_json(const ScanTrajectory& t) {
  json frames = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const TrajectoryNode& n = t[i];
    frames.push_back({{"frame_index", i},
                      {"yaw_deg", n.viewpoint.yaw_deg()},
                      {"pitch_deg", n.viewpoint.pitch_deg()},
                      {"column", n.column},
                      {"row", n.row}});
  }
  return {{"config", trajectory_config_to_json(t.config())},
          {"n_yaw", t.n_yaw()},
          {"n_pitch", t.n_pitch()},
          {"count", t.size()},
          {"closed_loop", t.closed_loop()},
          {"frames", frames}};
}

json prompts_to_json(std::span<const PromptPoint> points) {
  json list = json::array();
  for (const PromptPoint& p : points) {
    list.push_back({{"u", p.u}, {"v", p.v}, {"label", std::string(to_string(p.label))}});
  }
  return {{"points", list}};
}

std::vector<PromptPoint> prompts_from_json(const json& doc) {
  return parse_guard("prompt file", [&] {
    std::vector<PromptPoint> points;
    for (const json& p : doc.at("points")) {
      points.push_back({p.at("u").get<double>(), p.at("v").get<double>(),
                        prompt_label_from_string(p.value("label", std::string("positive")))});
    }
    return points;
  });
}

json frame_prompt_to_json(const FramePrompt& p) {
  return {{"frame_index", p.frame_index},
          {"u_hat", p.u_hat},
          {"v_hat", p.v_hat},
          {"label", std::string(to_string(p.label))}};
}

json scene_to_json(const SphericalScene& scene) {
  json instances = json::array();
  for (const SceneInstance& inst : scene.instances) {
    json j = {{"id", inst.id}, {"color", color_json(inst.color)}};
    if (const auto* cap = std::get_if<SphericalCap>(&inst.shape)) {
      j["type"] = "cap";
      j["center_lat_deg"] = rad_to_deg(cap->center.theta());
      j["center_lon_deg"] = rad_to_deg(cap->center.phi());
      j["radius_deg"] = rad_to_deg(cap->radius);
    } else if (const auto* rect = std::get_if<LatLonRect>(&inst.shape)) {
      j["type"] = "rect";
      j["lat_min_deg"] = rad_to_deg(rect->lat_min);
      j["lat_max_deg"] = rad_to_deg(rect->lat_max);
      j["lon_min_deg"] = rad_to_deg(rect->lon_min);
      j["lon_max_deg"] = rad_to_deg(rect->lon_max);
    } else {
      const auto& band = std::get<LatitudeBand>(inst.shape);
      j["type"] = "band";
      j["lat_min_deg"] = rad_to_deg(band.lat_min);
      j["lat_max_deg"] = rad_to_deg(band.lat_max);
    }
    instances.push_back(std::move(j));
  }
  return {{"background", color_json(scene.background)}, {"instances", instances}};
}

SphericalScene scene_from_json(const json& doc) {
  try {
    return parse_guard("scene", [&] {
    SphericalScene s;
    if (doc.contains("background")) {
      s.background = color_from(doc["background"]);
    }
    for (const json& j : doc.at("instances")) {
      SceneInstance inst;
      const int id = j.at("id").get<int>();
      if (id < 1 || id > 65535) {
        throw DataError("instance ids must lie in 1..65535");
      }
      inst.id = static_cast<std::uint16_t>(id);
      inst.color = color_from(j.at("color"));
      const std::string type = j.at("type").get<std::string>();
      auto deg = [&](const char* key) { return deg_to_rad(j.at(key).get<double>()); };
      if (type == "cap") {
        inst.shape = SphericalCap{SphericalCoord(deg("center_lat_deg"), deg("center_lon_deg")), deg("radius_deg")};
      } else if (type == "rect") {
        inst.shape = LatLonRect{deg("lat_min_deg"), deg("lat_max_deg"), deg("lon_min_deg"), deg("lon_max_deg")};
      } else if (type == "band") {
        inst.shape = LatitudeBand{deg("lat_min_deg"), deg("lat_max_deg")};
      } else {
        throw DataError("unknown instance type \"" + type + "\"");
      }
      s.instances.push_back(std::move(inst));
    }
    s.validate();
    return s;
  });
  } catch (const DomainError& e) {
    throw DataError(std::string("invalid scene: ") + e.what());
  }
}

std::vector<ManifestEntry> manifest_from_json(const json& doc, const std::filesystem::path& base_dir) {
  return parse_guard("manifest", [&] {
    if (!doc.is_array()) {
      throw DataError("a manifest is a JSON list");
    }
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    std::vector<ManifestEntry> entries;
    for (const json& j : doc) {
      const int id = j.at("instance_id").get<int>();
      if (id < 1 || id > 65535) {
        throw DataError("instance_id must lie in 1..65535");
      }
      entries.push_back({resolve(j.at("rgb_path").get<std::string>()),
                         resolve(j.at("label_path").get<std::string>()), static_cast<std::uint16_t>(id)});
    }
    return entries;
  });
}

json manifest_to_json(std::span<const ManifestEntry> entries) {
  json list = json::array();
  for (const ManifestEntry& e : entries) {
    list.push_back({{"rgb_path", e.rgb_path.generic_string()},
                    {"label_path", e.label_path.generic_string()},
                    {"instance_id", e.instance_id}});
  }
  return list;
}

}  // namespace panoscan
