#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "panoscan/prompt_projection.hpp"
#include "panoscan/scan_trajectory.hpp"
#include "panoscan/synthetic_scenes.hpp"

namespace panoscan {

/// Throws DataError when the file is missing or not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

nlohmann::json trajectory_config_to_json(const TrajectoryConfig& cfg);

/// {"config": {...}, "n_yaw", "n_pitch", "closed_loop", "frames": [{frame_index, yaw_deg, pitch_deg, column, row}]}
nlohmann::json trajectory_to_json(const ScanTrajectory& t);

/// {"points": [{"u", "v", "label"}]}
nlohmann::json prompts_to_json(std::span<const PromptPoint> points);
std::vector<PromptPoint> prompts_from_json(const nlohmann::json& doc);

nlohmann::json frame_prompt_to_json(const FramePrompt& p);

/// Scenes use degrees: {"background": [r,g,b], "instances": [{"id", "type": "cap"|"rect"|"band", ...}]}.
nlohmann::json scene_to_json(const SphericalScene& scene);
SphericalScene scene_from_json(const nlohmann::json& doc);

struct ManifestEntry {
  std::filesystem::path rgb_path;
  std::filesystem::path label_path;
  std::uint16_t instance_id = 0;
};

/// JSON list of {rgb_path, label_path, instance_id}; relative paths resolve against `base_dir`.
std::vector<ManifestEntry> manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json manifest_to_json(std::span<const ManifestEntry> entries);

}  // namespace panoscan
