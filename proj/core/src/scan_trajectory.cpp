#include "panoscan/scan_trajectory.hpp"

#include <cmath>
#include <random>
#include <string>

#include "panoscan/errors.hpp"
#include "panoscan/viewport_projection.hpp"

namespace panoscan {
namespace {

// Ratios such as 360 / (90 * (1 - 0.8)) land a few ulps above an integer.
int ceil_tolerant(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

}  // namespace

void TrajectoryConfig::validate() const {
  if (!(beta_h > 0.0 && beta_h < 180.0) || !(beta_v > 0.0 && beta_v <= 180.0)) {
    throw ConfigError("field of view must lie in (0, 180) degrees");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw ConfigError("overlap ratio must lie in [0, 1)");
  }
  if (!(yaw_step() > 0.0) || (!(pitch_step() > 0.0) && beta_v < 180.0)) {
    throw ConfigError("angular steps must be positive");
  }
  if (size_l < 2) {
    throw ConfigError("viewport side must be at least 2 pixels");
  }
}

ScanTrajectory::ScanTrajectory(TrajectoryConfig config, int n_yaw, int n_pitch,
                               std::vector<TrajectoryNode> nodes)
    : config_(config), n_yaw_(n_yaw), n_pitch_(n_pitch), nodes_(std::move(nodes)) {}

std::vector<Viewpoint> ScanTrajectory::viewpoints() const {
  std::vector<Viewpoint> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) {
    out.push_back(n.viewpoint);
  }
  return out;
}

CameraIntrinsics ScanTrajectory::intrinsics() const {
  return intrinsics_from_fov(config_.beta_h, config_.size_l);
}

ScanTrajectory generate_trajectory(const TrajectoryConfig& cfg) {
  cfg.validate();
  const int n_yaw = ceil_tolerant(360.0 / cfg.yaw_step());
  const int n_pitch = cfg.beta_v >= 180.0 ? 1 : ceil_tolerant((180.0 - cfg.beta_v) / cfg.pitch_step()) + 1;

  const double top = 90.0 - cfg.beta_v / 2.0;
  std::vector<double> pitches(n_pitch);
  for (int r = 0; r < n_pitch; ++r) {
    pitches[r] = n_pitch == 1 ? 0.0 : top - r * (2.0 * top) / (n_pitch - 1);
  }
  // Pin the last row so it is exactly symmetric with the first.
  if (n_pitch > 1) {
    pitches.back() = -top;
  }

  std::vector<TrajectoryNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_yaw) * n_pitch);
  for (int j = 1; j <= n_yaw; ++j) {
    const double yaw = (j - 1) * cfg.yaw_step();
    for (int i = 1; i <= n_pitch; ++i) {
      const int row = (j % 2 == 1) ? i : n_pitch + 1 - i;
      nodes.push_back({Viewpoint(yaw, pitches[row - 1]), j, row});
    }
  }
  return ScanTrajectory(cfg, n_yaw, n_pitch, std::move(nodes));
}

std::vector<TrajectoryNode> cyclic_sequence(const ScanTrajectory& t, int cycles) {
  if (cycles < 1) {
    throw DomainError("cycle count must be positive");
  }
  std::vector<TrajectoryNode> out;
  out.reserve(t.size() * cycles);
  for (int c = 0; c < cycles; ++c) {
    out.insert(out.end(), t.nodes().begin(), t.nodes().end());
  }
  return out;
}

std::vector<TrajectoryNode> cyclic_window(const ScanTrajectory& t, int start) {
  const int n = static_cast<int>(t.size());
  if (start < 0 || start >= n) {
    throw DomainError("window start " + std::to_string(start) + " outside [0, " +
                      std::to_string(n) + ")");
  }
  const std::vector<TrajectoryNode> doubled = cyclic_sequence(t, 2);
  return {doubled.begin() + start, doubled.begin() + start + n};
}

double coverage_check(const ScanTrajectory& t, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) {
    return 0.0;
  }
  const CameraIntrinsics k = t.intrinsics();
  // The pano size only fixes the yaw lattice; any 2:1 size works for directions.
  constexpr int kWidth = 4096;
  std::vector<ViewportCamera> cams;
  cams.reserve(t.size());
  for (const auto& node : t.nodes()) {
    cams.emplace_back(node.viewpoint, k, kWidth, kWidth / 2);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::size_t covered = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    while (v.norm() < 1e-12) {
      v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    }
    const UnitVector d = UnitVector::normalized(v);
    for (const auto& cam : cams) {
      if (cam.project(d)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(samples);
}

}  // namespace panoscan
