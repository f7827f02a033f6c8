#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "panoscan/sphere_geometry.hpp"

namespace panoscan {

/// Scanning parameters. Angles in degrees.
struct TrajectoryConfig {
  double beta_h = 90.0;
  double beta_v = 90.0;
  double overlap = 0.5;
  int size_l = 1024;

  double yaw_step() const noexcept { return beta_h * (1.0 - overlap); }
  double pitch_step() const noexcept { return beta_v * (1.0 - overlap); }

  /// Overlap between neighbouring frames implied by the steps: 1 - step / FoV.
  double overlap_ratio() const noexcept { return 1.0 - yaw_step() / beta_h; }

  /// Throws ConfigError for out-of-range parameters.
  void validate() const;

  friend bool operator==(const TrajectoryConfig&, const TrajectoryConfig&) = default;
};

/// A viewpoint with its grid position. column and row are 1-based; row 1 is
/// the top (northmost) pitch.
struct TrajectoryNode {
  Viewpoint viewpoint;
  int column = 1;
  int row = 1;
};

class ScanTrajectory {
 public:
  ScanTrajectory(TrajectoryConfig config, int n_yaw, int n_pitch, std::vector<TrajectoryNode> nodes);

  const TrajectoryConfig& config() const noexcept { return config_; }
  int n_yaw() const noexcept { return n_yaw_; }
  int n_pitch() const noexcept { return n_pitch_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const TrajectoryNode& operator[](std::size_t i) const { return nodes_[i]; }
  const std::vector<TrajectoryNode>& nodes() const noexcept { return nodes_; }
  std::vector<Viewpoint> viewpoints() const;

  /// Last and first viewpoint are one yaw step apart at the same pitch.
  bool closed_loop() const noexcept { return n_yaw_ % 2 == 0; }

  /// Intrinsics shared by every frame (horizontal FoV, size_l).
  CameraIntrinsics intrinsics() const;

 private:
  TrajectoryConfig config_;
  int n_yaw_;
  int n_pitch_;
  std::vector<TrajectoryNode> nodes_;
};

/// Column-first zigzag over the yaw x pitch grid: odd columns run top to
/// bottom, even columns bottom to top.
ScanTrajectory generate_trajectory(const TrajectoryConfig& cfg);

/// The trajectory repeated `cycles` times end to end.
std::vector<TrajectoryNode> cyclic_sequence(const ScanTrajectory& t, int cycles = 2);

/// Frames start .. start + N - 1 of the doubled sequence.
/// Throws DomainError unless 0 <= start < N.
std::vector<TrajectoryNode> cyclic_window(const ScanTrajectory& t, int start);

/// Monte-Carlo fraction of uniformly drawn directions visible in at least one frame.
double coverage_check(const ScanTrajectory& t, std::size_t samples, std::uint64_t seed = 0x5eed);

}  // namespace panoscan
