#pragma once

#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "panoscan/image.hpp"
#include "panoscan/scan_trajectory.hpp"
#include "panoscan/viewport_projection.hpp"

namespace panoscan {

/// The rendered frames of one panorama under one trajectory, in trajectory order.
struct FrameSet {
  std::string key;
  std::vector<std::shared_ptr<const ViewportFrame>> frames;
};

/// Keeps rendered frame sets keyed by (panorama digest, trajectory config).
///
/// Recently used sets stay in memory; with a directory configured, sets are
/// also written there as PNGs and read back on a later miss. Concurrent
/// requests for the same key render once.
class FrameCache {
 public:
  explicit FrameCache(std::filesystem::path disk_dir = {}, std::size_t memory_capacity = 2);

  static std::string key_for(const std::string& pano_digest, const TrajectoryConfig& cfg);

  std::shared_ptr<const FrameSet> get_or_render(const RgbImage& pano, const std::string& pano_digest,
                                                const ScanTrajectory& t, GridCache* grids = nullptr);

  struct Stats {
    std::size_t memory_hits = 0;
    std::size_t disk_hits = 0;
    std::size_t renders = 0;
  };
  Stats stats() const;
  void clear_memory();

 private:
  std::shared_ptr<const FrameSet> lookup_memory(const std::string& key);
  void remember(const std::shared_ptr<const FrameSet>& set);
  std::shared_ptr<std::mutex> key_mutex(const std::string& key);
  std::shared_ptr<const FrameSet> load_disk(const std::string& key, const ScanTrajectory& t);
  void store_disk(const FrameSet& set) const;

  std::filesystem::path disk_dir_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::shared_ptr<const FrameSet>> lru_;
  std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
  Stats stats_;
};

}  // namespace panoscan
