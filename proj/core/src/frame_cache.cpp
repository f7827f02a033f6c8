#include "panoscan/frame_cache.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "panoscan/codec.hpp"
#include "panoscan/errors.hpp"
#include "panoscan/image_io.hpp"

namespace panoscan {

FrameCache::FrameCache(std::filesystem::path disk_dir, std::size_t memory_capacity)
    : disk_dir_(std::move(disk_dir)), capacity_(std::max<std::size_t>(memory_capacity, 1)) {}

std::string FrameCache::key_for(const std::string& pano_digest, const TrajectoryConfig& cfg) {
  const std::string text = fmt::format("{}|{:.17g}|{:.17g}|{:.17g}|{}", pano_digest, cfg.beta_h, cfg.beta_v,
                                       cfg.overlap, cfg.size_l);
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  return sha256_hex({bytes, text.size()}).substr(0, 32);
}

std::shared_ptr<const FrameSet> FrameCache::lookup_memory(const std::string& key) {
  std::lock_guard lock(mutex_);
  const auto it = std::find_if(lru_.begin(), lru_.end(), [&](const auto& s) { return s->key == key; });
  if (it == lru_.end()) {
    return nullptr;
  }
  lru_.splice(lru_.begin(), lru_, it);
  return lru_.front();
}

void FrameCache::remember(const std::shared_ptr<const FrameSet>& set) {
  std::lock_guard lock(mutex_);
  lru_.push_front(set);
  while (lru_.size() > capacity_) {
    lru_.pop_back();
  }
}

std::shared_ptr<std::mutex> FrameCache::key_mutex(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto& m = key_locks_[key];
  if (!m) {
    m = std::make_shared<std::mutex>();
  }
  return m;
}

std::shared_ptr<const FrameSet> FrameCache::get_or_render(const RgbImage& pano, const std::string& pano_digest,
                                                          const ScanTrajectory& t, GridCache* grids) {
  const std::string key = key_for(pano_digest, t.config());
  if (auto hit = lookup_memory(key)) {
    std::lock_guard lock(mutex_);
    ++stats_.memory_hits;
    return hit;
  }
  const auto guard = key_mutex(key);
  std::lock_guard key_lock(*guard);
  // Another thread may have finished while we waited for the key.
  if (auto hit = lookup_memory(key)) {
    std::lock_guard lock(mutex_);
    ++stats_.memory_hits;
    return hit;
  }
  if (auto loaded = load_disk(key, t)) {
    remember(loaded);
    std::lock_guard lock(mutex_);
    ++stats_.disk_hits;
    return loaded;
  }

  auto set = std::make_shared<FrameSet>();
  set->key = key;
  const std::vector<Viewpoint> viewpoints = t.viewpoints();
  for (ViewportFrame& f : render_frames(pano, viewpoints, t.intrinsics(), grids)) {
    set->frames.push_back(std::make_shared<const ViewportFrame>(std::move(f)));
  }
  if (!disk_dir_.empty()) {
    store_disk(*set);
  }
  remember(set);
  std::lock_guard lock(mutex_);
  ++stats_.renders;
  return set;
}

std::shared_ptr<const FrameSet> FrameCache::load_disk(const std::string& key, const ScanTrajectory& t) {
  if (disk_dir_.empty()) {
    return nullptr;
  }
  const std::filesystem::path dir = disk_dir_ / key;
  if (!std::filesystem::exists(dir / "complete")) {
    return nullptr;
  }
  const CameraIntrinsics k = t.intrinsics();
  auto set = std::make_shared<FrameSet>();
  set->key = key;
  try {
    for (std::size_t i = 0; i < t.size(); ++i) {
      ViewportFrame f;
      f.image = read_rgb(dir / fmt::format("frame_{:03d}.png", i));
      if (f.image.width() != k.size_l || f.image.height() != k.size_l) {
        return nullptr;
      }
      f.viewpoint = t[i].viewpoint;
      f.intrinsics = k;
      f.rotation = rotation_from_viewpoint(f.viewpoint);
      f.frame_index = static_cast<int>(i);
      set->frames.push_back(std::make_shared<const ViewportFrame>(std::move(f)));
    }
  } catch (const DataError&) {
    // A damaged cache entry is rendered again.
    return nullptr;
  }
  return set;
}

void FrameCache::store_disk(const FrameSet& set) const {
  const std::filesystem::path dir = disk_dir_ / set.key;
  std::filesystem::create_directories(dir);
  for (const auto& f : set.frames) {
    write_png(dir / fmt::format("frame_{:03d}.png", f->frame_index), f->image);
  }
  // Marker written last so a half-written entry is never read.
  write_file(dir / "complete", {});
}

FrameCache::Stats FrameCache::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void FrameCache::clear_memory() {
  std::lock_guard lock(mutex_);
  lru_.clear();
}

}  // namespace panoscan
