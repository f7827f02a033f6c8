#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "panoscan/errors.hpp"

namespace panoscan {

/// Row-major interleaved raster. Used for panoramas (ERP geometry) as well as
/// square viewport frames.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) {
      throw UsageError("image dimensions must be non-negative with at least one channel");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::size_t offset(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  T& at(int x, int y, int c = 0) noexcept { return data_[offset(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[offset(x, y, c)]; }

  std::span<T> row(int y) noexcept {
    return {data_.data() + offset(0, y), static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + offset(0, y), static_cast<std::size_t>(width_) * channels_};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

/// 8-bit RGB panorama or viewport.
using RgbImage = Image<std::uint8_t>;
/// Real-valued raster (masks in [0,1], or RGB in [0,1] when 3 channels).
using FloatImage = Image<float>;
/// Single-channel real mask in [0,1].
using MaskImage = Image<float>;
/// Single-channel instance ids, 0 = background.
using LabelImage = Image<std::uint16_t>;
/// Single-channel {0,1}.
using BinaryMask = Image<std::uint8_t>;

/// Throws DataError unless (width, height) is a valid equirectangular size.
inline void require_erp_shape(int width, int height) {
  if (height < 1 || width < 2 || width != 2 * height) {
    throw DataError("equirectangular panorama must have width = 2 * height (got " +
                    std::to_string(width) + "x" + std::to_string(height) + ")");
  }
}

/// Cyclic horizontal shift: output column (x + shift) mod width holds input column x.
template <typename T>
Image<T> roll_horizontal(const Image<T>& img, int shift) {
  Image<T> out(img.width(), img.height(), img.channels());
  const int w = img.width();
  if (w == 0) {
    return out;
  }
  const int s = ((shift % w) + w) % w;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const int dst = (x + s) % w;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(dst, y, c) = img.at(x, y, c);
      }
    }
  }
  return out;
}

/// Binary mask of pixels equal to `id`.
inline BinaryMask label_equals(const LabelImage& labels, std::uint16_t id) {
  BinaryMask out(labels.width(), labels.height());
  auto src = labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] == id ? 1 : 0;
  }
  return out;
}

}  // namespace panoscan
