#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panoscan/image.hpp"

namespace panoscan {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Decodes PNG or JPEG bytes into 8-bit RGB. Gray and alpha inputs are
/// expanded or stripped; 16-bit samples keep their high byte.
RgbImage decode_rgb(std::span<const std::uint8_t> bytes);
RgbImage read_rgb(const std::filesystem::path& path);

/// Encodes 8-bit data as PNG. One channel writes grayscale, three write RGB.
Bytes encode_png(const Image<std::uint8_t>& img);
void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& img);

/// Instance labels: 16-bit grayscale PNG (8-bit gray is accepted on read).
Bytes encode_label_png(const LabelImage& labels);
LabelImage decode_label_png(std::span<const std::uint8_t> bytes);
void write_label_png(const std::filesystem::path& path, const LabelImage& labels);
LabelImage read_label_png(const std::filesystem::path& path);

/// Masks on disk are 8-bit gray with 0 = background and 255 = foreground.
Bytes encode_mask_png(const MaskImage& mask);
MaskImage decode_mask_png(std::span<const std::uint8_t> bytes);
void write_mask_png(const std::filesystem::path& path, const MaskImage& mask);
MaskImage read_mask_png(const std::filesystem::path& path);

/// Binary {0,1} mask written as 0/255.
Bytes encode_binary_png(const BinaryMask& mask);
void write_binary_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_binary_png(const std::filesystem::path& path);

/// Real-valued plane quantized to 16 bits (diagnostics output).
void write_plane_png16(const std::filesystem::path& path, const MaskImage& plane);

}  // namespace panoscan
