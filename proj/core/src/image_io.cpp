#include "panoscan/image_io.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace panoscan {
namespace {

// Decoded PNG before any conversion to the library's pixel types.
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->pos + count > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->pos, count);
  cursor->pos += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
  throw DataError(std::string("PNG: ") + msg);
}

void png_warning_ignore(png_structp, png_const_charp) {}

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

RawPng decode_png_raw(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) {
    throw DataError("not a PNG stream");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_to_exception, png_warning_ignore);
  if (png == nullptr) {
    throw DataError("PNG: cannot allocate decoder");
  }
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};

  PngReadCursor cursor{bytes, 0};
  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);

  const auto color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
  }
  png_read_update_info(png, info);

  RawPng raw;
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> buffer(rowbytes * raw.height);
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) {
    rows[y] = buffer.data() + rowbytes * y;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      raw.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  } else {
    for (int y = 0; y < raw.height; ++y) {
      const std::size_t row_samples = static_cast<std::size_t>(raw.width) * raw.channels;
      std::copy_n(rows[y], row_samples, raw.samples.begin() + row_samples * y);
    }
  }
  return raw;
}

// Writes `rows` of already packed big-endian samples.
Bytes encode_png_rows(int width, int height, int channels, int bit_depth,
                      const std::vector<std::uint8_t>& packed) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_to_exception, png_warning_ignore);
  if (png == nullptr) {
    throw DataError("PNG: cannot allocate encoder");
  }
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};

  Bytes out;
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(packed.data() + rowbytes * y));
  }
  png_write_end(png, nullptr);
  return out;
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  struct ErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
  };
  jpeg_decompress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = [](j_common_ptr info) {
    auto* mgr = reinterpret_cast<ErrorManager*>(info->err);
    (*info->err->format_message)(info, mgr->message);
    std::longjmp(mgr->jump, 1);
  };
  // Nothing with a destructor may live between setjmp and the decode calls.
  RgbImage img;
  if (setjmp(err.jump) != 0) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError(std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img = RgbImage(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height), 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.row(static_cast<int>(cinfo.output_scanline)).data();
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw DataError("short write to " + path.string());
  }
}

RgbImage decode_rgb(std::span<const std::uint8_t> bytes) {
  if (is_jpeg(bytes)) {
    return decode_jpeg(bytes);
  }
  if (!is_png(bytes)) {
    throw DataError("unsupported image format (expected PNG or JPEG)");
  }
  const RawPng raw = decode_png_raw(bytes);
  RgbImage img(raw.width, raw.height, 3);
  const int shift = raw.bit_depth == 16 ? 8 : 0;
  const bool gray = raw.channels <= 2;
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      for (int c = 0; c < 3; ++c) {
        const std::uint16_t s = raw.samples[base + (gray ? 0 : c)];
        img.at(x, y, c) = static_cast<std::uint8_t>(s >> shift);
      }
    }
  }
  return img;
}

RgbImage read_rgb(const std::filesystem::path& path) { return decode_rgb(read_file(path)); }

Bytes encode_png(const Image<std::uint8_t>& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw UsageError("PNG encoding supports 1 or 3 channel images");
  }
  std::vector<std::uint8_t> packed(img.data().begin(), img.data().end());
  return encode_png_rows(img.width(), img.height(), img.channels(), 8, packed);
}

void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& img) {
  write_file(path, encode_png(img));
}

Bytes encode_label_png(const LabelImage& labels) {
  std::vector<std::uint8_t> packed(labels.pixel_count() * 2);
  auto src = labels.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(src[i] >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(src[i] & 0xFF);
  }
  return encode_png_rows(labels.width(), labels.height(), 1, 16, packed);
}

LabelImage decode_label_png(std::span<const std::uint8_t> bytes) {
  const RawPng raw = decode_png_raw(bytes);
  if (raw.channels != 1) {
    throw DataError("label PNG must be single-channel grayscale");
  }
  LabelImage labels(raw.width, raw.height);
  std::copy(raw.samples.begin(), raw.samples.end(), labels.data().begin());
  return labels;
}

void write_label_png(const std::filesystem::path& path, const LabelImage& labels) {
  write_file(path, encode_label_png(labels));
}

LabelImage read_label_png(const std::filesystem::path& path) {
  return decode_label_png(read_file(path));
}

Bytes encode_mask_png(const MaskImage& mask) {
  if (mask.channels() != 1) {
    throw UsageError("mask must be single-channel");
  }
  Image<std::uint8_t> bytes(mask.width(), mask.height());
  auto src = mask.data();
  auto dst = bytes.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = to_byte(src[i]);
  }
  return encode_png(bytes);
}

MaskImage decode_mask_png(std::span<const std::uint8_t> bytes) {
  const RawPng raw = decode_png_raw(bytes);
  if (raw.channels != 1) {
    throw DataError("mask PNG must be single-channel grayscale");
  }
  const float scale = raw.bit_depth == 16 ? 65535.0F : 255.0F;
  MaskImage mask(raw.width, raw.height);
  auto dst = mask.data();
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    dst[i] = static_cast<float>(raw.samples[i]) / scale;
  }
  return mask;
}

void write_mask_png(const std::filesystem::path& path, const MaskImage& mask) {
  write_file(path, encode_mask_png(mask));
}

MaskImage read_mask_png(const std::filesystem::path& path) {
  return decode_mask_png(read_file(path));
}

Bytes encode_binary_png(const BinaryMask& mask) {
  Image<std::uint8_t> bytes(mask.width(), mask.height());
  auto src = mask.data();
  auto dst = bytes.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] != 0 ? 255 : 0;
  }
  return encode_png(bytes);
}

void write_binary_png(const std::filesystem::path& path, const BinaryMask& mask) {
  write_file(path, encode_binary_png(mask));
}

BinaryMask read_binary_png(const std::filesystem::path& path) {
  const RawPng raw = decode_png_raw(read_file(path));
  if (raw.channels != 1) {
    throw DataError("mask PNG must be single-channel grayscale");
  }
  const std::uint16_t half = raw.bit_depth == 16 ? 32768 : 128;
  BinaryMask mask(raw.width, raw.height);
  auto dst = mask.data();
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    dst[i] = raw.samples[i] >= half ? 1 : 0;
  }
  return mask;
}

void write_plane_png16(const std::filesystem::path& path, const MaskImage& plane) {
  std::vector<std::uint8_t> packed(plane.pixel_count() * 2);
  auto src = plane.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto q = static_cast<std::uint16_t>(
        std::lround(std::clamp(src[i], 0.0F, 1.0F) * 65535.0F));
    packed[2 * i] = static_cast<std::uint8_t>(q >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(q & 0xFF);
  }
  write_file(path, encode_png_rows(plane.width(), plane.height(), 1, 16, packed));
}

}  // namespace panoscan
