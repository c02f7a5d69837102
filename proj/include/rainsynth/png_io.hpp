#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/photometric.hpp"

namespace rainsynth {

/// Decoded PNG with values normalized by the bit depth's maximum.
/// channels is 1 (gray) or 3 (rgb); alpha and palettes are resolved on load.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 3;
  int bit_depth = 8;  // 8 or 16
  std::vector<double> values;  // row-major, interleaved
};

namespace detail {

struct FileHandle {
  std::FILE* f = nullptr;
  explicit FileHandle(const std::filesystem::path& path, const char* mode)
      : f(std::fopen(path.string().c_str(), mode)) {}
  ~FileHandle() {
    if (f) std::fclose(f);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

[[noreturn]] inline void png_error_to_exception(png_structp,
                                                png_const_charp msg) {
  throw IoError(std::string("libpng: ") + msg);
}

inline void png_warning_silencer(png_structp, png_const_charp) {}

}  // namespace detail

inline PngImage read_png(const std::filesystem::path& path) {
  detail::FileHandle file(path, "rb");
  if (!file.f) throw IoError("cannot open " + path.string() + " for reading");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           detail::png_error_to_exception,
                                           detail::png_warning_silencer);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  PngImage out;
  try {
    png_init_io(png, file.f);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
      png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA ||
        png_get_valid(png, info, PNG_INFO_tRNS))
      png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // host little-endian samples
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    bit_depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3)
      throw IoError("unsupported channel count after decode: " +
                    std::to_string(channels));
    out.channels = channels;
    out.bit_depth = bit_depth;

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> data(row_bytes * out.height);
    std::vector<png_bytep> rows(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = data.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    out.values.resize(std::size_t(out.width) * out.height * channels);
    if (bit_depth == 16) {
      for (int y = 0; y < out.height; ++y) {
        const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
        for (int i = 0; i < out.width * channels; ++i)
          out.values[std::size_t(y) * out.width * channels + i] =
              row[i] / maxval;
      }
    } else {
      for (int y = 0; y < out.height; ++y) {
        const png_byte* row = rows[y];
        for (int i = 0; i < out.width * channels; ++i)
          out.values[std::size_t(y) * out.width * channels + i] =
              row[i] / maxval;
      }
    }
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

namespace detail {

inline void write_png_impl(const std::filesystem::path& path,
                           const std::vector<double>& values, int width,
                           int height, int channels, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw ParamOutOfRangeError("PNG bit depth must be 8 or 16");
  FileHandle file(path, "wb");
  if (!file.f) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_to_exception,
                                            png_warning_silencer);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  try {
    png_init_io(png, file.f);
    // Fixed compression settings; output bytes are a pure function of the
    // pixel data.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, width, height, bit_depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);

    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    const std::size_t row_values = std::size_t(width) * channels;
    if (bit_depth == 16) {
      std::vector<std::uint16_t> row(row_values);
      for (int y = 0; y < height; ++y) {
        for (std::size_t i = 0; i < row_values; ++i) {
          const double v = std::clamp(values[y * row_values + i], 0.0, 1.0);
          row[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
        }
        png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
      }
    } else {
      std::vector<png_byte> row(row_values);
      for (int y = 0; y < height; ++y) {
        for (std::size_t i = 0; i < row_values; ++i) {
          const double v = std::clamp(values[y * row_values + i], 0.0, 1.0);
          row[i] = static_cast<png_byte>(std::lround(v * maxval));
        }
        png_write_row(png, row.data());
      }
    }
    png_write_end(png, info);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline void write_png(const std::filesystem::path& path,
                      const ImageBuffer& image, int bit_depth) {
  detail::write_png_impl(path, image.values, image.width, image.height, 3,
                         bit_depth);
}

inline void write_png(const std::filesystem::path& path, const RainMask& mask,
                      int bit_depth) {
  detail::write_png_impl(path, mask.values, mask.width, mask.height, 1,
                         bit_depth);
}

/// Expands gray to RGB so downstream compositing always sees 3 channels.
inline ImageBuffer to_image_buffer(const PngImage& png) {
  ImageBuffer img;
  img.width = png.width;
  img.height = png.height;
  img.values.resize(std::size_t(png.width) * png.height * 3);
  const std::size_t n = std::size_t(png.width) * png.height;
  if (png.channels == 3) {
    img.values = png.values;
  } else {
    for (std::size_t p = 0; p < n; ++p)
      for (int c = 0; c < 3; ++c) img.values[p * 3 + c] = png.values[p];
  }
  return img;
}

inline ImageBuffer read_png_rgb(const std::filesystem::path& path,
                                int* bit_depth = nullptr) {
  const PngImage png = read_png(path);
  if (bit_depth) *bit_depth = png.bit_depth;
  return to_image_buffer(png);
}

}  // namespace rainsynth
