// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"

namespace meshtex {

/// Row-major raster, 1 (gray) or 3 (rgb) channels, values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<double> pixels;  // index = (y*width + x)*channels + c

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c) {
    pixels.assign(size_t(w) * h * c, 0.0);
  }
  double at(int x, int y, int c) const {
    return pixels[(size_t(y) * width + x) * channels + c];
  }
  double& at(int x, int y, int c) {
    return pixels[(size_t(y) * width + x) * channels + c];
  }
};

/// Bilinear sample at continuous pixel coordinates (pixel centers at +0.5),
/// clamped to the image edge.
inline double sample_bilinear(const Image& image, double x, double y, int c) {
  auto fx = clamp(x - 0.5, 0.0, double(image.width - 1));
  auto fy = clamp(y - 0.5, 0.0, double(image.height - 1));
  auto x0 = int(fx), y0 = int(fy);
  auto x1 = std::min(x0 + 1, image.width - 1);
  auto y1 = std::min(y0 + 1, image.height - 1);
  auto tx = fx - x0, ty = fy - y0;
  return (1 - tx) * (1 - ty) * image.at(x0, y0, c) + tx * (1 - ty) * image.at(x1, y0, c) +
         (1 - tx) * ty * image.at(x0, y1, c) + tx * ty * image.at(x1, y1, c);
}

/// Integer-factor bilinear upsampling.
inline Image upsample_bilinear(const Image& image, int factor) {
  check(factor >= 1, errc::invalid_argument, "upsample factor must be >= 1");
  if (factor == 1) return image;
  auto out = Image(image.width * factor, image.height * factor, image.channels);
  for (auto y = 0; y < out.height; y++) {
    for (auto x = 0; x < out.width; x++) {
      auto sx = (x + 0.5) / factor;
      auto sy = (y + 0.5) / factor;
      for (auto c = 0; c < image.channels; c++) {
        out.at(x, y, c) = sample_bilinear(image, sx, sy, c);
      }
    }
  }
  return out;
}

inline double mean_squared_error(const Image& a, const Image& b) {
  check(a.width == b.width && a.height == b.height && a.channels == b.channels,
        errc::shape_mismatch, "image shapes differ");
  auto sum = 0.0;
  for (auto i = size_t{0}; i < a.pixels.size(); i++) {
    auto d = a.pixels[i] - b.pixels[i];
    sum += d * d;
  }
  return sum / double(a.pixels.size());
}

/// PSNR in dB against peak value 1.0; infinite for identical images.
inline double psnr(const Image& a, const Image& b) {
  auto mse = mean_squared_error(a, b);
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

struct PngCloser {
  std::FILE* file = nullptr;
  ~PngCloser() {
    if (file) std::fclose(file);
  }
};

}  // namespace detail

/// 8-bit PNG load; gray/palette/alpha inputs are expanded or stripped to the
/// declared channel layout (1 stays gray only for gray sources, else 3).
inline Image load_png(const std::string& path) {
  auto closer = detail::PngCloser{std::fopen(path.c_str(), "rb")};
  check(closer.file != nullptr, errc::file_not_found, path);

  png_byte header[8];
  check(std::fread(header, 1, 8, closer.file) == 8 && !png_sig_cmp(header, 0, 8),
        errc::parse_error, path + ": not a png file");

  auto png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  check(png != nullptr, errc::io_error, "png_create_read_struct failed");
  auto info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(errc::io_error, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(errc::parse_error, path + ": corrupt png data");
  }
  png_init_io(png, closer.file);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  auto color_type = png_get_color_type(png, info);
  auto bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  auto width = int(png_get_image_width(png, info));
  auto height = int(png_get_image_height(png, info));
  auto channels = int(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(errc::parse_error, path + ": unsupported channel count");
  }

  auto rows = std::vector<png_byte>(size_t(width) * height * channels);
  auto row_pointers = std::vector<png_bytep>(height);
  for (auto y = 0; y < height; y++) {
    row_pointers[y] = rows.data() + size_t(y) * width * channels;
  }
  png_read_image(png, row_pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  auto image = Image(width, height, channels);
  for (auto i = size_t{0}; i < rows.size(); i++) image.pixels[i] = rows[i] / 255.0;
  return image;
}

/// 8-bit PNG save (gray for 1 channel, rgb for 3); values clamped to [0,1].
inline void save_png(const Image& image, const std::string& path) {
  check(image.channels == 1 || image.channels == 3, errc::invalid_argument,
        "png save supports 1 or 3 channels");
  check(image.width > 0 && image.height > 0, errc::invalid_argument, "empty image");
  auto closer = detail::PngCloser{std::fopen(path.c_str(), "wb")};
  check(closer.file != nullptr, errc::io_error, "cannot open " + path + " for writing");

  auto png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  check(png != nullptr, errc::io_error, "png_create_write_struct failed");
  auto info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    raise(errc::io_error, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(errc::io_error, path + ": png write failed");
  }
  png_init_io(png, closer.file);
  png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  auto rows = std::vector<png_byte>(size_t(image.width) * image.height * image.channels);
  for (auto i = size_t{0}; i < rows.size(); i++) {
    rows[i] = png_byte(std::lround(clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  auto row_pointers = std::vector<png_bytep>(image.height);
  for (auto y = 0; y < image.height; y++) {
    row_pointers[y] = rows.data() + size_t(y) * image.width * image.channels;
  }
  png_write_image(png, row_pointers.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace meshtex
