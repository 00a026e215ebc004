// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "fieldsplat/error.hpp"
#include "fieldsplat/image.hpp"

namespace fieldsplat {

// Standard sRGB transfer function; PNGs store 8-bit sRGB, everything in
// memory is linear [0,1].
inline double linear_to_srgb(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline uint8_t encode_srgb_byte(double linear) {
  return static_cast<uint8_t>(std::lround(linear_to_srgb(linear) * 255.0));
}

inline double decode_srgb_byte(uint8_t b) { return srgb_to_linear(b / 255.0); }

namespace detail {
struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace detail

// Writes a 1- or 3-channel linear image as 8-bit sRGB PNG.
inline void save_png(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(errc::kInvalidArgument, "PNG writer supports 1 or 3 channels");
  }
  detail::FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(errc::kFileNotFound, "cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(errc::kFormatError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(errc::kFormatError, "PNG write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint8_t> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        row[static_cast<size_t>(x) * img.channels + c] = encode_srgb_byte(img.at(y, x, c));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads an 8-bit PNG back into linear doubles. Gray and RGB supported;
// palette/alpha variants are expanded/stripped.
inline Image load_png(const std::filesystem::path& path) {
  detail::FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error(errc::kFileNotFound, "cannot open: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(errc::kFormatError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(errc::kFormatError, "PNG read failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(errc::kFormatError, "unsupported PNG channel count");
  }
  Image img(height, width, channels);
  std::vector<uint8_t> row(static_cast<size_t>(width) * channels);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(y, x, c) = decode_srgb_byte(row[static_cast<size_t>(x) * channels + c]);
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// PFM, grayscale, little-endian (negative scale), bottom-to-top rows as per
// the format. Used for depth so metric values survive round trips.
inline void save_pfm(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1) throw Error(errc::kInvalidArgument, "PFM writer expects 1 channel");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(errc::kFileNotFound, "cannot open for writing: " + path.string());
  os << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
  std::vector<float> row(img.width);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x) row[x] = static_cast<float>(img.at(y, x));
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw Error(errc::kFormatError, "PFM write failed: " + path.string());
}

inline Image load_pfm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(errc::kFileNotFound, "cannot open: " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  is >> magic >> width >> height >> scale;
  if (magic != "Pf" || width <= 0 || height <= 0 || scale >= 0.0) {
    throw Error(errc::kFormatError, "unsupported PFM header: " + path.string());
  }
  is.get();  // single whitespace after the header
  Image img(height, width, 1);
  std::vector<float> row(width);
  for (int y = height - 1; y >= 0; --y) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!is) throw Error(errc::kFormatError, "PFM truncated: " + path.string());
    for (int x = 0; x < width; ++x) img.at(y, x) = row[x];
  }
  return img;
}

}  // namespace fieldsplat
