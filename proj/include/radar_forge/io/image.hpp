// Copyright 2026, radar-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/io/binary.hpp"

namespace radar_forge {

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* pixel(int u, int v) { return data.data() + (static_cast<std::size_t>(v) * width + u) * 3; }
  const std::uint8_t* pixel(int u, int v) const { return data.data() + (static_cast<std::size_t>(v) * width + u) * 3; }
};

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  std::uint8_t at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

namespace io {

namespace detail {

struct NetpbmHeader {
  char kind = 0;  // '5' or '6'
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

inline NetpbmHeader parse_netpbm_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorKind::UnsupportedFormat, "not a netpbm file");
  NetpbmHeader h;
  h.kind = static_cast<char>(bytes[1]);
  if (h.kind != '5' && h.kind != '6') throw Error(ErrorKind::UnsupportedFormat, "only binary P5/P6 are supported");
  std::size_t pos = 2;
  auto read_int = [&]() -> int {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw Error(ErrorKind::CorruptHeader, "expected an integer");
    long long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000) throw Error(ErrorKind::CorruptHeader, "header value too large");
      ++pos;
    }
    return static_cast<int>(value);
  };
  h.width = read_int();
  h.height = read_int();
  h.maxval = read_int();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorKind::CorruptHeader, "missing separator after maxval");
  ++pos;
  if (h.width <= 0 || h.height <= 0) throw Error(ErrorKind::CorruptHeader, "dimensions must be positive");
  if (h.maxval <= 0) throw Error(ErrorKind::CorruptHeader, "maxval must be positive");
  if (h.maxval > 255) throw Error(ErrorKind::UnsupportedFormat, "only 8-bit (maxval <= 255) images are supported");
  h.data_offset = pos;
  const std::size_t channels = h.kind == '6' ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(h.width) * h.height * channels;
  if (bytes.size() - pos < need) throw Error(ErrorKind::CorruptHeader, "pixel data is truncated");
  return h;
}

}  // namespace detail

/// Loads P6 as-is or P5 replicated into three channels.
inline RgbImage load_image(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  const auto h = detail::parse_netpbm_header(bytes);
  RgbImage img(h.width, h.height);
  const std::uint8_t* src = bytes.data() + h.data_offset;
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  if (h.kind == '6') {
    std::copy(src, src + n * 3, img.data.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = src[i];
  }
  return img;
}

inline GrayImage load_pgm(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  const auto h = detail::parse_netpbm_header(bytes);
  if (h.kind != '5') throw Error(ErrorKind::UnsupportedFormat, path + " is not a P5 grayscale image");
  GrayImage img(h.width, h.height);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
            bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + img.data.size()), img.data.begin());
  return img;
}

inline std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

inline void save_ppm(const std::string& path, const RgbImage& img) { write_file_bytes(path, encode_ppm(img)); }
inline void save_pgm(const std::string& path, const GrayImage& img) { write_file_bytes(path, encode_pgm(img)); }

}  // namespace io
}  // namespace radar_forge
