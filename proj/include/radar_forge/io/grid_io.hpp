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

#include <string>

#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/binary.hpp"

namespace radar_forge::io {

/// Full-precision grid: "RFGD", u32 width, u32 height, u32 reserved (0),
/// then width*height little-endian float64 values, row-major.
inline std::vector<std::uint8_t> encode_grid(const ProbabilityGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + grid.size() * 8);
  put_bytes(out, "RFGD");
  put_u32(out, static_cast<std::uint32_t>(grid.width()));
  put_u32(out, static_cast<std::uint32_t>(grid.height()));
  put_u32(out, 0);
  for (double p : grid.mass()) put_f64(out, p);
  return out;
}

inline std::vector<double> decode_grid_raw(std::span<const std::uint8_t> bytes, int& width, int& height) {
  ByteReader r(bytes);
  if (r.bytes(4) != "RFGD") throw Error(ErrorKind::CorruptHeader, "bad grid magic");
  width = static_cast<int>(r.u32());
  height = static_cast<int>(r.u32());
  (void)r.u32();
  if (width <= 0 || height <= 0) throw Error(ErrorKind::CorruptHeader, "grid dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (r.remaining() != n * 8) throw Error(ErrorKind::TruncatedFile, "grid payload size mismatch");
  std::vector<double> values(n);
  for (auto& v : values) v = r.f64();
  return values;
}

inline ProbabilityGrid decode_grid(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  auto values = decode_grid_raw(bytes, w, h);
  return ProbabilityGrid::adopt(w, h, std::move(values));
}

inline void save_grid(const std::string& path, const ProbabilityGrid& grid) { write_file_bytes(path, encode_grid(grid)); }
inline ProbabilityGrid load_grid(const std::string& path) { return decode_grid(read_file_bytes(path)); }

}  // namespace radar_forge::io
