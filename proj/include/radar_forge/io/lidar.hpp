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
#include <vector>

#include "radar_forge/geometry.hpp"
#include "radar_forge/io/binary.hpp"

namespace radar_forge::io {

inline constexpr std::size_t kLidarRecordBytes = 16;

/// KITTI-style cloud: little-endian float32 records (x, y, z, intensity).
/// Intensity is discarded.
inline std::vector<CartesianPoint3> decode_lidar_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kLidarRecordBytes != 0)
    throw Error(ErrorKind::TruncatedFile,
                "lidar file size " + std::to_string(bytes.size()) + " is not a multiple of 16 bytes");
  std::vector<CartesianPoint3> cloud;
  cloud.reserve(bytes.size() / kLidarRecordBytes);
  ByteReader reader(bytes);
  while (!reader.at_end()) {
    const double x = reader.f32();
    const double y = reader.f32();
    const double z = reader.f32();
    (void)reader.f32();
    cloud.emplace_back(x, y, z);
  }
  return cloud;
}

inline std::vector<CartesianPoint3> load_lidar_bin(const std::string& path) {
  return decode_lidar_bin(read_file_bytes(path));
}

inline std::vector<std::uint8_t> encode_lidar_bin(std::span<const CartesianPoint3> cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(cloud.size() * kLidarRecordBytes);
  for (const auto& p : cloud) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.x())));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.y())));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.z())));
    put_u32(out, std::bit_cast<std::uint32_t>(0.0f));
  }
  return out;
}

inline void save_lidar_bin(const std::string& path, std::span<const CartesianPoint3> cloud) {
  write_file_bytes(path, encode_lidar_bin(cloud));
}

}  // namespace radar_forge::io
