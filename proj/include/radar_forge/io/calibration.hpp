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

#include <sstream>
#include <string>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/text.hpp"

namespace radar_forge {

/// Camera intrinsics plus the two extrinsics into the radar frame. The
/// radar-to-camera inverse is derived once at construction.
struct Calibration {
  CameraIntrinsics k;
  RigidTransform lidar_to_radar;
  RigidTransform camera_to_radar;
  RigidTransform radar_to_camera;

  Calibration(CameraIntrinsics intrinsics, RigidTransform lidar_to_radar_in, RigidTransform camera_to_radar_in)
      : k(intrinsics),
        lidar_to_radar(lidar_to_radar_in),
        camera_to_radar(camera_to_radar_in),
        radar_to_camera(camera_to_radar_in.inverse()) {}
};

namespace io {

inline constexpr double kCalibrationTolerance = 1e-6;

/// Text format, one entry per line (`#` starts a comment):
///   K:    9 numbers, row-major
///   T_LD: 16 numbers, lidar -> radar, row-major homogeneous
///   T_CD: 16 numbers, camera -> radar, row-major homogeneous
inline Calibration parse_calibration(std::string_view text, const std::string& origin = "<calibration>") {
  std::optional<Mat3> k;
  std::optional<Mat4> t_ld, t_cd;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    const auto where = origin + ":" + std::to_string(line_no);
    if (colon == std::string_view::npos) throw Error(ErrorKind::ParseError, where + ": expected `KEY: values`");
    const auto key = trim(line.substr(0, colon));
    std::vector<double> values;
    for (auto tok : tokens(line.substr(colon + 1))) {
      const auto v = parse_double(tok);
      if (!v) throw Error(ErrorKind::ParseError, where + ": bad number '" + std::string(tok) + "'");
      values.push_back(*v);
    }
    auto expect = [&](std::size_t n) {
      if (values.size() != n)
        throw Error(ErrorKind::ParseError, where + ": " + std::string(key) + " needs " + std::to_string(n) + " numbers");
    };
    if (key == "K") {
      expect(9);
      k = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(values.data());
    } else if (key == "T_LD" || key == "T_CD") {
      expect(16);
      Mat4 m = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(values.data());
      (key == "T_LD" ? t_ld : t_cd) = m;
    } else {
      throw Error(ErrorKind::ParseError, where + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!k) throw Error(ErrorKind::ParseError, origin + ": missing K");
  if (!t_ld) throw Error(ErrorKind::ParseError, origin + ": missing T_LD");
  if (!t_cd) throw Error(ErrorKind::ParseError, origin + ": missing T_CD");
  return Calibration(CameraIntrinsics::from_matrix(*k),
                     RigidTransform::from_matrix_orthonormalized(*t_ld, kCalibrationTolerance),
                     RigidTransform::from_matrix_orthonormalized(*t_cd, kCalibrationTolerance));
}

inline Calibration load_calibration(const std::string& path) { return parse_calibration(read_file_text(path), path); }

inline std::string format_calibration(const Calibration& c) {
  std::ostringstream os;
  auto emit = [&](const char* key, const auto& m) {
    os << key << ":";
    for (int r = 0; r < m.rows(); ++r)
      for (int col = 0; col < m.cols(); ++col) os << " " << format_double(m(r, col));
    os << "\n";
  };
  emit("K", c.k.matrix());
  emit("T_LD", c.lidar_to_radar.matrix());
  emit("T_CD", c.camera_to_radar.matrix());
  return os.str();
}

inline void save_calibration(const std::string& path, const Calibration& c) { write_file_text(path, format_calibration(c)); }

}  // namespace io
}  // namespace radar_forge
