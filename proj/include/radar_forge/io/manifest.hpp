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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/radar_types.hpp"

namespace radar_forge {

struct FrameDescriptor {
  std::string id;
  std::string image;
  std::string lidar;
  std::string calibration;
  Vec3 ego_velocity = Vec3::Zero();
  std::optional<std::string> radar;
  std::optional<std::string> object_velocities;
};

/// Parsed manifest. Paths are resolved against the manifest's directory.
struct DatasetDescriptor {
  std::string name;
  std::string base_dir;
  RadarSpec spec;
  std::optional<Covariance2> sigma;  // empty means estimate from data
  int sigma_neighbors = 8;
  std::optional<std::uint64_t> seed;
  std::vector<FrameDescriptor> frames;
};

namespace io {

/// Line-based manifest:
///
///   # comment
///   dataset = wall
///   delta1_deg = 1.5
///   delta2_deg = 1.5
///   max_range = 50
///   azimuth_fov_deg = -60, 60
///   elevation_fov_deg = -25, 25
///   n_max = 661
///   sigma = auto            # or "su, sv" (std devs, px) or "sxx, sxy, syy" (px^2)
///   sigma_neighbors = 8    # neighbourhood size for sigma = auto
///   seed = 7
///
///   [frame 000000]
///   image = images/000000.ppm
///   lidar = lidar/000000.bin
///   calibration = calib/000000.txt
///   ego_velocity = 10, 0, 0
///   radar = radar/000000.csv              # optional ground truth
///   object_velocities = objvel/000000.csv # optional
inline DatasetDescriptor parse_manifest(std::string_view text, const std::string& base_dir,
                                        const std::string& origin = "<manifest>") {
  DatasetDescriptor d;
  d.base_dir = base_dir;
  std::set<std::string> seen_ids;
  std::set<std::string> seen_keys;
  FrameDescriptor* current = nullptr;
  std::set<std::string> frame_keys;
  int current_line = 0;

  auto where = [&](int line) { return origin + ":" + std::to_string(line); };
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    return path.is_absolute() ? path.string() : (std::filesystem::path(base_dir) / path).lexically_normal().string();
  };
  auto numbers = [&](std::string_view value, std::size_t count_min, std::size_t count_max, int line) {
    std::vector<double> out;
    for (auto tok : tokens(value)) {
      const auto v = parse_double(tok);
      if (!v) throw Error(ErrorKind::ParseError, where(line) + ": bad number '" + std::string(tok) + "'");
      out.push_back(*v);
    }
    if (out.size() < count_min || out.size() > count_max)
      throw Error(ErrorKind::ParseError, where(line) + ": wrong number of values");
    return out;
  };
  auto finish_frame = [&]() {
    if (!current) return;
    for (const char* key : {"image", "lidar", "calibration", "ego_velocity"})
      if (!frame_keys.count(key))
        throw Error(ErrorKind::ParseError,
                    where(current_line) + ": frame '" + current->id + "' is missing required key '" + key + "'");
  };

  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ParseError, where(line_no) + ": unterminated section header");
      const auto inner = trim(line.substr(1, line.size() - 2));
      const auto parts = tokens(inner);
      if (parts.size() != 2 || parts[0] != "frame")
        throw Error(ErrorKind::ParseError, where(line_no) + ": expected [frame <id>]");
      finish_frame();
      const std::string id(parts[1]);
      if (!seen_ids.insert(id).second) throw Error(ErrorKind::ParseError, where(line_no) + ": duplicate frame id '" + id + "'");
      d.frames.push_back(FrameDescriptor{});
      current = &d.frames.back();
      current->id = id;
      frame_keys.clear();
      current_line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ParseError, where(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) throw Error(ErrorKind::ParseError, where(line_no) + ": empty value for '" + key + "'");

    if (current) {
      if (!frame_keys.insert(key).second) throw Error(ErrorKind::ParseError, where(line_no) + ": duplicate key '" + key + "'");
      if (key == "image") current->image = resolve(value);
      else if (key == "lidar") current->lidar = resolve(value);
      else if (key == "calibration") current->calibration = resolve(value);
      else if (key == "radar") current->radar = resolve(value);
      else if (key == "object_velocities") current->object_velocities = resolve(value);
      else if (key == "ego_velocity") {
        const auto v = numbers(value, 3, 3, line_no);
        current->ego_velocity = Vec3(v[0], v[1], v[2]);
      } else {
        throw Error(ErrorKind::ParseError, where(line_no) + ": unknown frame key '" + key + "'");
      }
      continue;
    }

    if (!seen_keys.insert(key).second) throw Error(ErrorKind::ParseError, where(line_no) + ": duplicate key '" + key + "'");
    if (key == "dataset") d.name = std::string(value);
    else if (key == "delta1_deg") d.spec.delta1 = deg_to_rad(numbers(value, 1, 1, line_no)[0]);
    else if (key == "delta2_deg") d.spec.delta2 = deg_to_rad(numbers(value, 1, 1, line_no)[0]);
    else if (key == "max_range") d.spec.max_range = numbers(value, 1, 1, line_no)[0];
    else if (key == "azimuth_fov_deg") {
      const auto v = numbers(value, 2, 2, line_no);
      d.spec.azimuth_min = deg_to_rad(v[0]);
      d.spec.azimuth_max = deg_to_rad(v[1]);
    } else if (key == "elevation_fov_deg") {
      const auto v = numbers(value, 2, 2, line_no);
      d.spec.elevation_min = deg_to_rad(v[0]);
      d.spec.elevation_max = deg_to_rad(v[1]);
    } else if (key == "n_max") {
      const auto v = parse_int(value);
      if (!v || *v < 1) throw Error(ErrorKind::ParseError, where(line_no) + ": n_max must be a positive integer");
      d.spec.n_max = static_cast<int>(*v);
    } else if (key == "sigma") {
      if (value == "auto") {
        d.sigma.reset();
      } else {
        const auto v = numbers(value, 2, 3, line_no);
        try {
          if (v.size() == 2) {
            d.sigma = Covariance2::from_stddev(v[0], v[1]);
          } else {
            Eigen::Matrix2d m;
            m << v[0], v[1], v[1], v[2];
            d.sigma = Covariance2(m);
          }
        } catch (const Error& e) {
          throw Error(ErrorKind::ParseError, where(line_no) + ": invalid sigma (" + e.what() + ")");
        }
      }
    } else if (key == "sigma_neighbors") {
      const auto v = parse_int(value);
      if (!v || *v < 1 || *v > 1000)
        throw Error(ErrorKind::ParseError, where(line_no) + ": sigma_neighbors must be an integer in [1, 1000]");
      d.sigma_neighbors = static_cast<int>(*v);
    } else if (key == "seed") {
      const auto v = parse_int(value);
      if (!v || *v < 0) throw Error(ErrorKind::ParseError, where(line_no) + ": seed must be a non-negative integer");
      d.seed = static_cast<std::uint64_t>(*v);
    } else {
      throw Error(ErrorKind::ParseError, where(line_no) + ": unknown key '" + key + "'");
    }
  }
  finish_frame();
  try {
    d.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, origin + ": " + e.what());
  }
  return d;
}

inline DatasetDescriptor load_manifest(const std::string& path) {
  const auto base = std::filesystem::path(path).parent_path().string();
  return parse_manifest(read_file_text(path), base.empty() ? "." : base, path);
}

/// Degrees rounded to 1e-9 so that radian round trips print cleanly.
inline std::string format_degrees(double rad) { return format_double(std::round(rad_to_deg(rad) * 1e9) / 1e9); }

/// Paths are written relative to `base_dir` when they live beneath it.
inline std::string format_manifest(const DatasetDescriptor& d) {
  std::ostringstream os;
  auto rel = [&](const std::string& p) {
    const auto r = std::filesystem::path(p).lexically_relative(d.base_dir);
    return (r.empty() || r.string().starts_with("..")) ? p : r.string();
  };
  if (!d.name.empty()) os << "dataset = " << d.name << "\n";
  os << "delta1_deg = " << format_degrees(d.spec.delta1) << "\n";
  os << "delta2_deg = " << format_degrees(d.spec.delta2) << "\n";
  os << "max_range = " << format_double(d.spec.max_range) << "\n";
  os << "azimuth_fov_deg = " << format_degrees(d.spec.azimuth_min) << ", "
     << format_degrees(d.spec.azimuth_max) << "\n";
  os << "elevation_fov_deg = " << format_degrees(d.spec.elevation_min) << ", "
     << format_degrees(d.spec.elevation_max) << "\n";
  os << "n_max = " << d.spec.n_max << "\n";
  if (d.sigma) {
    const auto& m = d.sigma->matrix();
    os << "sigma = " << format_double(m(0, 0)) << ", " << format_double(m(0, 1)) << ", " << format_double(m(1, 1)) << "\n";
  } else {
    os << "sigma = auto\n";
  }
  os << "sigma_neighbors = " << d.sigma_neighbors << "\n";
  if (d.seed) os << "seed = " << *d.seed << "\n";
  for (const auto& f : d.frames) {
    os << "\n[frame " << f.id << "]\n";
    os << "image = " << rel(f.image) << "\n";
    os << "lidar = " << rel(f.lidar) << "\n";
    os << "calibration = " << rel(f.calibration) << "\n";
    os << "ego_velocity = " << format_double(f.ego_velocity.x()) << ", " << format_double(f.ego_velocity.y()) << ", "
       << format_double(f.ego_velocity.z()) << "\n";
    if (f.radar) os << "radar = " << rel(*f.radar) << "\n";
    if (f.object_velocities) os << "object_velocities = " << rel(*f.object_velocities) << "\n";
  }
  return os.str();
}

}  // namespace io
}  // namespace radar_forge
