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

// Helpers and independent reference implementations shared by the tests.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <map>
#include <unistd.h>

#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/rng.hpp"

namespace rf_test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("radar_forge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Plain double loop over every cell and every component, no windowing.
inline std::vector<double> brute_force_mixture(const std::vector<radar_forge::PixelCoord>& pts, const Eigen::Matrix2d& cov,
                                               int w, int h) {
  const Eigen::Matrix2d inv = cov.inverse();
  std::vector<double> cells(static_cast<std::size_t>(w) * h, 0.0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (const auto& p : pts) {
        const Eigen::Vector2d d(u - p.u, v - p.v);
        acc += std::exp(-0.5 * d.dot(inv * d));
      }
      cells[static_cast<std::size_t>(v) * w + u] = acc;
    }
  double total = 0.0;
  for (double c : cells) total += c;
  for (double& c : cells) c /= total;
  return cells;
}

/// Per-point range-image reference: each point's gray level is computed on
/// its own, collected per cell, and the cell value is the half-up rounded
/// mean of those integers.
inline std::vector<std::uint8_t> range_image_oracle(const std::vector<Eigen::Vector3d>& local, const Eigen::Vector3d& p,
                                                    double r_l, int w, int h) {
  std::map<int, std::vector<int>> cells;
  for (const auto& l : local) {
    int u = static_cast<int>(std::floor(0.5 * (1.0 - (l.y() - p.y()) / r_l) * w));
    int v = static_cast<int>(std::floor((1.0 - (l.z() - p.z() + r_l) / (2.0 * r_l)) * h));
    u = u < 0 ? 0 : (u >= w ? w - 1 : u);
    v = v < 0 ? 0 : (v >= h ? h - 1 : v);
    const double t = (l - p).norm() / (2.0 * r_l) * 255.0;
    int g = l.norm() >= p.norm() ? 127 + static_cast<int>(std::ceil(t)) : 127 - static_cast<int>(std::floor(t));
    g = g < 0 ? 0 : (g > 255 ? 255 : g);
    cells[v * w + u].push_back(g);
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
  for (const auto& [idx, vals] : cells) {
    long sum = 0;
    for (int g : vals) sum += g;
    const long n = static_cast<long>(vals.size());
    // half-up: the mean's fractional part is k/n exactly
    long q = sum / n;
    if (2 * (sum - q * n) >= n) ++q;
    out[static_cast<std::size_t>(idx)] = static_cast<std::uint8_t>(q);
  }
  return out;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace rf_test
