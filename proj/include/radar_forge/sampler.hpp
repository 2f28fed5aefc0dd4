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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/rng.hpp"

namespace radar_forge {

/// p(u, v) = cell(u, v) / sum of cells. Works on 8-bit images, exported
/// grids, or raw full-precision values alike.
template <typename T>
ProbabilityGrid grid_from_grayscale(int width, int height, std::span<const T> cells) {
  std::vector<double> w(cells.begin(), cells.end());
  return ProbabilityGrid::from_weights(width, height, std::move(w));
}

inline ProbabilityGrid grid_from_grayscale(const GrayscaleExport& img) {
  return grid_from_grayscale<std::uint32_t>(img.width, img.height, img.values);
}

/// Two-step inverse-transform sampler: a column u from the column marginal,
/// then a row v from p(v | u). Column CDFs are built on first use.
class InverseCdfSampler {
 public:
  explicit InverseCdfSampler(const ProbabilityGrid& grid)
      : grid_(grid), column_cdf_(static_cast<std::size_t>(grid.width())), row_cdfs_(grid.width()) {
    double acc = 0.0;
    for (int u = 0; u < grid.width(); ++u) {
      double col = 0.0;
      for (int v = 0; v < grid.height(); ++v) col += grid.at(u, v);
      acc += col;
      column_cdf_[u] = acc;
    }
    if (!(acc > 0.0)) throw Error(ErrorKind::InvalidGrid, "grid has no mass");
  }

  PixelCoord draw(SeededRng& rng, bool jitter) {
    const int u = pick(column_cdf_, rng.uniform());
    const auto& rows = row_cdf(u);
    const int v = pick(rows, rng.uniform());
    PixelCoord px{static_cast<double>(u), static_cast<double>(v)};
    if (jitter) {
      px.u += rng.uniform() - 0.5;
      px.v += rng.uniform() - 0.5;
    }
    return px;
  }

 private:
  // Smallest index whose CDF exceeds x * total; zero-mass cells are never
  // selected because they do not raise the CDF.
  static int pick(const std::vector<double>& cdf, double unit) {
    const double x = unit * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    if (it == cdf.end()) {
      // x rounded up onto the total; fall back to the last cell with mass.
      it = std::lower_bound(cdf.begin(), cdf.end(), cdf.back());
    }
    return static_cast<int>(it - cdf.begin());
  }

  const std::vector<double>& row_cdf(int u) {
    auto& cdf = row_cdfs_[u];
    if (cdf.empty()) {
      cdf.resize(static_cast<std::size_t>(grid_.height()));
      double acc = 0.0;
      for (int v = 0; v < grid_.height(); ++v) {
        acc += grid_.at(u, v);
        cdf[v] = acc;
      }
    }
    return cdf;
  }

  const ProbabilityGrid& grid_;
  std::vector<double> column_cdf_;
  std::vector<std::vector<double>> row_cdfs_;
};

/// Draws n pixel positions. Without jitter every sample sits on a pixel
/// centre; with jitter a uniform offset in [-0.5, 0.5)^2 spreads it over the
/// pixel footprint.
inline std::vector<PixelCoord> sample_signals(const ProbabilityGrid& grid, long long n, SeededRng& rng,
                                              bool jitter = false) {
  if (n < 0) throw Error(ErrorKind::OutOfRange, "sample count must be >= 0");
  std::vector<PixelCoord> out;
  if (n == 0) return out;
  InverseCdfSampler sampler(grid);
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) out.push_back(sampler.draw(rng, jitter));
  return out;
}

/// Maps a sigmoid-bounded count back to an integer: max(1, round(s * n_max)).
inline int denormalize_count(double sigmoid_out, int n_max) {
  if (!(sigmoid_out > 0.0 && sigmoid_out < 1.0)) throw Error(ErrorKind::OutOfRange, "sigmoid output must be in (0, 1)");
  if (n_max < 1) throw Error(ErrorKind::OutOfRange, "n_max must be >= 1");
  return std::max(1, static_cast<int>(std::lround(sigmoid_out * n_max)));
}

}  // namespace radar_forge
