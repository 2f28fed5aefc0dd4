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
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/radar_types.hpp"

namespace radar_forge {

/// Probability mass over image pixels, row-major (index = v * width + u).
/// Instances are always normalized: the only way in is `from_weights`.
class ProbabilityGrid {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Normalizes nonnegative weights into a grid. Any positive rescaling of
  /// the weights yields the same grid.
  static ProbabilityGrid from_weights(int width, int height, std::vector<double> weights) {
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidGrid, "grid dimensions must be positive");
    if (weights.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error(ErrorKind::DimensionMismatch, "weight count does not match grid size");
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) throw Error(ErrorKind::InvalidGrid, "weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::AllZeroGrid, "grid has no positive mass");
    for (double& w : weights) w /= total;
    return ProbabilityGrid(width, height, std::move(weights));
  }

  /// Adopts values that already sum to one (within kSumTolerance) without
  /// rescaling, so stored grids reload bit-identically. Otherwise behaves
  /// like from_weights.
  static ProbabilityGrid adopt(int width, int height, std::vector<double> values) {
    double total = 0.0;
    bool valid = values.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    for (double w : values) {
      if (!std::isfinite(w) || w < 0.0) valid = false;
      total += w;
    }
    if (valid && width > 0 && height > 0 && std::abs(total - 1.0) <= kSumTolerance)
      return ProbabilityGrid(width, height, std::move(values));
    return from_weights(width, height, std::move(values));
  }

  static ProbabilityGrid uniform(int width, int height) {
    return from_weights(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 1.0));
  }

  static ProbabilityGrid delta(int width, int height, int u, int v) {
    std::vector<double> w(static_cast<std::size_t>(width) * height, 0.0);
    if (u < 0 || u >= width || v < 0 || v >= height) throw Error(ErrorKind::OutOfRange, "delta cell outside grid");
    w[static_cast<std::size_t>(v) * width + u] = 1.0;
    return from_weights(width, height, std::move(w));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return mass_.size(); }
  double at(int u, int v) const { return mass_[static_cast<std::size_t>(v) * width_ + u]; }
  std::span<const double> mass() const { return mass_; }

  double max_mass() const { return *std::max_element(mass_.begin(), mass_.end()); }

  /// (u, v) of the heaviest cell; ties resolve to the first in row-major order.
  std::pair<int, int> argmax() const {
    const auto it = std::max_element(mass_.begin(), mass_.end());
    const auto idx = static_cast<int>(it - mass_.begin());
    return {idx % width_, idx / width_};
  }

 private:
  ProbabilityGrid(int width, int height, std::vector<double> mass)
      : width_(width), height_(height), mass_(std::move(mass)) {}

  int width_;
  int height_;
  std::vector<double> mass_;
};

/// Symmetric positive-definite 2x2 covariance in pixels^2.
class Covariance2 {
 public:
  explicit Covariance2(const Eigen::Matrix2d& m) : m_(m) {
    if (!m.allFinite()) throw Error(ErrorKind::InvalidGrid, "covariance must be finite");
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12) throw Error(ErrorKind::InvalidGrid, "covariance must be symmetric");
    const double det = m.determinant();
    if (!(m(0, 0) > 0.0) || !(det > 0.0)) throw Error(ErrorKind::InvalidGrid, "covariance must be positive definite");
    inverse_ = m.inverse();
  }

  static Covariance2 diagonal(double var_u, double var_v) {
    Eigen::Matrix2d m;
    m << var_u, 0.0, 0.0, var_v;
    return Covariance2(m);
  }

  static Covariance2 from_stddev(double sigma_u, double sigma_v) { return diagonal(sigma_u * sigma_u, sigma_v * sigma_v); }

  const Eigen::Matrix2d& matrix() const { return m_; }
  const Eigen::Matrix2d& inverse() const { return inverse_; }

 private:
  Eigen::Matrix2d m_;
  Eigen::Matrix2d inverse_;
};

struct ProjectedDatagram {
  std::vector<PixelCoord> pixels;
  std::vector<std::size_t> source_index;  // signal index for each pixel
  std::size_t dropped_behind_camera = 0;
  std::size_t dropped_outside_image = 0;

  std::size_t dropped() const { return dropped_behind_camera + dropped_outside_image; }
};

/// Projects every signal into a width x height image; signals behind the
/// camera or outside the raster are dropped and counted.
inline ProjectedDatagram project_datagram(const RadarDatagram& datagram, const CameraIntrinsics& k,
                                          const RigidTransform& cam_from_radar, int width, int height) {
  ProjectedDatagram out;
  for (std::size_t i = 0; i < datagram.signals.size(); ++i) {
    const auto px = try_project_to_image(k, cam_from_radar, datagram.signals[i].cartesian());
    if (!px) {
      ++out.dropped_behind_camera;
    } else if (!in_image(*px, width, height)) {
      ++out.dropped_outside_image;
    } else {
      out.pixels.push_back(*px);
      out.source_index.push_back(i);
    }
  }
  return out;
}

inline constexpr double kCovarianceFloor = 0.25;

/// Pooled within-group covariance: each group is centred on its own mean,
/// outer products are accumulated and divided by (N - #groups). The result
/// is symmetrized and its eigenvalues floored at kCovarianceFloor.
inline Covariance2 estimate_sigma(const std::vector<std::vector<PixelCoord>>& groups) {
  std::size_t total = 0;
  std::size_t nonempty = 0;
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& group : groups) {
    if (group.empty()) continue;
    ++nonempty;
    total += group.size();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : group) mean += Eigen::Vector2d(p.u, p.v);
    mean /= static_cast<double>(group.size());
    for (const auto& p : group) {
      const Eigen::Vector2d d = Eigen::Vector2d(p.u, p.v) - mean;
      scatter += d * d.transpose();
    }
  }
  if (total < 2 || total <= nonempty)
    throw Error(ErrorKind::InsufficientData, "need at least one group with two or more points");
  Eigen::Matrix2d cov = scatter / static_cast<double>(total - nonempty);
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(kCovarianceFloor);
  Eigen::Matrix2d floored = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  floored(0, 1) = floored(1, 0) = 0.5 * (floored(0, 1) + floored(1, 0));
  return Covariance2(floored);
}

/// One group per point: the point and its k nearest neighbours (ties
/// broken by index). Stand-in for per-object annotation groups; the spread
/// of a group tracks the local signal density.
inline std::vector<std::vector<PixelCoord>> neighborhood_groups(const std::vector<PixelCoord>& points, int k) {
  if (k < 1) throw Error(ErrorKind::OutOfRange, "neighbourhood size must be >= 1");
  const std::size_t n = points.size();
  const std::size_t take = std::min(n, static_cast<std::size_t>(k) + 1);
  std::vector<std::vector<PixelCoord>> groups;
  groups.reserve(n);
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double du = points[i].u - points[j].u;
      const double dv = points[i].v - points[j].v;
      d[j] = {du * du + dv * dv, j};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
    std::vector<PixelCoord> g;
    g.reserve(take);
    for (std::size_t q = 0; q < take; ++q) g.push_back(points[d[q].second]);
    groups.push_back(std::move(g));
  }
  return groups;
}

/// exp(-q/2) is exactly zero in double precision beyond this Mahalanobis
/// distance squared, so cells outside it can be skipped without changing
/// any sum.
inline constexpr double kMahalanobisCutoff = 1500.0;

/// Gaussian mixture sampled at integer pixel centres and normalized to unit
/// mass. Per-component normalizing constants cancel and are omitted.
inline ProbabilityGrid rasterize_mixture(std::span<const PixelCoord> points, const Covariance2& sigma, int width,
                                         int height) {
  if (points.empty()) throw Error(ErrorKind::EmptyPointSet, "mixture needs at least one component");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidGrid, "grid dimensions must be positive");
  const Eigen::Matrix2d& inv = sigma.inverse();
  const double a = inv(0, 0), b = inv(0, 1), c = inv(1, 1);
  const double reach_u = std::sqrt(kMahalanobisCutoff * sigma.matrix()(0, 0));
  const double reach_v = std::sqrt(kMahalanobisCutoff * sigma.matrix()(1, 1));

  std::vector<double> w(static_cast<std::size_t>(width) * height, 0.0);
  for (const auto& p : points) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) throw Error(ErrorKind::NonFinite, "mixture centre is not finite");
    const int u0 = std::max(0, static_cast<int>(std::floor(std::max(p.u - reach_u, -1.0))));
    const int u1 = std::min(width - 1, static_cast<int>(std::ceil(std::min(p.u + reach_u, width + 1.0))));
    const int v0 = std::max(0, static_cast<int>(std::floor(std::max(p.v - reach_v, -1.0))));
    const int v1 = std::min(height - 1, static_cast<int>(std::ceil(std::min(p.v + reach_v, height + 1.0))));
    for (int v = v0; v <= v1; ++v) {
      const double dv = v - p.v;
      double* row = w.data() + static_cast<std::size_t>(v) * width;
      for (int u = u0; u <= u1; ++u) {
        const double du = u - p.u;
        row[u] += std::exp(-0.5 * (a * du * du + 2.0 * b * du * dv + c * dv * dv));
      }
    }
  }
  return ProbabilityGrid::from_weights(width, height, std::move(w));
}

inline constexpr double kKlFloor = 1e-12;

/// KL(p || q) after flooring both grids at kKlFloor and renormalizing.
inline double kl_divergence(const ProbabilityGrid& p_true, const ProbabilityGrid& q_pred) {
  if (p_true.width() != q_pred.width() || p_true.height() != q_pred.height())
    throw Error(ErrorKind::DimensionMismatch, "KL needs grids of equal size");
  const auto p = p_true.mass();
  const auto q = q_pred.mass();
  double zp = 0.0, zq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    zp += std::max(p[i], kKlFloor);
    zq += std::max(q[i], kKlFloor);
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::max(p[i], kKlFloor) / zp;
    const double qi = std::max(q[i], kKlFloor) / zq;
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

struct CountPair {
  double predicted;
  long long truth;
};

enum class CountLossForm {
  AsPrinted,  // (1/m) (sum_i (n_hat_i - n_i) / n_i)^2
  PerFrame,   // (1/m) sum_i ((n_hat_i - n_i) / n_i)^2
};

inline double count_loss(std::span<const CountPair> pairs, CountLossForm form = CountLossForm::AsPrinted) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyInput, "count loss needs at least one frame");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& [n_hat, n] : pairs) {
    if (n <= 0) throw Error(ErrorKind::NonPositiveCount, "true counts must be positive");
    const double rel = (n_hat - static_cast<double>(n)) / static_cast<double>(n);
    sum += rel;
    sum_sq += rel * rel;
  }
  const double m = static_cast<double>(pairs.size());
  return form == CountLossForm::AsPrinted ? (sum * sum) / m : sum_sq / m;
}

struct DisLossReport {
  double kl = 0.0;
  double count_loss = 0.0;
  double total = 0.0;
  double alpha = 1.0;
};

inline DisLossReport total_loss(double kl, double count, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::OutOfRange, "alpha must be >= 0");
  return {kl, count, kl + alpha * count, alpha};
}

enum class GrayscaleMode {
  MaxNorm,   // heaviest cell -> 255
  SumScale,  // value = round(p * (2^32 - 1)), 32-bit cells
};

/// Quantized grid. `scale` maps probability to stored value
/// (value ~= p * scale); `maxval` is the largest representable value.
struct GrayscaleExport {
  int width = 0;
  int height = 0;
  std::uint32_t maxval = 255;
  double scale = 0.0;
  std::vector<std::uint32_t> values;

  std::vector<std::uint8_t> as_bytes() const {
    if (maxval > 255) throw Error(ErrorKind::UnsupportedFormat, "export is not 8-bit");
    return {values.begin(), values.end()};
  }
};

inline GrayscaleExport export_grayscale(const ProbabilityGrid& grid, GrayscaleMode mode) {
  GrayscaleExport out;
  out.width = grid.width();
  out.height = grid.height();
  if (mode == GrayscaleMode::MaxNorm) {
    out.maxval = 255;
    out.scale = 255.0 / grid.max_mass();
  } else {
    out.maxval = std::numeric_limits<std::uint32_t>::max();
    out.scale = static_cast<double>(out.maxval);
  }
  out.values.reserve(grid.size());
  for (double p : grid.mass()) {
    const double q = std::min(std::round(p * out.scale), static_cast<double>(out.maxval));
    out.values.push_back(static_cast<std::uint32_t>(q));
  }
  return out;
}

}  // namespace radar_forge
