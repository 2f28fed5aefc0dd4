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

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/radar_types.hpp"

namespace radar_forge {

/// Synthesis drop counts for one frame, when a synthesis report is at hand.
struct DropCounts {
  long long outside_fov = 0;
  long long no_lidar = 0;
  long long beyond_range = 0;

  long long total() const { return outside_fov + no_lidar + beyond_range; }
};

struct EvalRow {
  std::string frame_id;
  std::size_t n_pred = 0;
  std::size_t n_true = 0;
  double kl = 0.0;
  double count_error = 0.0;  // |n_pred - n_true| / n_true
  double rss_nmse = std::numeric_limits<double>::quiet_NaN();  // NaN when RSS is missing on either side
  DropCounts drops;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  Covariance2 sigma = Covariance2::diagonal(1.0, 1.0);
  double mean_kl = 0.0;
  double mean_count_error = 0.0;
  double mean_rss_nmse = std::numeric_limits<double>::quiet_NaN();  // over rows that have one
  DropCounts total_drops;

  void aggregate() {
    mean_kl = mean_count_error = 0.0;
    total_drops = {};
    double rss_sum = 0.0;
    std::size_t rss_rows = 0;
    for (const auto& r : rows) {
      mean_kl += r.kl;
      mean_count_error += r.count_error;
      if (!std::isnan(r.rss_nmse)) {
        rss_sum += r.rss_nmse;
        ++rss_rows;
      }
      total_drops.outside_fov += r.drops.outside_fov;
      total_drops.no_lidar += r.drops.no_lidar;
      total_drops.beyond_range += r.drops.beyond_range;
    }
    if (!rows.empty()) {
      mean_kl /= static_cast<double>(rows.size());
      mean_count_error /= static_cast<double>(rows.size());
    }
    mean_rss_nmse = rss_rows ? rss_sum / static_cast<double>(rss_rows) : std::numeric_limits<double>::quiet_NaN();
  }
};

/// Rasterizes a datagram's in-image projections; an empty projection gives
/// the uniform grid.
inline ProbabilityGrid rasterize_datagram(const RadarDatagram& d, const FrameBundle& frame, const Covariance2& sigma) {
  const auto proj =
      project_datagram(d, frame.calibration.k, frame.calibration.radar_to_camera, frame.width(), frame.height());
  if (proj.pixels.empty()) return ProbabilityGrid::uniform(frame.width(), frame.height());
  return rasterize_mixture(proj.pixels, sigma, frame.width(), frame.height());
}

/// Mean over predicted signals of ((a - a_hat) / (a_max - a_min))^2, each
/// prediction paired with the nearest true signal in 3D. NaN when either
/// side lacks RSS.
inline double rss_nmse(const RadarDatagram& pred, const RadarDatagram& truth, double a_min, double a_max) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (pred.empty() || truth.empty() || !(a_max > a_min)) return nan;
  std::vector<CartesianPoint3> tp;
  tp.reserve(truth.size());
  for (const auto& s : truth.signals) {
    if (!s.rss) return nan;
    tp.push_back(s.cartesian());
  }
  double sum = 0.0;
  for (const auto& s : pred.signals) {
    if (!s.rss) return nan;
    const CartesianPoint3 p = s.cartesian();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < tp.size(); ++j) {
      const double d = (tp[j] - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    const double e = (*truth.signals[best].rss - *s.rss) / (a_max - a_min);
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

/// RSS span over all ground-truth signals that carry one.
inline std::optional<std::pair<double, double>> rss_span(std::span<const FrameBundle> frames) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& f : frames) {
    if (!f.ground_truth) continue;
    for (const auto& s : f.ground_truth->signals)
      if (s.rss) {
        lo = std::min(lo, *s.rss);
        hi = std::max(hi, *s.rss);
      }
  }
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

inline EvalRow evaluate_frame(const RadarDatagram& pred, const FrameBundle& frame, const Covariance2& sigma,
                              std::optional<std::pair<double, double>> span) {
  if (!frame.ground_truth || frame.ground_truth->empty())
    throw Error(ErrorKind::NoGroundTruth, frame.id + ": frame has no ground-truth signals");
  const RadarDatagram& truth = *frame.ground_truth;
  EvalRow row;
  row.frame_id = frame.id;
  row.n_pred = pred.size();
  row.n_true = truth.size();
  row.kl = kl_divergence(rasterize_datagram(truth, frame, sigma), rasterize_datagram(pred, frame, sigma));
  row.count_error = std::abs(static_cast<double>(row.n_pred) - static_cast<double>(row.n_true)) /
                    static_cast<double>(row.n_true);
  if (span) row.rss_nmse = rss_nmse(pred, truth, span->first, span->second);
  return row;
}

namespace io {

inline std::string format_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

inline std::string format_eval_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "frame_id,n_pred,n_true,kl,count_error,rss_nmse,dropped_outside_fov,dropped_no_lidar,dropped_beyond_range\n";
  for (const auto& row : r.rows)
    out << row.frame_id << ',' << row.n_pred << ',' << row.n_true << ',' << format_double(row.kl) << ','
        << format_double(row.count_error) << ',' << format_number(row.rss_nmse) << ',' << row.drops.outside_fov << ','
        << row.drops.no_lidar << ',' << row.drops.beyond_range << '\n';
  out << "mean,,," << format_double(r.mean_kl) << ',' << format_double(r.mean_count_error) << ','
      << format_number(r.mean_rss_nmse) << ',' << r.total_drops.outside_fov << ',' << r.total_drops.no_lidar << ','
      << r.total_drops.beyond_range << '\n';
  return out.str();
}

inline std::string format_eval_summary(const EvalReport& r) {
  std::ostringstream out;
  out << "frames evaluated: " << r.rows.size() << '\n';
  out << "mean KL:          " << format_double(r.mean_kl) << '\n';
  out << "mean count error: " << format_double(r.mean_count_error) << '\n';
  out << "mean RSS nmse:    " << (std::isnan(r.mean_rss_nmse) ? std::string("n/a") : format_double(r.mean_rss_nmse))
      << '\n';
  out << "drops:            outside_fov=" << r.total_drops.outside_fov << " no_lidar=" << r.total_drops.no_lidar
      << " beyond_range=" << r.total_drops.beyond_range << '\n';
  return out.str();
}

}  // namespace io
}  // namespace radar_forge
