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
#include <span>
#include <utility>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/prediction.hpp"
#include "radar_forge/radar_types.hpp"
#include "radar_forge/rng.hpp"
#include "radar_forge/sampler.hpp"

namespace radar_forge {

struct Angles {
  double theta = 0.0;
  double phi = 0.0;
};

inline Angles pixel_to_angles(const PixelCoord& px, const CameraIntrinsics& k, const Mat3& radar_from_cam_rotation) {
  const auto s = cartesian_to_spherical(back_project_ray(k, radar_from_cam_rotation, px));
  return {s.theta, s.phi};
}

struct SphericalCloud {
  std::vector<SphericalPoint> points;
  std::size_t dropped_degenerate = 0;
};

inline constexpr double kDegenerateRange = 1e-9;

/// Lidar points moved into the radar frame and expressed as (r, theta, phi).
/// Points that land on the radar origin have no direction and are dropped.
inline SphericalCloud lidar_to_radar_spherical(std::span<const CartesianPoint3> cloud, const RigidTransform& lidar_to_radar) {
  SphericalCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud) {
    const Vec3 q = lidar_to_radar.apply(p);
    if (!(q.norm() >= kDegenerateRange)) {
      ++out.dropped_degenerate;
      continue;
    }
    out.points.push_back(cartesian_to_spherical(q));
  }
  return out;
}

/// Slack on the angular window so a difference that equals the threshold
/// after wrapping survives the rounding of the wrap itself.
inline constexpr double kAngleSlack = 1e-12;

inline bool within_window(const SphericalPoint& p, double theta, double phi, double delta1, double delta2) {
  return std::abs(wrap_angle(p.theta - theta)) <= delta1 + kAngleSlack && std::abs(p.phi - phi) <= delta2 + kAngleSlack;
}

/// Points whose wrapped azimuth difference is within delta1 and elevation
/// difference within delta2. Linear scan.
inline std::vector<SphericalPoint> neighbor_query(std::span<const SphericalPoint> cloud, double theta, double phi,
                                                  double delta1, double delta2) {
  std::vector<SphericalPoint> out;
  for (const auto& p : cloud)
    if (within_window(p, theta, phi, delta1, delta2)) out.push_back(p);
  return out;
}

inline std::vector<SphericalPoint> neighbor_query(std::span<const SphericalPoint> cloud, double theta, double phi,
                                                  const RadarSpec& spec) {
  return neighbor_query(cloud, theta, phi, spec.delta1, spec.delta2);
}

/// Bucket grid over (theta, phi) with cells of one resolution step, so a
/// query touches a constant number of buckets. Returns exactly what the
/// linear scan returns, in the same (input) order.
class AngularIndex {
 public:
  AngularIndex(std::vector<SphericalPoint> points, double cell_theta, double cell_phi)
      : points_(std::move(points)), cell_theta_(cell_theta), cell_phi_(cell_phi) {
    if (!(cell_theta > 0.0) || !(cell_phi > 0.0)) throw Error(ErrorKind::OutOfRange, "index cells must be positive");
    n_theta_ = std::max(1, static_cast<int>(std::ceil(2.0 * kPi / cell_theta_)));
    n_phi_ = std::max(1, static_cast<int>(std::ceil(kPi / cell_phi_)));
    buckets_.resize(static_cast<std::size_t>(n_theta_) * n_phi_);
    for (std::size_t i = 0; i < points_.size(); ++i)
      buckets_[bucket_of(theta_bin(points_[i].theta), phi_bin(points_[i].phi))].push_back(i);
    if (!points_.empty()) {
      auto [lo, hi] = std::minmax_element(points_.begin(), points_.end(),
                                          [](const auto& a, const auto& b) { return a.phi < b.phi; });
      phi_min_ = lo->phi;
      phi_max_ = hi->phi;
    }
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<SphericalPoint>& points() const { return points_; }

  /// Elevation span covered by the cloud; meaningless when empty.
  double phi_min() const { return phi_min_; }
  double phi_max() const { return phi_max_; }

  std::vector<SphericalPoint> query(double theta, double phi, double delta1, double delta2) const {
    std::vector<std::size_t> hits;
    const int reach_t = static_cast<int>(std::ceil(delta1 / cell_theta_)) + 1;
    const int reach_p = static_cast<int>(std::ceil(delta2 / cell_phi_)) + 1;
    const int pb = phi_bin(phi);
    const int tb = theta_bin(theta);
    const bool all_theta = 2 * reach_t + 1 >= n_theta_;
    for (int dp = -reach_p; dp <= reach_p; ++dp) {
      const int pj = pb + dp;
      if (pj < 0 || pj >= n_phi_) continue;
      const int t_lo = all_theta ? 0 : -reach_t;
      const int t_hi = all_theta ? n_theta_ - 1 : reach_t;
      for (int dt = t_lo; dt <= t_hi; ++dt) {
        const int ti = all_theta ? dt : ((tb + dt) % n_theta_ + n_theta_) % n_theta_;
        for (std::size_t idx : buckets_[bucket_of(ti, pj)]) {
          if (within_window(points_[idx], theta, phi, delta1, delta2)) hits.push_back(idx);
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<SphericalPoint> out;
    out.reserve(hits.size());
    for (std::size_t idx : hits) out.push_back(points_[idx]);
    return out;
  }

 private:
  int theta_bin(double theta) const {
    const int b = static_cast<int>(std::floor((wrap_angle(theta) + kPi) / cell_theta_));
    return std::clamp(b, 0, n_theta_ - 1);
  }
  int phi_bin(double phi) const {
    const int b = static_cast<int>(std::floor((phi + kPi / 2) / cell_phi_));
    return std::clamp(b, 0, n_phi_ - 1);
  }
  std::size_t bucket_of(int t, int p) const { return static_cast<std::size_t>(p) * n_theta_ + t; }

  std::vector<SphericalPoint> points_;
  double cell_theta_;
  double cell_phi_;
  int n_theta_ = 1;
  int n_phi_ = 1;
  double phi_min_ = 0.0;
  double phi_max_ = 0.0;
  std::vector<std::vector<std::size_t>> buckets_;
};

/// Mean range of the neighbourhood.
inline double estimate_range(std::span<const SphericalPoint> neighbors) {
  if (neighbors.empty()) throw Error(ErrorKind::EmptyNeighborhood, "no lidar points near the signal");
  double sum = 0.0;
  for (const auto& p : neighbors) sum += p.r;
  return sum / static_cast<double>(neighbors.size());
}

/// Radial component of the relative velocity (object minus radar) along the
/// pixel's viewing ray. Positive means the target recedes.
inline double doppler_velocity(const PixelCoord& px, const Vec3& v_object, const Vec3& v_radar, const CameraIntrinsics& k,
                               const Mat3& radar_from_cam_rotation) {
  const Vec3 d = back_project_ray(k, radar_from_cam_rotation, px);
  const double n = d.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::ZeroVector, "viewing ray has zero length");
  return (v_object - v_radar).dot(d) / n;
}

enum class DropCause { OutsideFov, NoLidarSupport, BeyondMaxRange };

constexpr std::string_view to_string(DropCause c) {
  switch (c) {
    case DropCause::OutsideFov: return "OutsideFov";
    case DropCause::NoLidarSupport: return "NoLidarSupport";
    case DropCause::BeyondMaxRange: return "BeyondMaxRange";
  }
  return "Unknown";
}

/// Per emitted signal: where it came from and the neighbourhood its range
/// was averaged over.
struct SignalTrace {
  PixelCoord pixel;
  std::size_t neighbor_count = 0;
  double neighbor_r_min = 0.0;
  double neighbor_r_max = 0.0;
  int widen_steps = 0;
  Vec3 object_velocity = Vec3::Zero();
};

struct SynthesisReport {
  long long requested = 0;
  long long emitted = 0;
  long long dropped_outside_fov = 0;
  long long dropped_no_lidar = 0;
  long long dropped_beyond_range = 0;
  long long widened = 0;
  std::size_t lidar_points = 0;
  std::size_t lidar_dropped_degenerate = 0;

  long long dropped() const { return dropped_outside_fov + dropped_no_lidar + dropped_beyond_range; }
};

struct SynthesisOptions {
  bool jitter = false;
  int max_widen_steps = 3;
};

struct SynthesisResult {
  RadarDatagram datagram;  // RSS left empty
  SynthesisReport report;
  std::vector<SignalTrace> traces;  // parallel to datagram.signals
};

/// Draws `prediction.count` pixels and turns each into (r, theta, phi, v).
/// Range falls back to doubling the angular window up to
/// `max_widen_steps` times before the signal is dropped.
inline SynthesisResult synthesize_frame(const FrameBundle& frame, const DistributionPrediction& prediction,
                                        const RadarSpec& spec, SeededRng& rng, const SynthesisOptions& options = {}) {
  spec.validate();
  if (prediction.grid.width() != frame.width() || prediction.grid.height() != frame.height())
    throw Error(ErrorKind::DimensionMismatch, frame.id + ": prediction grid does not match the image size");

  SynthesisResult result;
  result.datagram.frame_id = frame.id;
  auto& report = result.report;
  // a zero request is tolerated here and yields an empty datagram
  if (prediction.count == 0) return result;
  prediction.validate();
  report.requested = prediction.count;

  auto cloud = lidar_to_radar_spherical(frame.lidar, frame.calibration.lidar_to_radar);
  report.lidar_points = cloud.points.size();
  report.lidar_dropped_degenerate = cloud.dropped_degenerate;
  const AngularIndex index(std::move(cloud.points), spec.delta1, spec.delta2);

  const auto pixels = sample_signals(prediction.grid, prediction.count, rng, options.jitter);
  const auto& k = frame.calibration.k;
  const Mat3& rot = frame.calibration.camera_to_radar.rotation();

  for (const auto& px : pixels) {
    const auto [theta, phi] = pixel_to_angles(px, k, rot);
    const bool in_lidar_span = !index.empty() && phi >= index.phi_min() && phi <= index.phi_max();
    if (!spec.in_fov(theta, phi) || !in_lidar_span) {
      ++report.dropped_outside_fov;
      continue;
    }
    std::vector<SphericalPoint> neighbors;
    int steps = 0;
    for (; steps <= options.max_widen_steps; ++steps) {
      const double scale = std::ldexp(1.0, steps);
      neighbors = index.query(theta, phi, spec.delta1 * scale, spec.delta2 * scale);
      if (!neighbors.empty()) break;
    }
    if (neighbors.empty()) {
      ++report.dropped_no_lidar;
      continue;
    }
    const double r = estimate_range(neighbors);
    if (!(r > 0.0) || r > spec.max_range) {
      ++report.dropped_beyond_range;
      continue;
    }
    if (steps > 0) ++report.widened;
    const Vec3 v_obj = frame.object_velocities.lookup(px);
    const double v = doppler_velocity(px, v_obj, frame.ego_velocity, k, rot);

    SignalTrace trace;
    trace.pixel = px;
    trace.neighbor_count = neighbors.size();
    const auto [lo, hi] = std::minmax_element(neighbors.begin(), neighbors.end(),
                                              [](const auto& a, const auto& b) { return a.r < b.r; });
    trace.neighbor_r_min = lo->r;
    trace.neighbor_r_max = hi->r;
    trace.widen_steps = steps;
    trace.object_velocity = v_obj;

    result.datagram.signals.push_back(RadarSignal{r, theta, phi, v, std::nullopt});
    result.traces.push_back(trace);
  }
  report.emitted = static_cast<long long>(result.datagram.signals.size());
  return result;
}

/// ceil(p * n), guarded against representation error in p * n.
inline std::size_t noise_count(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::OutOfRange, "noise fraction must be in [0, 1]");
  return std::min(n, static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9)));
}

/// Replaces ceil(p * n) signals, chosen uniformly without replacement, by
/// points drawn uniformly over the radar's FoV x range volume that also
/// project into the image. Doppler assumes a static target. Returns the
/// replaced indices in ascending order.
inline std::vector<std::size_t> replace_with_noise(RadarDatagram& d, double p, const FrameBundle& frame,
                                                   const RadarSpec& spec, SeededRng& rng) {
  const std::size_t k = noise_count(p, d.size());
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
  std::vector<std::size_t> picked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(picked.begin(), picked.end());

  const double s0 = std::sin(spec.elevation_min), s1 = std::sin(spec.elevation_max);
  const auto& cal = frame.calibration;
  for (std::size_t i : picked) {
    bool placed = false;
    for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
      const double r = spec.max_range * std::cbrt(rng.uniform());
      const double theta = rng.uniform(spec.azimuth_min, spec.azimuth_max);
      const double phi = std::asin(rng.uniform(s0, s1));
      if (!(r > 0.0)) continue;
      const CartesianPoint3 pt = spherical_to_cartesian({r, theta, phi});
      const auto px = try_project_to_image(cal.k, cal.radar_to_camera, pt);
      if (!px || !in_image(*px, frame.width(), frame.height())) continue;
      d.signals[i] = RadarSignal{r, theta, phi, -frame.ego_velocity.dot(pt / r), std::nullopt};
      placed = true;
    }
    if (!placed) throw Error(ErrorKind::InsufficientData, frame.id + ": radar FoV does not overlap the image");
  }
  return picked;
}

}  // namespace radar_forge
