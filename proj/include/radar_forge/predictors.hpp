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
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/io/image.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/prediction.hpp"
#include "radar_forge/radar_types.hpp"
#include "radar_forge/sampler.hpp"

namespace radar_forge {

/// Ground-truth signals projected onto the frame's image raster.
inline ProjectedDatagram project_ground_truth(const FrameBundle& frame) {
  if (!frame.ground_truth || frame.ground_truth->empty())
    throw Error(ErrorKind::NoGroundTruth, frame.id + ": frame has no ground-truth signals");
  return project_datagram(*frame.ground_truth, frame.calibration.k, frame.calibration.radar_to_camera, frame.width(),
                          frame.height());
}

/// Covariance pooled over all frames, with per-frame neighbourhood groups
/// standing in for object groups.
inline Covariance2 estimate_dataset_sigma(std::span<const FrameBundle> frames, int neighbors = 8) {
  std::vector<std::vector<PixelCoord>> groups;
  for (const auto& f : frames) {
    if (!f.ground_truth || f.ground_truth->empty()) continue;
    const auto proj = project_ground_truth(f);
    for (auto& g : neighborhood_groups(proj.pixels, neighbors)) groups.push_back(std::move(g));
  }
  return estimate_sigma(groups);
}

/// Replays the ground truth: the mixture over projected real signals and
/// their count.
inline DistributionPrediction oracle_predict(const FrameBundle& frame, const Covariance2& sigma) {
  const auto proj = project_ground_truth(frame);
  if (proj.pixels.empty())
    throw Error(ErrorKind::NoGroundTruth, frame.id + ": no ground-truth signal projects into the image");
  DistributionPrediction p{rasterize_mixture(proj.pixels, sigma, frame.width(), frame.height()),
                           static_cast<long long>(proj.pixels.size()), PredictionSource::Oracle};
  p.validate();
  return p;
}

/// Count model n = a * |v_ego| + b plus a mixture covariance.
struct HeuristicModel {
  double a = 0.0;
  double b = 1.0;
  Covariance2 sigma = Covariance2::diagonal(4.0, 4.0);
  double max_range = 50.0;

  long long count_for(double speed) const { return std::max<long long>(1, std::llround(a * speed + b)); }
};

/// Ordinary least squares of (speed, count) pairs. A zero-variance speed
/// column gives a = 0, b = mean count.
inline std::pair<double, double> fit_count_line(std::span<const double> speed, std::span<const double> count) {
  if (speed.size() != count.size()) throw Error(ErrorKind::LengthMismatch, "speed/count length mismatch");
  if (speed.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two frames");
  const double n = static_cast<double>(speed.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < speed.size(); ++i) {
    sx += speed[i];
    sy += count[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < speed.size(); ++i) {
    sxx += (speed[i] - mx) * (speed[i] - mx);
    sxy += (speed[i] - mx) * (count[i] - my);
  }
  if (sxx <= 1e-12 * std::max(1.0, mx * mx)) return {0.0, my};
  const double a = sxy / sxx;
  return {a, my - a * mx};
}

inline HeuristicModel fit_heuristic(std::span<const FrameBundle> frames, const RadarSpec& spec, int neighbors = 8,
                                    const std::optional<Covariance2>& sigma = std::nullopt) {
  std::vector<double> speed, count;
  for (const auto& f : frames) {
    if (!f.ground_truth) continue;
    speed.push_back(f.ego_velocity.norm());
    count.push_back(static_cast<double>(f.ground_truth->size()));
  }
  if (speed.size() < 2) throw Error(ErrorKind::InsufficientData, "heuristic fit needs two frames with ground truth");
  HeuristicModel m;
  std::tie(m.a, m.b) = fit_count_line(speed, count);
  m.sigma = sigma ? *sigma : estimate_dataset_sigma(frames, neighbors);
  m.max_range = spec.max_range;
  return m;
}

inline constexpr std::size_t kHeuristicMaxComponents = 4096;

/// Uniform mixture over the lidar points that land in the image, in front of
/// the radar and within its range. Large clouds are stride-subsampled.
inline DistributionPrediction heuristic_predict(const FrameBundle& frame, const HeuristicModel& model) {
  const auto& cal = frame.calibration;
  std::vector<PixelCoord> pixels;
  for (const auto& p : frame.lidar) {
    const CartesianPoint3 pd = cal.lidar_to_radar.apply(p);
    if (pd.norm() > model.max_range) continue;
    const auto px = try_project_to_image(cal.k, cal.radar_to_camera, pd);
    if (px && in_image(*px, frame.width(), frame.height())) pixels.push_back(*px);
  }
  if (pixels.empty()) throw Error(ErrorKind::EmptyLidar, frame.id + ": no lidar point projects into the image");
  if (pixels.size() > kHeuristicMaxComponents) {
    const std::size_t stride = (pixels.size() + kHeuristicMaxComponents - 1) / kHeuristicMaxComponents;
    std::vector<PixelCoord> kept;
    for (std::size_t i = 0; i < pixels.size(); i += stride) kept.push_back(pixels[i]);
    pixels = std::move(kept);
  }
  DistributionPrediction p{rasterize_mixture(pixels, model.sigma, frame.width(), frame.height()),
                           model.count_for(frame.ego_velocity.norm()), PredictionSource::Heuristic};
  p.validate();
  return p;
}

/// Positive integer count, surrounding whitespace allowed.
inline long long parse_count(std::string_view text, const std::string& origin) {
  const auto t = io::trim(text);
  const auto n = io::parse_int(t);
  if (!n) throw Error(ErrorKind::ParseError, origin + ": expected an integer count, got '" + std::string(t) + "'");
  if (*n < 1) throw Error(ErrorKind::ParseError, origin + ": count must be >= 1");
  return *n;
}

/// Grid from a grayscale PGM of any scaling plus an ASCII count file.
inline DistributionPrediction load_external(const std::string& grid_path, const std::string& count_path) {
  const GrayImage img = io::load_pgm(grid_path);
  std::string count_text;
  try {
    count_text = io::read_file_text(count_path);
  } catch (const Error&) {
    throw Error(ErrorKind::ParseError, count_path + ": cannot read count file");
  }
  DistributionPrediction p{grid_from_grayscale<std::uint8_t>(img.width, img.height, img.data),
                           parse_count(count_text, count_path), PredictionSource::External};
  p.validate();
  return p;
}

}  // namespace radar_forge
