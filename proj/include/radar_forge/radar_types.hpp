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
#include <optional>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"

namespace radar_forge {

/// One reflection: range, azimuth, elevation, Doppler (positive = receding)
/// and signal strength. RSS stays empty until the RSS network fills it.
struct RadarSignal {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double v = 0.0;
  std::optional<double> rss;

  SphericalPoint spherical() const { return {r, theta, phi}; }
  CartesianPoint3 cartesian() const { return spherical_to_cartesian(spherical()); }
};

/// Empty string when valid, otherwise the first violated constraint.
inline std::string signal_violation(const RadarSignal& s) {
  if (!std::isfinite(s.r) || !std::isfinite(s.theta) || !std::isfinite(s.phi) || !std::isfinite(s.v))
    return "non-finite field";
  if (s.rss && !std::isfinite(*s.rss)) return "non-finite rss";
  if (!(s.r > 0.0)) return "r must be > 0";
  if (!(s.theta > -kPi && s.theta <= kPi)) return "theta outside (-pi, pi]";
  if (!(s.phi >= -kPi / 2 && s.phi <= kPi / 2)) return "phi outside [-pi/2, pi/2]";
  return {};
}

struct RadarDatagram {
  std::string frame_id;
  std::vector<RadarSignal> signals;

  std::size_t size() const { return signals.size(); }
  bool empty() const { return signals.empty(); }
};

/// Simulated radar characteristics. Angles in radians.
struct RadarSpec {
  double delta1 = deg_to_rad(1.5);  // azimuth resolution
  double delta2 = deg_to_rad(1.5);  // elevation resolution
  double max_range = 50.0;
  double azimuth_min = deg_to_rad(-60.0);
  double azimuth_max = deg_to_rad(60.0);
  double elevation_min = deg_to_rad(-25.0);
  double elevation_max = deg_to_rad(25.0);
  int n_max = 661;

  void validate() const {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw Error(ErrorKind::OutOfRange, "angular resolutions must be > 0");
    if (!(max_range > 0.0)) throw Error(ErrorKind::OutOfRange, "max_range must be > 0");
    if (!(azimuth_min < azimuth_max) || !(elevation_min < elevation_max))
      throw Error(ErrorKind::OutOfRange, "empty field of view");
    if (n_max < 1) throw Error(ErrorKind::OutOfRange, "n_max must be >= 1");
  }

  bool in_fov(double theta, double phi) const {
    return theta >= azimuth_min && theta <= azimuth_max && phi >= elevation_min && phi <= elevation_max;
  }
};

/// Image-space regions with a known object velocity (radar frame, m/s).
/// Pixels outside every region belong to the static background.
class ObjectVelocityMap {
 public:
  struct Region {
    double u_min, v_min, u_max, v_max;
    Vec3 velocity;
  };

  ObjectVelocityMap() = default;
  explicit ObjectVelocityMap(std::vector<Region> regions) : regions_(std::move(regions)) {
    for (const auto& r : regions_)
      if (!r.velocity.allFinite()) throw Error(ErrorKind::NonFinite, "object velocity must be finite");
  }

  /// First matching region wins.
  Vec3 lookup(const PixelCoord& px) const {
    for (const auto& r : regions_)
      if (px.u >= r.u_min && px.u <= r.u_max && px.v >= r.v_min && px.v <= r.v_max) return r.velocity;
    return Vec3::Zero();
  }

  const std::vector<Region>& regions() const { return regions_; }

 private:
  std::vector<Region> regions_;
};

}  // namespace radar_forge
