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

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/io/calibration.hpp"
#include "radar_forge/io/datagram_csv.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/io/image.hpp"
#include "radar_forge/io/lidar.hpp"
#include "radar_forge/io/manifest.hpp"
#include "radar_forge/radar_types.hpp"
#include "radar_forge/rng.hpp"

namespace radar_forge::fixture {

enum class Scene { Wall, Boxes, Street };

inline Scene parse_scene(std::string_view s) {
  if (s == "wall") return Scene::Wall;
  if (s == "boxes") return Scene::Boxes;
  if (s == "street") return Scene::Street;
  throw Error(ErrorKind::ParseError, "unknown scene '" + std::string(s) + "' (expected wall, boxes or street)");
}

constexpr std::string_view to_string(Scene s) {
  switch (s) {
    case Scene::Wall: return "wall";
    case Scene::Boxes: return "boxes";
    case Scene::Street: return "street";
  }
  return "unknown";
}

/// Surface class. RSS is linear in range: rss = offset + slope * r.
/// `reflectivity` is the chance a camera ray that hits the surface yields a
/// ground-truth radar signal.
struct Material {
  std::string tag;
  std::array<std::uint8_t, 3> color;
  double rss_offset;
  double rss_slope;
  double reflectivity;

  double rss(double r) const { return rss_offset + rss_slope * r; }
};

inline const Material& concrete() {
  static const Material m{"concrete", {170, 165, 150}, 40.0, -1.5, 0.35};
  return m;
}
inline const Material& asphalt() {
  static const Material m{"asphalt", {70, 70, 75}, 12.0, -0.2, 0.08};
  return m;
}
inline const Material& metal() {
  static const Material m{"metal", {40, 90, 200}, 55.0, -0.8, 1.0};
  return m;
}
inline const Material& brick() {
  static const Material m{"brick", {160, 80, 60}, 30.0, -0.5, 0.25};
  return m;
}

/// Infinite plane n . x = d.
struct Plane {
  Vec3 normal;
  double offset;
  const Material* material;
};

/// Axis-aligned box, optionally moving (radar frame, m/s).
struct Box {
  Vec3 lo, hi;
  const Material* material;
  Vec3 velocity = Vec3::Zero();
};

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 point = Vec3::Zero();
  const Material* material = nullptr;
  Vec3 velocity = Vec3::Zero();
  int box = -1;  // index of the box hit, -1 for planes
};

struct SceneGeometry {
  std::vector<Plane> planes;
  std::vector<Box> boxes;

  /// Nearest intersection along origin + t * dir, t > 0.
  Hit cast(const Vec3& origin, const Vec3& dir) const {
    Hit best;
    for (const auto& p : planes) {
      const double den = p.normal.dot(dir);
      if (std::abs(den) < 1e-15) continue;
      const double t = (p.offset - p.normal.dot(origin)) / den;
      if (t > 1e-9 && t < best.t) best = Hit{t, origin + t * dir, p.material, Vec3::Zero(), -1};
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto& b = boxes[i];
      double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
      bool miss = false;
      for (int a = 0; a < 3 && !miss; ++a) {
        if (std::abs(dir[a]) < 1e-15) {
          miss = origin[a] < b.lo[a] || origin[a] > b.hi[a];
          continue;
        }
        double ta = (b.lo[a] - origin[a]) / dir[a];
        double tb = (b.hi[a] - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        miss = t0 > t1;
      }
      if (!miss && t0 > 1e-9 && t0 < best.t)
        best = Hit{t0, origin + t0 * dir, b.material, b.velocity, static_cast<int>(i)};
    }
    return best;
  }
};

struct FixtureOptions {
  Scene scene = Scene::Wall;
  int frames = 4;
  std::uint64_t seed = 7;
  int width = 64;
  int height = 48;
  double focal = 60.0;
  int lidar_lines = 64;
  double lidar_elevation_deg = 30.0;  // symmetric span
  double lidar_azimuth_deg = 45.0;    // symmetric span
  double lidar_azimuth_step_deg = 0.4;
};

/// One generated frame with the geometry it came from.
struct FixtureFrame {
  FrameBundle bundle;
  SceneGeometry geometry;
  std::vector<std::string> signal_materials;  // parallel to the ground-truth signals
};

inline SceneGeometry build_scene(Scene scene, SeededRng& rng) {
  SceneGeometry g;
  switch (scene) {
    case Scene::Wall:
      g.planes.push_back({Vec3(1, 0, 0), 10.0, &concrete()});
      break;
    case Scene::Boxes: {
      g.planes.push_back({Vec3(0, 0, 1), -1.0, &asphalt()});
      g.planes.push_back({Vec3(1, 0, 0), 25.0, &concrete()});
      for (int i = 0; i < 3; ++i) {
        const double x = 7.0 + 5.0 * i + rng.uniform(-1.0, 1.0);
        const double y = -3.0 + 3.0 * i + rng.uniform(-0.8, 0.8);
        const double half = 0.7 + 0.2 * i;
        Box b{Vec3(x - half, y - half, -1.0), Vec3(x + half, y + half, 0.2 + 0.3 * i), &metal()};
        if (i == 1) b.velocity = Vec3(-2.0, 1.5, 0.0);
        g.boxes.push_back(b);
      }
      break;
    }
    case Scene::Street: {
      g.planes.push_back({Vec3(0, 0, 1), -1.2, &asphalt()});
      g.planes.push_back({Vec3(0, 1, 0), 7.0, &brick()});
      g.planes.push_back({Vec3(0, 1, 0), -7.0, &brick()});
      g.planes.push_back({Vec3(1, 0, 0), 40.0, &concrete()});
      for (int i = 0; i < 4; ++i) {
        const double x = 8.0 + 7.0 * i + rng.uniform(-1.5, 1.5);
        const double y = (i % 2 == 0 ? -3.5 : 3.5) + rng.uniform(-0.5, 0.5);
        Box b{Vec3(x - 2.0, y - 0.9, -1.2), Vec3(x + 2.0, y + 0.9, 0.3), &metal()};
        if (i == 2) b.velocity = Vec3(6.0, 0.0, 0.0);
        g.boxes.push_back(b);
      }
      break;
    }
  }
  return g;
}

inline CameraIntrinsics fixture_intrinsics(const FixtureOptions& o) {
  return CameraIntrinsics(o.focal, o.focal, std::floor(o.width / 2.0), std::floor(o.height / 2.0));
}

/// Camera at the radar origin, axes aligned; lidar raised by `lidar_height`.
inline Calibration fixture_calibration(const FixtureOptions& o, double lidar_height) {
  Mat3 cam_rot = camera_to_radar_aligned_rotation();
  return Calibration(fixture_intrinsics(o), RigidTransform(Mat3::Identity(), Vec3(0, 0, lidar_height)),
                     RigidTransform(cam_rot, Vec3::Zero()));
}

inline double lidar_height_for(Scene s) { return s == Scene::Wall ? 0.0 : 0.3; }

/// Ray-cast lidar, points in the lidar frame. Rows sweep elevation bottom
/// to top, columns sweep azimuth right to left.
inline std::vector<CartesianPoint3> cast_lidar(const SceneGeometry& g, const FixtureOptions& o, const Vec3& origin) {
  std::vector<CartesianPoint3> cloud;
  const int cols = static_cast<int>(std::lround(2.0 * o.lidar_azimuth_deg / o.lidar_azimuth_step_deg)) + 1;
  for (int row = 0; row < o.lidar_lines; ++row) {
    const double el = deg_to_rad(-o.lidar_elevation_deg + 2.0 * o.lidar_elevation_deg * row / (o.lidar_lines - 1));
    for (int col = 0; col < cols; ++col) {
      const double az = deg_to_rad(-o.lidar_azimuth_deg + o.lidar_azimuth_step_deg * col);
      const Vec3 dir = spherical_to_cartesian({1.0, az, el});
      const Hit h = g.cast(origin, dir);
      if (!h.material || h.t > 120.0) continue;
      cloud.push_back(h.point - origin);
    }
  }
  return cloud;
}

/// Flat colour per material, darkened with range.
inline RgbImage render(const SceneGeometry& g, const Calibration& cal, int width, int height) {
  RgbImage img(width, height);
  const Mat3& rot = cal.camera_to_radar.rotation();
  const Vec3 origin = cal.camera_to_radar.translation();
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      const Vec3 dir = back_project_ray(cal.k, rot, PixelCoord{static_cast<double>(u), static_cast<double>(v)});
      const Hit h = g.cast(origin, dir.normalized());
      auto* px = img.pixel(u, v);
      if (!h.material) continue;
      const double shade = std::clamp(1.15 - h.t / 60.0, 0.35, 1.0);
      for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>(std::lround(h.material->color[c] * shade));
    }
  return img;
}

/// Image-space bounding box of each moving box, clamped to the raster.
inline ObjectVelocityMap moving_regions(const SceneGeometry& g, const Calibration& cal, int width, int height) {
  std::vector<ObjectVelocityMap::Region> regions;
  for (const auto& b : g.boxes) {
    if (b.velocity.isZero()) continue;
    double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
    bool any = false;
    for (int c = 0; c < 8; ++c) {
      const Vec3 p((c & 1) ? b.hi.x() : b.lo.x(), (c & 2) ? b.hi.y() : b.lo.y(), (c & 4) ? b.hi.z() : b.lo.z());
      const auto px = try_project_to_image(cal.k, cal.radar_to_camera, p);
      if (!px) continue;
      any = true;
      u0 = std::min(u0, px->u);
      v0 = std::min(v0, px->v);
      u1 = std::max(u1, px->u);
      v1 = std::max(v1, px->v);
    }
    if (!any) continue;
    u0 = std::max(u0, -0.5);
    v0 = std::max(v0, -0.5);
    u1 = std::min(u1, width - 0.5);
    v1 = std::min(v1, height - 0.5);
    if (u0 > u1 || v0 > v1) continue;
    regions.push_back({u0, v0, u1, v1, b.velocity});
  }
  return ObjectVelocityMap(std::move(regions));
}

inline Vec3 ego_velocity_for(Scene s, int index, SeededRng& rng) {
  if (s == Scene::Wall) return Vec3(10.0, 0.0, 0.0);
  return Vec3(4.0 + 1.5 * index + rng.uniform(0.0, 0.5), 0.0, 0.0);
}

/// Ground truth: camera rays through uniformly drawn sub-pixel positions,
/// accepted with the hit material's reflectivity, until `count` signals.
inline RadarDatagram draw_ground_truth(const SceneGeometry& g, const Calibration& cal, int width, int height,
                                       const Vec3& ego, long long count, SeededRng& rng,
                                       std::vector<std::string>& materials) {
  RadarDatagram d;
  const Mat3& rot = cal.camera_to_radar.rotation();
  const Vec3 origin = cal.camera_to_radar.translation();
  long long attempts = 0;
  while (static_cast<long long>(d.signals.size()) < count) {
    if (++attempts > 1000 * count) throw Error(ErrorKind::InsufficientData, "scene reflects too few camera rays");
    const PixelCoord px{rng.uniform(-0.5, width - 0.5), rng.uniform(-0.5, height - 0.5)};
    const Vec3 dir = back_project_ray(cal.k, rot, px).normalized();
    const Hit h = g.cast(origin, dir);
    if (!h.material || rng.uniform() >= h.material->reflectivity) continue;
    const SphericalPoint s = cartesian_to_spherical(h.point);
    const Vec3 unit = h.point / s.r;
    d.signals.push_back(RadarSignal{s.r, s.theta, s.phi, (h.velocity - ego).dot(unit), h.material->rss(s.r)});
    materials.push_back(h.material->tag);
  }
  return d;
}

inline long long ground_truth_count(Scene s, const Vec3& ego) {
  switch (s) {
    case Scene::Wall: return 150;
    case Scene::Boxes: return 160 + std::llround(6.0 * ego.norm());
    case Scene::Street: return 200 + std::llround(5.0 * ego.norm());
  }
  return 150;
}

inline std::string frame_id(int index) {
  std::string s = std::to_string(index);
  return std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s;
}

/// Frame `index` of a scene; a pure function of (options, index).
inline FixtureFrame make_frame(const FixtureOptions& o, int index) {
  if (o.width < 8 || o.height < 8) throw Error(ErrorKind::OutOfRange, "fixture image must be at least 8x8");
  if (o.lidar_lines < 2) throw Error(ErrorKind::OutOfRange, "fixture lidar needs at least two lines");
  SeededRng rng = SeededRng::for_frame(o.seed, static_cast<std::uint64_t>(index));
  SceneGeometry geometry = build_scene(o.scene, rng);
  const Calibration cal = fixture_calibration(o, lidar_height_for(o.scene));
  const Vec3 ego = ego_velocity_for(o.scene, index, rng);
  FrameBundle bundle(frame_id(index), render(geometry, cal, o.width, o.height),
                     cast_lidar(geometry, o, cal.lidar_to_radar.translation()), ego, cal);
  bundle.object_velocities = moving_regions(geometry, cal, o.width, o.height);
  std::vector<std::string> materials;
  bundle.ground_truth =
      draw_ground_truth(geometry, cal, o.width, o.height, ego, ground_truth_count(o.scene, ego), rng, materials);
  bundle.ground_truth->frame_id = bundle.id;
  return FixtureFrame{std::move(bundle), std::move(geometry), std::move(materials)};
}

/// Writes images/, lidar/, calib/, radar/, objvel/ and manifest.txt under
/// `out_dir`. Returns the manifest path.
inline std::string write_fixture(const FixtureOptions& o, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (o.frames < 1) throw Error(ErrorKind::OutOfRange, "fixture needs at least one frame");
  const fs::path root(out_dir);
  for (const char* sub : {"images", "lidar", "calib", "radar", "objvel"}) fs::create_directories(root / sub);
  DatasetDescriptor d;
  d.name = std::string(to_string(o.scene));
  d.base_dir = root.string();
  d.seed = o.seed;
  for (int i = 0; i < o.frames; ++i) {
    const FixtureFrame f = make_frame(o, i);
    const auto& b = f.bundle;
    FrameDescriptor fd;
    fd.id = b.id;
    fd.image = (root / "images" / (b.id + ".ppm")).string();
    fd.lidar = (root / "lidar" / (b.id + ".bin")).string();
    fd.calibration = (root / "calib" / (b.id + ".txt")).string();
    fd.radar = (root / "radar" / (b.id + ".csv")).string();
    fd.ego_velocity = b.ego_velocity;
    io::save_ppm(fd.image, b.image);
    io::save_lidar_bin(fd.lidar, b.lidar);
    io::save_calibration(fd.calibration, b.calibration);
    io::write_datagram_csv(*fd.radar, *b.ground_truth);
    if (!b.object_velocities.regions().empty()) {
      fd.object_velocities = (root / "objvel" / (b.id + ".csv")).string();
      io::write_file_text(*fd.object_velocities, io::format_object_velocity_csv(b.object_velocities));
    }
    d.frames.push_back(std::move(fd));
  }
  const std::string manifest = (root / "manifest.txt").string();
  io::write_file_text(manifest, io::format_manifest(d));
  return manifest;
}

}  // namespace radar_forge::fixture
