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
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "radar_forge/error.hpp"

namespace radar_forge {

/// Cartesian point in meters. Which frame it lives in is carried by the
/// variable name: radar ({D}, x forward, z up), lidar or camera.
using CartesianPoint3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Radar spherical coordinates. Azimuth is measured from +x toward +y,
/// elevation from the x-y plane toward +z.
struct SphericalPoint {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Continuous image coordinates, 0-based; pixel (i, j) has its center at (i, j).
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;

  bool operator==(const PixelCoord&) const = default;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kBehindCameraDepth = 1e-9;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline CartesianPoint3 spherical_to_cartesian(const SphericalPoint& s) {
  const double cp = std::cos(s.phi);
  return {s.r * cp * std::cos(s.theta), s.r * cp * std::sin(s.theta), s.r * std::sin(s.phi)};
}

inline SphericalPoint cartesian_to_spherical(const CartesianPoint3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::ZeroVector, "cannot convert the zero vector to spherical");
  double theta = std::atan2(p.y(), p.x());
  if (theta <= -kPi) theta = kPi;
  const double phi = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
  return {r, theta, phi};
}

/// Proper rigid motion p' = R p + t. Construction enforces orthonormality
/// and det(R) = +1.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  RigidTransform(const Mat3& rotation, const Vec3& translation, double tolerance = kTolerance)
      : rotation_(rotation), translation_(translation) {
    validate(tolerance);
  }

  static RigidTransform identity() { return {}; }

  static RigidTransform from_matrix(const Mat4& m, double tolerance = kTolerance) {
    if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > tolerance)
      throw Error(ErrorKind::NonRigidTransform, "bottom row of homogeneous matrix is not [0 0 0 1]");
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(), tolerance};
  }

  /// Accepts a rotation within `tolerance` of SO(3) and snaps it onto the
  /// nearest rotation so the strict invariant holds afterwards.
  static RigidTransform from_matrix_orthonormalized(const Mat4& m, double tolerance) {
    RigidTransform loose = from_matrix(m, tolerance);
    Eigen::JacobiSVD<Mat3> svd(loose.rotation_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    return {r, loose.translation_};
  }

  static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  static RigidTransform rotation_z(double angle) {
    return {Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero()};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation_.transpose();
    return {rt, -rt * translation_};
  }

  CartesianPoint3 apply(const CartesianPoint3& p) const { return rotation_ * p + translation_; }

  /// (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_};
  }

 private:
  void validate(double tolerance) const {
    if (!rotation_.allFinite() || !translation_.allFinite())
      throw Error(ErrorKind::NonRigidTransform, "non-finite entries");
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > tolerance)
      throw Error(ErrorKind::NonRigidTransform, "rotation is not orthonormal (error " + std::to_string(ortho) + ")");
    const double det = rotation_.determinant();
    if (std::abs(det - 1.0) > tolerance)
      throw Error(ErrorKind::NonRigidTransform, "rotation determinant is " + std::to_string(det));
  }

  Mat3 rotation_;
  Vec3 translation_;
};

inline CartesianPoint3 transform_point(const RigidTransform& t, const CartesianPoint3& p) { return t.apply(p); }

/// Pinhole intrinsics K = [[fx, s, cx], [0, fy, cy], [0, 0, 1]].
class CameraIntrinsics {
 public:
  CameraIntrinsics(double fx, double fy, double cx, double cy, double skew = 0.0)
      : fx_(fx), fy_(fy), cx_(cx), cy_(cy), skew_(skew) {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
      throw Error(ErrorKind::InvalidIntrinsics, "focal lengths must be positive and finite");
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(skew))
      throw Error(ErrorKind::InvalidIntrinsics, "principal point must be finite");
  }

  static CameraIntrinsics from_matrix(const Mat3& k) {
    if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0)
      throw Error(ErrorKind::InvalidIntrinsics, "K must be upper triangular with K(2,2) = 1");
    return {k(0, 0), k(1, 1), k(0, 2), k(1, 2), k(0, 1)};
  }

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double skew() const { return skew_; }

  Mat3 matrix() const {
    Mat3 k;
    k << fx_, skew_, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
    return k;
  }

  PixelCoord project(const Vec3& p_cam) const {
    const double x = p_cam.x() / p_cam.z();
    const double y = p_cam.y() / p_cam.z();
    return {fx_ * x + skew_ * y + cx_, fy_ * y + cy_};
  }

  /// K^-1 [u, v, 1]^T, evaluated by back substitution.
  Vec3 unproject(const PixelCoord& px) const {
    const double y = (px.v - cy_) / fy_;
    const double x = (px.u - cx_ - skew_ * y) / fx_;
    return {x, y, 1.0};
  }

 private:
  double fx_, fy_, cx_, cy_, skew_;
};

/// Pinhole projection of a radar-frame point. Returns nullopt when the
/// camera-frame depth is at or below kBehindCameraDepth.
inline std::optional<PixelCoord> try_project_to_image(const CameraIntrinsics& k, const RigidTransform& cam_from_radar,
                                                      const CartesianPoint3& p) {
  const Vec3 pc = cam_from_radar.apply(p);
  if (!(pc.z() > kBehindCameraDepth)) return std::nullopt;
  return k.project(pc);
}

inline PixelCoord project_to_image(const CameraIntrinsics& k, const RigidTransform& cam_from_radar,
                                   const CartesianPoint3& p) {
  auto px = try_project_to_image(k, cam_from_radar, p);
  if (!px) throw Error(ErrorKind::BehindCamera, "point has non-positive camera depth");
  return *px;
}

/// Ray direction in the radar frame for a pixel: R_D<-C K^-1 [u, v, 1]^T.
/// Not normalized.
inline Vec3 back_project_ray(const CameraIntrinsics& k, const Mat3& radar_from_cam_rotation, const PixelCoord& px) {
  return radar_from_cam_rotation * k.unproject(px);
}

/// Camera optical axis along radar +x, image right along radar -y, image
/// down along radar -z.
inline Mat3 camera_to_radar_aligned_rotation() {
  Mat3 r;
  r << 0, 0, 1,
      -1, 0, 0,
      0, -1, 0;
  return r;
}

/// True when the pixel center nearest to `px` lies in a width x height raster.
inline bool in_image(const PixelCoord& px, int width, int height) {
  return px.u >= -0.5 && px.u < width - 0.5 && px.v >= -0.5 && px.v < height - 0.5;
}

}  // namespace radar_forge
