// Copyright (c) 2026 The usbl_homing Authors
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

/**
 * @file manifold.hpp
 * @brief Rigid-body poses, rotations, unit bearings and wrapped headings,
 *        together with the local-update operators the solver uses on them.
 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace homing {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Local pose increment (dθ, dψ, dφ, dx, dy, dz): rotation vector first, then translation.
using Tangent6 = Vec6;

Mat3 skew(const Vec3& w);

/// Rodrigues exponential of a rotation vector.
Mat3 so3_exp(const Vec3& w);
/// Inverse of so3_exp; returns a rotation vector with norm in [0, pi].
Vec3 so3_log(const Mat3& R);
/// Right Jacobian of SO(3) and its inverse.
Mat3 so3_right_jacobian(const Vec3& w);
Mat3 so3_right_jacobian_inverse(const Vec3& w);

/// Projects a nearly orthonormal matrix back onto SO(3).
Mat3 orthonormalize(const Mat3& R);

/// Rotation R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_from_ypr(double yaw, double pitch, double roll);

/// World-from-body rigid transform.
class Pose3 {
 public:
  Pose3() : R_(Mat3::Identity()), t_(Vec3::Zero()) {}
  Pose3(const Mat3& rotation, const Vec3& translation) : R_(rotation), t_(translation) {}

  static Pose3 Identity() { return {}; }
  static Pose3 FromYawPitchRoll(double yaw, double pitch, double roll, const Vec3& translation) {
    return {rotation_from_ypr(yaw, pitch, roll), translation};
  }

  const Mat3& rotation() const { return R_; }
  const Vec3& translation() const { return t_; }

  Pose3 inverse() const;
  Pose3 compose(const Pose3& other) const;
  Pose3 operator*(const Pose3& other) const { return compose(other); }

  /// Maps a body-frame point into the world frame.
  Vec3 transform_from(const Vec3& p_body) const { return R_ * p_body + t_; }
  /// Maps a world-frame point into the body frame.
  Vec3 transform_to(const Vec3& p_world) const { return R_.transpose() * (p_world - t_); }

  double yaw() const;
  double pitch() const;
  double roll() const;

  Eigen::Matrix4d matrix() const;

 private:
  Mat3 R_;
  Vec3 t_;
};

/// Chart exponential: exact rotation exponential, translation taken verbatim.
Pose3 se3_exp(const Tangent6& xi);

/// Right-multiplicative retraction q * se3_exp(xi).
Pose3 pose_local_update(const Pose3& q, const Tangent6& xi);

/// Inverse of pose_local_update: returns xi with pose_local_update(from, xi) == to.
Tangent6 pose_local_coordinates(const Pose3& from, const Pose3& to);

/// Wraps any finite angle into (-pi, pi].
double wrap_angle(double a);

/// Heading angle on S^1, always stored wrapped to (-pi, pi].
class Heading {
 public:
  Heading() = default;
  explicit Heading(double radians) : rad_(wrap_angle(radians)) {}

  double radians() const { return rad_; }
  Heading retract(double delta) const { return Heading(rad_ + delta); }
  /// Signed shortest difference this - other, in (-pi, pi].
  double minus(const Heading& other) const { return wrap_angle(rad_ - other.rad_); }

 private:
  double rad_ = 0.0;
};

/// Rotation about the world z-axis by the heading angle.
Mat3 rot_from_heading(const Heading& theta);

/// Direction on the 2-sphere.
class UnitBearing {
 public:
  /// Normalizes v; throws std::invalid_argument for zero or non-finite input.
  explicit UnitBearing(const Vec3& v);

  const Vec3& direction() const { return d_; }

 private:
  Vec3 d_;
};

/// Orthonormal tangent basis at b: columns (azimuth-like, zenith-like).
Mat32 bearing_tangent_basis(const UnitBearing& b);

/// Local coordinates of a in the tangent chart at b. The result norm equals the
/// angle between a and b; antipodal inputs map to (pi, 0).
Vec2 bearing_boxminus(const UnitBearing& a, const UnitBearing& b);

/// Inverse of bearing_boxminus for |delta| < pi.
UnitBearing bearing_boxplus(const UnitBearing& b, const Vec2& delta);

}  // namespace homing
