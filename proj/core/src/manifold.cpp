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

#include "homing/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homing {

namespace {
constexpr double kSmallAngle = 1e-8;
}

Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

Mat3 so3_exp(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (theta2 < kSmallAngle * kSmallAngle) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double theta = std::sqrt(theta2);
  return Mat3::Identity() + (std::sin(theta) / theta) * W +
         ((1.0 - std::cos(theta)) / theta2) * W * W;
}

Vec3 so3_log(const Mat3& R) {
  // Quaternion route stays well conditioned near both 0 and pi.
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Vec3 v = q.vec();
  const double n = v.norm();
  if (n < kSmallAngle) {
    return 2.0 * v / q.w();
  }
  const double angle = 2.0 * std::atan2(n, q.w());
  return (angle / n) * v;
}

Mat3 so3_right_jacobian(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (theta2 < 1e-10) {
    return Mat3::Identity() - 0.5 * W + W * W / 6.0;
  }
  const double theta = std::sqrt(theta2);
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / theta2) * W +
         ((theta - std::sin(theta)) / (theta2 * theta)) * W * W;
}

Mat3 so3_right_jacobian_inverse(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 W = skew(w);
  if (theta2 < 1e-10) {
    return Mat3::Identity() + 0.5 * W + W * W / 12.0;
  }
  const double theta = std::sqrt(theta2);
  const double coeff = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * W + coeff * W * W;
}

Mat3 orthonormalize(const Mat3& R) {
  // Adequate for the near-orthonormal inputs produced by products of rotations.
  return Eigen::Quaterniond(R).normalized().toRotationMatrix();
}

Mat3 rotation_from_ypr(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Pose3 Pose3::inverse() const {
  const Mat3 Rt = R_.transpose();
  return {Rt, -Rt * t_};
}

Pose3 Pose3::compose(const Pose3& other) const {
  return {R_ * other.R_, R_ * other.t_ + t_};
}

double Pose3::yaw() const { return std::atan2(R_(1, 0), R_(0, 0)); }

double Pose3::pitch() const { return std::asin(std::clamp(-R_(2, 0), -1.0, 1.0)); }

double Pose3::roll() const { return std::atan2(R_(2, 1), R_(2, 2)); }

Eigen::Matrix4d Pose3::matrix() const {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.topLeftCorner<3, 3>() = R_;
  T.topRightCorner<3, 1>() = t_;
  return T;
}

Pose3 se3_exp(const Tangent6& xi) {
  return {so3_exp(xi.head<3>()), xi.tail<3>()};
}

Pose3 pose_local_update(const Pose3& q, const Tangent6& xi) { return q * se3_exp(xi); }

Tangent6 pose_local_coordinates(const Pose3& from, const Pose3& to) {
  const Mat3 Rt = from.rotation().transpose();
  Tangent6 xi;
  xi.head<3>() = so3_log(Rt * to.rotation());
  xi.tail<3>() = Rt * (to.translation() - from.translation());
  return xi;
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

Mat3 rot_from_heading(const Heading& theta) {
  return Eigen::AngleAxisd(theta.radians(), Vec3::UnitZ()).toRotationMatrix();
}

UnitBearing::UnitBearing(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw std::invalid_argument("UnitBearing: direction must be finite and non-zero");
  }
  d_ = v / n;
}

Mat32 bearing_tangent_basis(const UnitBearing& b) {
  const Vec3& d = b.direction();
  Vec3 azimuth = Vec3::UnitZ().cross(d);
  if (azimuth.norm() < 1e-9) {
    // Looking straight up or down: azimuth is undefined, pick the world y-axis.
    azimuth = Vec3::UnitY();
  }
  azimuth.normalize();
  const Vec3 zenith = azimuth.cross(d);
  Mat32 B;
  B.col(0) = azimuth;
  B.col(1) = zenith;
  return B;
}

Vec2 bearing_boxminus(const UnitBearing& a, const UnitBearing& b) {
  const Mat32 B = bearing_tangent_basis(b);
  const Vec2 w = B.transpose() * a.direction();
  const double c = b.direction().dot(a.direction());
  const double s = w.norm();
  if (s < 1e-15) {
    if (c > 0.0) return Vec2::Zero();
    return {std::numbers::pi, 0.0};
  }
  const double angle = std::atan2(s, c);
  return (angle / s) * w;
}

UnitBearing bearing_boxplus(const UnitBearing& b, const Vec2& delta) {
  const double angle = delta.norm();
  if (angle < 1e-15) return b;
  const Vec3 dir = bearing_tangent_basis(b) * (delta / angle);
  return UnitBearing(std::cos(angle) * b.direction() + std::sin(angle) * dir);
}

}  // namespace homing
