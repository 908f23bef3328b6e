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

#include "homing/factors.hpp"

#include <cmath>
#include <stdexcept>

namespace homing {

ChaserState chaser_retract(const ChaserState& x, const Vec9& delta) {
  return {pose_local_update(x.pose, delta.head<6>()), x.velocity + delta.tail<3>()};
}

Vec9 chaser_local_coordinates(const ChaserState& from, const ChaserState& to) {
  Vec9 d;
  d.head<6>() = pose_local_coordinates(from.pose, to.pose);
  d.tail<3>() = to.velocity - from.velocity;
  return d;
}

Vec3 usbl_to_body(const Pose3& pose_estimate, const Vec3& fix_world) {
  return -(pose_estimate.rotation().transpose() * fix_world);
}

Vec3 dvl_to_world(const Mat3& rotation_estimate, const Vec3& v_body) {
  return rotation_estimate * v_body;
}

RangeBearing predict_range_bearing(const ChaserState& chaser, const TargetPosition& target) {
  const Vec3 t_body = chaser.pose.transform_to(target.position);
  const double r = t_body.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("predict_range_bearing: chaser and target positions coincide");
  }
  return {r, UnitBearing(t_body)};
}

RangeBearingResidual range_bearing_residual(const ChaserState& chaser,
                                            const TargetPosition& target,
                                            const RangeBearingMeas& z) {
  const Mat3& R = chaser.pose.rotation();
  const Vec3 t = chaser.pose.transform_to(target.position);
  const double r = t.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("range_bearing_residual: chaser and target positions coincide");
  }
  const Vec3 h = t / r;

  // d t / d(chaser increment) and d t / d target.
  Mat39 dt_dx = Mat39::Zero();
  dt_dx.block<3, 3>(0, 0) = skew(t);
  dt_dx.block<3, 3>(0, 3) = -Mat3::Identity();
  const Mat3 dt_dtarget = R.transpose();

  const Eigen::RowVector3d dr_dt = h.transpose();
  const Mat3 dh_dt = (Mat3::Identity() - h * h.transpose()) / r;

  // Bearing chart at the measured direction: eps = (angle / s) * B^T h.
  const Mat32 B = bearing_tangent_basis(z.bearing);
  const Vec3& zb = z.bearing.direction();
  const Vec2 w = B.transpose() * h;
  const double c = zb.dot(h);
  const double s = w.norm();

  Vec2 eps;
  Eigen::Matrix<double, 2, 3> deps_dh;
  if (s < 1e-12) {
    if (c < 0.0) {
      throw std::domain_error("range_bearing_residual: predicted bearing is antipodal to the measurement");
    }
    eps = w / c;
    deps_dh = B.transpose() / c - (w / (c * c)) * zb.transpose();
  } else {
    const double angle = std::atan2(s, c);
    const double k = angle / s;
    eps = k * w;
    const Eigen::Matrix<double, 2, 3> dw_dh = B.transpose();
    const Eigen::RowVector3d ds_dh = (w.transpose() / s) * dw_dh;
    const Eigen::RowVector3d dc_dh = zb.transpose();
    const double denom = s * s + c * c;
    const Eigen::RowVector3d dangle_dh = (c * ds_dh - s * dc_dh) / denom;
    const Eigen::RowVector3d dk_dh = (dangle_dh * s - angle * ds_dh) / (s * s);
    deps_dh = k * dw_dh + w * dk_dh;
  }

  RangeBearingResidual out;
  out.error.head<2>() = eps;
  out.error(2) = r - z.range;

  Eigen::Matrix<double, 3, 3> de_dt;
  de_dt.topRows<2>() = deps_dh * dh_dt;
  de_dt.row(2) = dr_dt;

  out.d_chaser = de_dt * dt_dx;
  out.d_target = de_dt * dt_dtarget;
  return out;
}

NoiseModel usbl_noise_model(double range, const UsblNoiseParams& params) {
  if (!(range > 0.0)) {
    throw std::invalid_argument("usbl_noise_model: range must be positive");
  }
  const double angular = params.angular_sigma_per_meter * range;
  return NoiseModel::Diagonal(Vec3(angular, angular, params.range_sigma));
}

Vec3 motion_model_predict(const Vec3& x_from, const TargetMotionParams& params, double dt) {
  const double th = params.heading.radians();
  const double step = params.speed * dt;
  return x_from + Vec3(std::cos(th) * step, std::sin(th) * step, 0.0);
}

MotionModelResidual motion_model_residual(const TargetPosition& x_from, const TargetPosition& x_to,
                                          const TargetMotionParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("motion_model_residual: dt must be positive");
  }
  const double th = params.heading.radians();
  const double v = params.speed;
  MotionModelResidual out;
  out.error = motion_model_predict(x_from.position, params, dt) - x_to.position;
  out.d_from = Mat3::Identity();
  out.d_to = -Mat3::Identity();
  out.d_speed = Vec3(std::cos(th) * dt, std::sin(th) * dt, 0.0);
  out.d_heading = Vec3(-std::sin(th) * v * dt, std::cos(th) * v * dt, 0.0);
  return out;
}

DepthResidual depth_residual(const ChaserState& chaser, double z_d) {
  // d z / d(translation increment) is the world z row of R: (-sin p, cos p sin r, cos p cos r).
  // Reading it from R avoids the Euler-angle singularity at pitch = +-pi/2.
  DepthResidual out;
  out.error = chaser.pose.translation().z() - z_d;
  out.d_chaser.setZero();
  out.d_chaser.segment<3>(3) = chaser.pose.rotation().row(2);
  return out;
}

VelocityResidual velocity_residual(const ChaserState& chaser, const Vec3& z_v) {
  VelocityResidual out;
  out.error = chaser.velocity - z_v;
  out.d_chaser.setZero();
  out.d_chaser.block<3, 3>(0, 6) = Mat3::Identity();
  return out;
}

}  // namespace homing
