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
 * @file factors.hpp
 * @brief Measurement models, residuals and analytic Jacobians for the
 *        relayed USBL range/bearing, target motion, depth and DVL factors.
 *
 * Every residual is a pure function of variable values. Jacobians are taken
 * with respect to the solver's local increments: a 9-vector
 * (rotation, position, velocity) for the chaser state (pose retraction is
 * right-multiplicative, velocity is additive), plain vectors for target
 * positions and speed, and the wrapped angle increment for heading.
 */

#pragma once

#include "homing/manifold.hpp"
#include "homing/noise.hpp"

namespace homing {

using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat19 = Eigen::Matrix<double, 1, 9>;

/// Chaser navigation state: world-from-body pose and world-frame velocity.
struct ChaserState {
  Pose3 pose;
  Vec3 velocity = Vec3::Zero();
};

ChaserState chaser_retract(const ChaserState& x, const Vec9& delta);
/// Inverse of chaser_retract.
Vec9 chaser_local_coordinates(const ChaserState& from, const ChaserState& to);

/// Target position in the world frame.
struct TargetPosition {
  Vec3 position = Vec3::Zero();
};

/// Shared constant-motion parameters of the target.
struct TargetMotionParams {
  double speed = 0.0;  // m/s
  Heading heading;
};

struct RangeBearingMeas {
  double range = 1.0;
  UnitBearing bearing{Vec3::UnitX()};
  double timestamp = 0.0;
};

struct RangeBearing {
  double range;
  UnitBearing bearing;
};

/// Relayed world-frame fix (target-to-chaser vector) expressed in the chaser
/// body frame as the target-from-chaser vector. Only the rotation acts.
Vec3 usbl_to_body(const Pose3& pose_estimate, const Vec3& fix_world);

/// Rotates a body-frame DVL velocity into the world frame.
Vec3 dvl_to_world(const Mat3& rotation_estimate, const Vec3& v_body);

/// Range and bearing of the target seen from the chaser body frame.
/// Throws std::domain_error for coincident positions.
RangeBearing predict_range_bearing(const ChaserState& chaser, const TargetPosition& target);

/// Residual ordering is (bearing azimuth-like, bearing zenith-like, range).
struct RangeBearingResidual {
  Vec3 error;
  Mat39 d_chaser;
  Mat3 d_target;
};

RangeBearingResidual range_bearing_residual(const ChaserState& chaser,
                                            const TargetPosition& target,
                                            const RangeBearingMeas& z);

struct UsblNoiseParams {
  double angular_sigma_per_meter = 0.0175;  // rad/m, scaled by the measured range
  double range_sigma = 0.1;                 // m
};

/// diag(sigma_psi^2, sigma_theta^2, sigma_r^2); throws for non-positive range.
NoiseModel usbl_noise_model(double range, const UsblNoiseParams& params = {});

/// Constant-depth, constant-heading, constant-speed target prediction.
Vec3 motion_model_predict(const Vec3& x_from, const TargetMotionParams& params, double dt);
inline TargetPosition motion_model_predict(const TargetPosition& x_from,
                                           const TargetMotionParams& params, double dt) {
  return {motion_model_predict(x_from.position, params, dt)};
}

struct MotionModelResidual {
  Vec3 error;
  Mat3 d_from;
  Mat3 d_to;
  Vec3 d_speed;
  Vec3 d_heading;
};

/// predict(x_from) - x_to, with the exact Jacobians. Throws for dt <= 0.
MotionModelResidual motion_model_residual(const TargetPosition& x_from, const TargetPosition& x_to,
                                          const TargetMotionParams& params, double dt);

struct DepthResidual {
  double error;
  Mat19 d_chaser;
};

/// z-coordinate of the chaser minus the measured z (ENU, so z_d is negative below the surface).
DepthResidual depth_residual(const ChaserState& chaser, double z_d);

struct VelocityResidual {
  Vec3 error;
  Mat39 d_chaser;
};

VelocityResidual velocity_residual(const ChaserState& chaser, const Vec3& z_v);

}  // namespace homing
