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
 * @file imu.hpp
 * @brief IMU preintegration between keyframes and the 15-dimensional
 *        inertial odometry residual.
 *
 * Preintegrated deltas are expressed in the body frame at the first sample and
 * exclude gravity; gravity enters through the start rotation when the deltas
 * are compared against states. First-order bias Jacobians are carried so the
 * residual stays smooth in the bias; large bias moves are handled by
 * re-preintegrating the stored samples.
 */

#pragma once

#include <span>
#include <vector>

#include "homing/factors.hpp"

namespace homing {

using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat15 = Eigen::Matrix<double, 15, 15>;

struct ImuSample {
  double timestamp = 0.0;
  Vec3 accel = Vec3::Zero();  // specific force, body frame, m/s^2
  Vec3 gyro = Vec3::Zero();   // body rate, rad/s
};

struct ImuBias {
  Vec3 accel = Vec3::Zero();
  Vec3 gyro = Vec3::Zero();

  /// Stacked (accel, gyro).
  Vec6 vector() const {
    Vec6 v;
    v << accel, gyro;
    return v;
  }
  static ImuBias FromVector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Continuous-time noise densities and gravity.
struct ImuParams {
  double accel_sigma = 5.9898e-2;      // (m/s^2)/sqrt(Hz)
  double gyro_sigma = 1.0471e-5;       // (rad/s)/sqrt(Hz)
  double accel_bias_sigma = 5.0411e-2; // (m/s^3)/sqrt(Hz)
  double gyro_bias_sigma = 3.3936e-4;  // (rad/s^2)/sqrt(Hz)
  Vec3 gravity{0.0, 0.0, -9.81};
};

struct PreintegratedImu {
  Mat3 delta_rotation = Mat3::Identity();
  Vec3 delta_velocity = Vec3::Zero();
  Vec3 delta_position = Vec3::Zero();
  double duration = 0.0;
  Mat9 covariance = Mat9::Zero();  // (rotation, position, velocity)
  ImuBias linearization_bias;
  Vec3 gravity{0.0, 0.0, -9.81};

  // First-order sensitivities of the deltas to the bias.
  Mat3 d_rotation_d_gyro_bias = Mat3::Zero();
  Mat3 d_position_d_accel_bias = Mat3::Zero();
  Mat3 d_position_d_gyro_bias = Mat3::Zero();
  Mat3 d_velocity_d_accel_bias = Mat3::Zero();
  Mat3 d_velocity_d_gyro_bias = Mat3::Zero();

  /// Raw samples, retained for re-preintegration at a new bias.
  std::vector<ImuSample> samples;

  /// World-frame velocity change over the interval for a given start rotation.
  Vec3 velocity_change(const Mat3& start_rotation) const {
    return start_rotation * delta_velocity + gravity * duration;
  }
  /// World-frame position change over the interval for a given start rotation and velocity.
  Vec3 position_change(const Mat3& start_rotation, const Vec3& start_velocity) const {
    return start_rotation * delta_position + start_velocity * duration +
           0.5 * gravity * duration * duration;
  }
};

/// Bias-corrected midpoint preintegration. Throws std::invalid_argument for an
/// empty list or non-increasing timestamps. A single sample yields a
/// zero-duration identity delta.
PreintegratedImu imu_preintegrate(std::span<const ImuSample> samples, const ImuBias& bias,
                                  const ImuParams& params = {});

/// Propagates a state through the preintegrated deltas, corrected to `bias`.
ChaserState imu_predict(const ChaserState& x_i, const ImuBias& bias, const PreintegratedImu& delta);

/// Residual ordering: rotation(3), position(3), velocity(3), accel bias(3), gyro bias(3).
struct ImuResidual {
  Vec15 error;
  Eigen::Matrix<double, 15, 9> d_state_i;
  Eigen::Matrix<double, 15, 9> d_state_j;
  Eigen::Matrix<double, 15, 6> d_bias_i;
  Eigen::Matrix<double, 15, 6> d_bias_j;
};

ImuResidual imu_residual(const ChaserState& x_i, const ChaserState& x_j, const ImuBias& bias_i,
                         const ImuBias& bias_j, const PreintegratedImu& delta);

/// Block-diagonal 15x15 model: preintegration covariance plus bias random walk over the duration.
NoiseModel imu_noise_model(const PreintegratedImu& delta, const ImuParams& params = {});

}  // namespace homing
