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

#include "homing/imu.hpp"

#include <stdexcept>

namespace homing {

PreintegratedImu imu_preintegrate(std::span<const ImuSample> samples, const ImuBias& bias,
                                  const ImuParams& params) {
  if (samples.empty()) {
    throw std::invalid_argument("imu_preintegrate: no samples");
  }
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].timestamp > samples[k - 1].timestamp)) {
      throw std::invalid_argument("imu_preintegrate: timestamps must be strictly increasing");
    }
  }

  PreintegratedImu out;
  out.linearization_bias = bias;
  out.gravity = params.gravity;
  out.samples.assign(samples.begin(), samples.end());

  Mat3& dR = out.delta_rotation;
  Vec3& dv = out.delta_velocity;
  Vec3& dp = out.delta_position;
  Mat3& JR_g = out.d_rotation_d_gyro_bias;
  Mat3& Jv_a = out.d_velocity_d_accel_bias;
  Mat3& Jv_g = out.d_velocity_d_gyro_bias;
  Mat3& Jp_a = out.d_position_d_accel_bias;
  Mat3& Jp_g = out.d_position_d_gyro_bias;
  Mat9& P = out.covariance;

  const double qa = params.accel_sigma * params.accel_sigma;
  const double qg = params.gyro_sigma * params.gyro_sigma;

  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const ImuSample& s0 = samples[k];
    const ImuSample& s1 = samples[k + 1];
    const double dt = s1.timestamp - s0.timestamp;
    const double dt2 = dt * dt;

    const Vec3 omega = 0.5 * (s0.gyro + s1.gyro) - bias.gyro;
    const Vec3 phi = omega * dt;
    const Mat3 dR_step = so3_exp(phi);
    const Mat3 Jr_step = so3_right_jacobian(phi);

    const Mat3 R0 = dR;
    const Mat3 JR0 = JR_g;
    const Mat3 R1 = R0 * dR_step;
    const Mat3 JR1 = dR_step.transpose() * JR0 - Jr_step * dt;

    const Vec3 a0 = s0.accel - bias.accel;
    const Vec3 a1 = s1.accel - bias.accel;
    const Vec3 a_mid = 0.5 * (R0 * a0 + R1 * a1);

    const Mat3 da_dba = -0.5 * (R0 + R1);
    const Mat3 da_dbg = -0.5 * (R0 * skew(a0) * JR0 + R1 * skew(a1) * JR1);

    // Covariance of (rotation, position, velocity) errors: P <- A P A^T + noise.
    const Vec3 a_body = 0.5 * (a0 + dR_step * a1);
    const Mat3 Ra = R0 * skew(a_body);
    // A = [[D, 0, 0], [X, I, dt I], [Y, 0, I]], applied blockwise.
    const Mat3 D = dR_step.transpose();
    const Mat3 X = -0.5 * Ra * dt2;
    const Mat3 Y = -Ra * dt;
    Mat9 AP;
    AP.topRows<3>() = D.lazyProduct(P.topRows<3>());
    AP.middleRows<3>(3) = X.lazyProduct(P.topRows<3>()) + P.middleRows<3>(3) + dt * P.bottomRows<3>();
    AP.bottomRows<3>() = Y.lazyProduct(P.topRows<3>()) + P.bottomRows<3>();
    P.leftCols<3>() = AP.leftCols<3>().lazyProduct(D.transpose());
    P.middleCols<3>(3) = AP.leftCols<3>().lazyProduct(X.transpose()) + AP.middleCols<3>(3) + dt * AP.rightCols<3>();
    P.rightCols<3>() = AP.leftCols<3>().lazyProduct(Y.transpose()) + AP.rightCols<3>();
    P.block<3, 3>(0, 0) += (qg * dt) * Jr_step * Jr_step.transpose();
    // Accelerometer noise enters position and velocity through R0 (R0 R0^T = I).
    const double qad = qa / dt;
    P.block<3, 3>(3, 3).diagonal().array() += qad * 0.25 * dt2 * dt2;
    P.block<3, 3>(3, 6).diagonal().array() += qad * 0.5 * dt2 * dt;
    P.block<3, 3>(6, 3).diagonal().array() += qad * 0.5 * dt2 * dt;
    P.block<3, 3>(6, 6).diagonal().array() += qad * dt2;

    dp += dv * dt + 0.5 * a_mid * dt2;
    dv += a_mid * dt;
    Jp_a += Jv_a * dt + 0.5 * da_dba * dt2;
    Jp_g += Jv_g * dt + 0.5 * da_dbg * dt2;
    Jv_a += da_dba * dt;
    Jv_g += da_dbg * dt;
    dR = orthonormalize(R1);
    JR_g = JR1;
    out.duration += dt;
  }
  P = 0.5 * (P + P.transpose());
  return out;
}

namespace {

struct CorrectedDeltas {
  Mat3 rotation;
  Vec3 position;
  Vec3 velocity;
  Vec3 rotation_increment;  // J_R * delta_bg
};

CorrectedDeltas correct(const PreintegratedImu& d, const ImuBias& bias) {
  const Vec3 dba = bias.accel - d.linearization_bias.accel;
  const Vec3 dbg = bias.gyro - d.linearization_bias.gyro;
  CorrectedDeltas c;
  c.rotation_increment = d.d_rotation_d_gyro_bias * dbg;
  c.rotation = d.delta_rotation * so3_exp(c.rotation_increment);
  c.position = d.delta_position + d.d_position_d_accel_bias * dba + d.d_position_d_gyro_bias * dbg;
  c.velocity = d.delta_velocity + d.d_velocity_d_accel_bias * dba + d.d_velocity_d_gyro_bias * dbg;
  return c;
}

}  // namespace

ChaserState imu_predict(const ChaserState& x_i, const ImuBias& bias, const PreintegratedImu& delta) {
  const CorrectedDeltas c = correct(delta, bias);
  const Mat3& Ri = x_i.pose.rotation();
  const double T = delta.duration;
  ChaserState x_j;
  const Vec3 p = x_i.pose.translation() + x_i.velocity * T + 0.5 * delta.gravity * T * T +
                 Ri * c.position;
  x_j.pose = Pose3(orthonormalize(Ri * c.rotation), p);
  x_j.velocity = x_i.velocity + delta.gravity * T + Ri * c.velocity;
  return x_j;
}

ImuResidual imu_residual(const ChaserState& x_i, const ChaserState& x_j, const ImuBias& bias_i,
                         const ImuBias& bias_j, const PreintegratedImu& delta) {
  if (!(delta.duration > 0.0)) {
    throw std::invalid_argument("imu_residual: preintegration duration must be positive");
  }
  const CorrectedDeltas c = correct(delta, bias_i);
  const Mat3& Ri = x_i.pose.rotation();
  const Mat3& Rj = x_j.pose.rotation();
  const Vec3& pi = x_i.pose.translation();
  const Vec3& pj = x_j.pose.translation();
  const Vec3& vi = x_i.velocity;
  const Vec3& vj = x_j.velocity;
  const Vec3& g = delta.gravity;
  const double T = delta.duration;
  const Mat3 RiT = Ri.transpose();

  const Vec3 pos_world = pj - pi - vi * T - 0.5 * g * T * T;
  const Vec3 vel_world = vj - vi - g * T;

  const Vec3 r_rot = so3_log(c.rotation.transpose() * RiT * Rj);
  const Vec3 r_pos = RiT * pos_world - c.position;
  const Vec3 r_vel = RiT * vel_world - c.velocity;

  ImuResidual out;
  out.error << r_rot, r_pos, r_vel, bias_j.accel - bias_i.accel, bias_j.gyro - bias_i.gyro;

  const Mat3 Jr_inv = so3_right_jacobian_inverse(r_rot);

  out.d_state_i.setZero();
  out.d_state_j.setZero();
  out.d_bias_i.setZero();
  out.d_bias_j.setZero();

  // Rotation block.
  out.d_state_i.block<3, 3>(0, 0) = -Jr_inv * Rj.transpose() * Ri;
  out.d_state_j.block<3, 3>(0, 0) = Jr_inv;
  out.d_bias_i.block<3, 3>(0, 3) = -Jr_inv * so3_exp(r_rot).transpose() *
                                   so3_right_jacobian(c.rotation_increment) *
                                   delta.d_rotation_d_gyro_bias;

  // Position block.
  out.d_state_i.block<3, 3>(3, 0) = skew(RiT * pos_world);
  out.d_state_i.block<3, 3>(3, 3) = -Mat3::Identity();
  out.d_state_i.block<3, 3>(3, 6) = -RiT * T;
  out.d_state_j.block<3, 3>(3, 3) = RiT * Rj;
  out.d_bias_i.block<3, 3>(3, 0) = -delta.d_position_d_accel_bias;
  out.d_bias_i.block<3, 3>(3, 3) = -delta.d_position_d_gyro_bias;

  // Velocity block.
  out.d_state_i.block<3, 3>(6, 0) = skew(RiT * vel_world);
  out.d_state_i.block<3, 3>(6, 6) = -RiT;
  out.d_state_j.block<3, 3>(6, 6) = RiT;
  out.d_bias_i.block<3, 3>(6, 0) = -delta.d_velocity_d_accel_bias;
  out.d_bias_i.block<3, 3>(6, 3) = -delta.d_velocity_d_gyro_bias;

  // Bias random walk.
  out.d_bias_i.block<6, 6>(9, 0) = -Eigen::Matrix<double, 6, 6>::Identity();
  out.d_bias_j.block<6, 6>(9, 0) = Eigen::Matrix<double, 6, 6>::Identity();
  return out;
}

NoiseModel imu_noise_model(const PreintegratedImu& delta, const ImuParams& params) {
  if (!(delta.duration > 0.0)) {
    throw std::invalid_argument("imu_noise_model: preintegration duration must be positive");
  }
  Mat15 cov = Mat15::Zero();
  cov.topLeftCorner<9, 9>() = delta.covariance;
  const double T = delta.duration;
  cov.block<3, 3>(9, 9) = Mat3::Identity() * params.accel_bias_sigma * params.accel_bias_sigma * T;
  cov.block<3, 3>(12, 12) = Mat3::Identity() * params.gyro_bias_sigma * params.gyro_bias_sigma * T;
  return NoiseModel(cov);
}

}  // namespace homing
