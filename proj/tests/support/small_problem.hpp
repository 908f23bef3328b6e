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

// A hand-built homing graph with the production topology: combined chaser and
// bias prior, target/speed/heading priors, and per keyframe IMU, depth, DVL,
// range-bearing and motion-model factors. Measurements come from an analytic
// truth plus seeded perturbations, so the optimum is non-trivial.

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "homing/graph.hpp"

namespace homing::testing {

struct SmallProblem {
  FactorGraph graph;
  Values truth;
};

inline SmallProblem make_small_problem(int keyframes, std::uint64_t seed, double noise = 1.0,
                                       double init_offset = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  const auto nvec = [&](double s) { return Vec3(s * n01(gen), s * n01(gen), s * n01(gen)); };

  const double yaw0 = 0.4, yaw_rate = 0.05;
  const Vec3 p0(0, 0, -10), vel(1.0, 0.2, 0.0);
  const Vec3 target0(40, 30, -12);
  const double speed = 0.5, heading = 0.3;
  const ImuBias bias_true{Vec3(0.02, -0.01, 0.01), Vec3(1e-4, -2e-4, 5e-5)};
  const ImuParams imu;
  const UsblNoiseParams usbl;
  const double dt = 1.0, rate = 100.0;

  const auto chaser_at = [&](double t) {
    return ChaserState{Pose3::FromYawPitchRoll(yaw0 + yaw_rate * t, 0, 0, p0 + vel * t), vel};
  };
  const auto target_at = [&](double t) {
    return TargetPosition{target0 + speed * t * Vec3(std::cos(heading), std::sin(heading), 0)};
  };

  SmallProblem out;
  FactorGraph& g = out.graph;
  Values& v = g.values();

  for (int k = 0; k < keyframes; ++k) {
    const double t = k * dt;
    out.truth.insert(chaser_key(k), chaser_at(t));
    out.truth.insert(target_key(k), target_at(t));
    out.truth.insert(bias_key(k), bias_true);
    Vec9 d;
    d << nvec(0.01 * init_offset), nvec(0.5 * init_offset), nvec(0.05 * init_offset);
    v.insert(chaser_key(k), chaser_retract(chaser_at(t), d));
    v.insert(target_key(k), TargetPosition{target_at(t).position + nvec(2.0 * init_offset)});
    v.insert(bias_key(k), ImuBias{});
    g.add_keyframe_time(t);
  }
  out.truth.insert(speed_key(), TargetSpeed{speed});
  out.truth.insert(heading_key(), Heading(heading));
  v.insert(speed_key(), TargetSpeed{speed + 0.1 * init_offset});
  v.insert(heading_key(), Heading(heading - 0.05 * init_offset));

  Eigen::VectorXd prior_sigmas(15);
  prior_sigmas << 0.01, 0.01, 0.02, 0.5, 0.5, 0.1, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 1e-3, 1e-3, 1e-3;
  Vec9 prior_offset;
  prior_offset << nvec(0.005 * noise), nvec(0.2 * noise), nvec(0.02 * noise);
  g.add_factor(std::make_shared<PriorFactor>(
      std::vector<VariableKey>{chaser_key(0), bias_key(0)},
      std::vector<Variable>{chaser_retract(chaser_at(0), prior_offset),
                            ImuBias{bias_true.accel + nvec(0.02 * noise), bias_true.gyro}},
      NoiseModel::Diagonal(prior_sigmas)));
  g.add_factor(std::make_shared<PriorFactor>(
      std::vector<VariableKey>{target_key(0)},
      std::vector<Variable>{TargetPosition{target0 + nvec(3.0 * noise)}},
      NoiseModel::Diagonal(Vec3(5, 5, 1))));
  g.add_factor(std::make_shared<PriorFactor>(std::vector<VariableKey>{speed_key()},
                                             std::vector<Variable>{TargetSpeed{speed + 0.1 * noise}},
                                             NoiseModel::Isotropic(1, 0.2)));
  g.add_factor(std::make_shared<PriorFactor>(std::vector<VariableKey>{heading_key()},
                                             std::vector<Variable>{Heading(heading + 0.05 * noise)},
                                             NoiseModel::Isotropic(1, 0.1)));

  for (int k = 0; k < keyframes; ++k) {
    const double t = k * dt;
    const ChaserState c = chaser_at(t);
    if (k > 0) {
      std::vector<ImuSample> samples;
      const int n = static_cast<int>(std::lround(dt * rate));
      for (int s = 0; s <= n; ++s) {
        // Level yawing motion at constant world velocity: specific force is +g
        // along body z and the gyro sees the yaw rate.
        samples.push_back({(k - 1) * dt + s / rate,
                           Vec3(0, 0, 9.81) + bias_true.accel + nvec(0.01 * noise),
                           Vec3(0, 0, yaw_rate) + bias_true.gyro + nvec(1e-4 * noise)});
      }
      g.add_factor(std::make_shared<ImuFactor>(k - 1, k, imu_preintegrate(samples, bias_true, imu), imu));
      g.add_factor(std::make_shared<MotionModelFactor>(k - 1, k, dt, Vec3(0.5, 0.5, 0.1)));
    }
    g.add_factor(std::make_shared<DepthFactor>(k, c.pose.translation().z() + 0.01 * noise * n01(gen), 0.01));
    g.add_factor(std::make_shared<VelocityFactor>(k, vel + nvec(0.02 * noise), 0.02));
    const RangeBearing rb = predict_range_bearing(c, target_at(t));
    const RangeBearingMeas z{rb.range + 0.1 * noise * n01(gen),
                             UnitBearing(rb.bearing.direction() + nvec(0.02 * noise)), t};
    g.add_factor(std::make_shared<RangeBearingFactor>(k, z, usbl));
  }
  return out;
}

}  // namespace homing::testing
