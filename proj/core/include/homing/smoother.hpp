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
 * @file smoother.hpp
 * @brief Keyframe lifecycle of the homing graph: priors, keyframe insertion,
 *        initial-value prediction and real-time or smoothed optimization.
 */

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "homing/frontend.hpp"
#include "homing/graph.hpp"
#include "homing/solver.hpp"

namespace homing {

struct SmootherOptions {
  ImuParams imu;
  UsblNoiseParams usbl;
  double depth_sigma = 0.01;  // m
  double dvl_sigma = 0.02;    // m/s per axis
  Vec3 motion_sigmas{0.5, 0.5, 0.1};
  LmOptions smoothed;
  int realtime_iterations = 5;
  /// Bias change (per component) that triggers re-preintegration of an IMU factor.
  double repreintegration_threshold = 1e-3;
};

/// Prior on the first chaser state and IMU bias; covariance ordered
/// (rotation, position, velocity, accel bias, gyro bias).
struct ChaserPrior {
  ChaserState state;
  ImuBias bias;
  Mat15 covariance = Mat15::Identity();
};

enum class EstimateTag { RealTime, Smoothed };

struct KeyframeEstimate {
  double timestamp = 0.0;
  ChaserState chaser;
  TargetPosition target;
  ImuBias bias;
  double speed = 0.0;
  Heading heading;
  /// Marginal variances of the target position, when requested.
  std::optional<Vec3> target_variance;
};

struct EstimateSet {
  EstimateTag tag = EstimateTag::Smoothed;
  std::vector<KeyframeEstimate> keyframes;
  double speed = 0.0;
  Heading heading;
  double final_cost = 0.0;
  bool non_converged = false;
  LmSummary summary;
};

class Smoother {
 public:
  explicit Smoother(SmootherOptions options = {});

  /// Adds the four prior factors (chaser state with bias, first target
  /// position, speed, heading). Keyframe 0 sits at init.timestamp.
  /// Throws std::logic_error when called twice.
  void initialize_priors(const ChaserPrior& chaser0, const InitBundle& init);

  /// Appends chaser, target and bias variables plus the Imu, MotionModel,
  /// Depth, Velocity and RangeBearing factors. Returns the keyframe id.
  int add_keyframe(const RangeBearingMeas& fix, const PreintegratedImu& preint, double depth,
                   const Vec3& velocity_world, double dt);

  /// Chaser guess from the previous optimum composed with the delta, target
  /// guess from the motion model at the current speed/heading optimum.
  std::pair<ChaserState, TargetPosition> predict_initial_values(const PreintegratedImu& preint,
                                                                double dt) const;

  /// RealTime: bounded LM after the latest keyframe; returns the causal
  /// history. Smoothed: LM to convergence over the full history.
  EstimateSet optimize(EstimateTag mode);

  bool initialized() const { return initialized_; }
  const FactorGraph& graph() const { return graph_; }
  FactorGraph& mutable_graph() { return graph_; }
  const SmootherOptions& options() const { return options_; }
  const Values& optimized_values() const { return optimized_; }
  int latest_keyframe() const { return graph_.num_keyframes() - 1; }

  /// Snapshot of the current values for keyframe k.
  KeyframeEstimate estimate_at(int k, const Values& values) const;

 private:
  /// Re-preintegrates IMU factors ending at keyframe `from` or later whose
  /// bias estimate drifted past the threshold.
  void repreintegrate_stale_factors(int from = 0);
  EstimateSet make_set(EstimateTag tag, const Values& values, const LmResult* result) const;

  SmootherOptions options_;
  FactorGraph graph_;
  Values optimized_;
  bool initialized_ = false;
  std::vector<KeyframeEstimate> realtime_history_;
  LmSummary last_summary_;
  bool any_failure_ = false;
};

}  // namespace homing
