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

#include "homing/smoother.hpp"

#include <memory>
#include <stdexcept>

namespace homing {

Smoother::Smoother(SmootherOptions options) : options_(std::move(options)) {
  if (options_.realtime_iterations < 1) {
    throw std::invalid_argument("Smoother: realtime_iterations must be positive");
  }
}

void Smoother::initialize_priors(const ChaserPrior& chaser0, const InitBundle& init) {
  if (initialized_) throw std::logic_error("initialize_priors: graph already initialized");
  if (!(init.v_bar >= 0.0)) throw std::invalid_argument("initialize_priors: negative prior speed");

  Values& v = graph_.values();
  v.insert(chaser_key(0), chaser0.state);
  v.insert(bias_key(0), chaser0.bias);
  v.insert(target_key(0), init.x_T0);
  v.insert(speed_key(), TargetSpeed{init.v_bar});
  v.insert(heading_key(), init.theta_hat);

  graph_.add_factor(std::make_shared<PriorFactor>(
      std::vector<VariableKey>{chaser_key(0), bias_key(0)},
      std::vector<Variable>{chaser0.state, chaser0.bias}, NoiseModel(chaser0.covariance)));
  graph_.add_factor(std::make_shared<PriorFactor>(std::vector<VariableKey>{target_key(0)},
                                                  std::vector<Variable>{init.x_T0},
                                                  NoiseModel::Diagonal(init.position_sigma)));
  graph_.add_factor(std::make_shared<PriorFactor>(
      std::vector<VariableKey>{speed_key()}, std::vector<Variable>{TargetSpeed{init.v_bar}},
      NoiseModel::Isotropic(1, init.speed_sigma)));
  graph_.add_factor(std::make_shared<PriorFactor>(std::vector<VariableKey>{heading_key()},
                                                  std::vector<Variable>{init.theta_hat},
                                                  NoiseModel::Isotropic(1, init.heading_sigma)));
  graph_.add_keyframe_time(init.timestamp);
  optimized_ = v;
  initialized_ = true;
}

std::pair<ChaserState, TargetPosition> Smoother::predict_initial_values(const PreintegratedImu& preint,
                                                                        double dt) const {
  if (!initialized_ || graph_.num_keyframes() == 0) {
    throw std::logic_error("predict_initial_values: graph is empty");
  }
  const int k = latest_keyframe();
  const ChaserState chaser = imu_predict(optimized_.get<ChaserState>(chaser_key(k)),
                                         optimized_.get<ImuBias>(bias_key(k)), preint);
  TargetMotionParams params;
  params.speed = optimized_.get<TargetSpeed>(speed_key()).value;
  params.heading = optimized_.get<Heading>(heading_key());
  const TargetPosition target =
      motion_model_predict(optimized_.get<TargetPosition>(target_key(k)), params, dt);
  return {chaser, target};
}

int Smoother::add_keyframe(const RangeBearingMeas& fix, const PreintegratedImu& preint, double depth,
                           const Vec3& velocity_world, double dt) {
  if (!initialized_) throw std::logic_error("add_keyframe: graph not initialized");
  if (!(dt > 0.0)) throw std::invalid_argument("add_keyframe: dt must be positive");
  const double t = fix.timestamp;
  if (!(t > graph_.keyframe_times().back())) {
    throw std::invalid_argument("add_keyframe: non-monotonic keyframe timestamp");
  }

  const int i = latest_keyframe();
  const int j = i + 1;
  const auto [chaser_guess, target_guess] = predict_initial_values(preint, dt);
  const ImuBias bias_guess = optimized_.get<ImuBias>(bias_key(i));

  Values& v = graph_.values();
  v.insert(chaser_key(j), chaser_guess);
  v.insert(target_key(j), target_guess);
  v.insert(bias_key(j), bias_guess);
  optimized_.insert(chaser_key(j), chaser_guess);
  optimized_.insert(target_key(j), target_guess);
  optimized_.insert(bias_key(j), bias_guess);

  graph_.add_factor(std::make_shared<ImuFactor>(i, j, preint, options_.imu));
  graph_.add_factor(std::make_shared<MotionModelFactor>(i, j, dt, options_.motion_sigmas));
  graph_.add_factor(std::make_shared<DepthFactor>(j, depth, options_.depth_sigma));
  graph_.add_factor(std::make_shared<VelocityFactor>(j, velocity_world, options_.dvl_sigma));
  graph_.add_factor(std::make_shared<RangeBearingFactor>(j, fix, options_.usbl));
  graph_.add_keyframe_time(t);
  return j;
}

void Smoother::repreintegrate_stale_factors(int from) {
  const auto& factors = graph_.factors();
  for (std::size_t f = 0; f < factors.size(); ++f) {
    if (factors[f]->kind() != FactorKind::Imu) continue;
    const auto& imu = static_cast<const ImuFactor&>(*factors[f]);
    if (imu.keys()[1].index < from) continue;
    const ImuBias& current = graph_.values().get<ImuBias>(imu.keys()[2]);
    const Vec6 drift = current.vector() - imu.delta().linearization_bias.vector();
    if (drift.lpNorm<Eigen::Infinity>() <= options_.repreintegration_threshold) continue;
    const int i = imu.keys()[0].index;
    const int j = imu.keys()[1].index;
    PreintegratedImu fresh = imu_preintegrate(imu.delta().samples, current, options_.imu);
    graph_.replace_factor(f, std::make_shared<ImuFactor>(i, j, std::move(fresh), options_.imu));
  }
}

KeyframeEstimate Smoother::estimate_at(int k, const Values& values) const {
  KeyframeEstimate e;
  e.timestamp = graph_.keyframe_times().at(static_cast<std::size_t>(k));
  e.chaser = values.get<ChaserState>(chaser_key(k));
  e.target = values.get<TargetPosition>(target_key(k));
  e.bias = values.get<ImuBias>(bias_key(k));
  e.speed = values.get<TargetSpeed>(speed_key()).value;
  e.heading = values.get<Heading>(heading_key());
  return e;
}

EstimateSet Smoother::make_set(EstimateTag tag, const Values& values, const LmResult* result) const {
  EstimateSet s;
  s.tag = tag;
  s.speed = values.get<TargetSpeed>(speed_key()).value;
  s.heading = values.get<Heading>(heading_key());
  s.final_cost = graph_.total_cost(values);
  if (result) s.summary = result->summary;
  for (int k = 0; k < graph_.num_keyframes(); ++k) {
    KeyframeEstimate e = estimate_at(k, values);
    if (result) {
      auto it = result->marginal_diagonals.find(target_key(k));
      if (it != result->marginal_diagonals.end()) e.target_variance = Vec3(it->second);
    }
    s.keyframes.push_back(std::move(e));
  }
  return s;
}

EstimateSet Smoother::optimize(EstimateTag mode) {
  if (!initialized_) throw std::logic_error("optimize: graph not initialized");
  graph_.check_consistency();

  LmOptions lm = options_.smoothed;
  if (mode == EstimateTag::RealTime) {
    lm.max_iterations = options_.realtime_iterations;
    lm.compute_marginals = false;
  }

  LmResult result = levenberg_marquardt(graph_, lm);
  graph_.values() = result.values;
  if (mode == EstimateTag::Smoothed) {
    // Re-linearize the preintegration where the bias moved, then polish.
    // All rounds draw on the same iteration budget.
    int used = result.summary.iterations;
    for (int round = 0; round < 3 && used < options_.smoothed.max_iterations; ++round) {
      const auto before = graph_.factors();
      repreintegrate_stale_factors();
      bool changed = false;
      for (std::size_t f = 0; f < before.size(); ++f) changed = changed || before[f] != graph_.factors()[f];
      if (!changed) break;
      lm.max_iterations = options_.smoothed.max_iterations - used;
      result = levenberg_marquardt(graph_, lm);
      graph_.values() = result.values;
      used += result.summary.iterations;
    }
    result.summary.iterations = used;
  } else {
    // Older intervals are refreshed by the smoothed pass; keep the per-keyframe cost bounded.
    repreintegrate_stale_factors(static_cast<int>(realtime_history_.size()));
  }
  optimized_ = graph_.values();
  last_summary_ = result.summary;
  any_failure_ = any_failure_ || result.summary.failed();

  if (mode == EstimateTag::Smoothed) {
    EstimateSet s = make_set(EstimateTag::Smoothed, graph_.values(), &result);
    s.non_converged = result.summary.failed();
    return s;
  }

  // Causal record: each keyframe as estimated when it was the latest one.
  for (int k = static_cast<int>(realtime_history_.size()); k < graph_.num_keyframes(); ++k) {
    realtime_history_.push_back(estimate_at(k, graph_.values()));
  }
  EstimateSet s;
  s.tag = EstimateTag::RealTime;
  s.keyframes = realtime_history_;
  s.speed = realtime_history_.back().speed;
  s.heading = realtime_history_.back().heading;
  s.final_cost = result.summary.final_cost;
  s.summary = result.summary;
  s.non_converged = any_failure_;
  return s;
}

}  // namespace homing
