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
 * @file pipeline.hpp
 * @brief Replays a measurement stream through the frontend and the smoother.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "homing/config.hpp"
#include "homing/smoother.hpp"
#include "homing/stream.hpp"

namespace homing {

struct PipelineConfig {
  SmootherOptions smoother;
  RansacParams ransac;
  std::uint64_t ransac_seed = 7;
  InitSigmas init_sigmas;
  /// Fixes bundled for initialization; 0 means the RANSAC window size.
  int init_fixes = 0;
  /// Fixes discarded before the gate sees anything.
  int skip_first = 0;

  /// Chaser navigation state at `chaser_time`, used to start dead reckoning.
  ChaserState chaser_start;
  double chaser_time = 0.0;
  /// Prior sigmas on the first keyframe's chaser state and bias.
  double prior_rotation_sigma = 0.01;
  double prior_position_sigma = 1.0;
  double prior_velocity_sigma = 0.05;
  double prior_accel_bias_sigma = 0.05;
  double prior_gyro_bias_sigma = 1e-3;
};

/// Reads every key; throws ConfigError for unknown keys or invalid values.
PipelineConfig pipeline_config_from(const KeyValueConfig& kv);
KeyValueConfig to_key_values(const PipelineConfig& config);

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GateCounts {
  int buffered = 0;
  int accepted = 0;
  int rejected = 0;
  int skipped = 0;
};

struct PipelineResult {
  EstimateSet realtime;
  EstimateSet smoothed;
  /// Every relayed fix in arrival order, with the uncorrected dead-reckoned
  /// chaser position at its arrival time (for the baseline).
  std::vector<UsblFix> raw_fixes;
  std::vector<Vec3> baseline_chaser;
  /// Arrival times of fixes the gate rejected, including those dropped while buffering.
  std::vector<double> rejected_times;
  GateCounts counts;
  double init_time = 0.0;
  /// Final factor graph, holding the smoothed values.
  FactorGraph graph;
};

/// Throws PipelineError when the stream is inconsistent or initialization
/// never completes. Non-convergence is reported through the estimate flags.
PipelineResult run_pipeline(const MeasurementStream& stream, const PipelineConfig& config);

}  // namespace homing
