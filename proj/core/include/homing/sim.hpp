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
 * @file sim.hpp
 * @brief Deterministic chaser/target scenarios with analytic ground truth and
 *        synthesized IMU, DVL, depth and relayed USBL records.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homing/stream.hpp"

namespace homing {

enum class ScenarioKind { Perpendicular, Parallel, Adversarial, Custom };

std::string to_string(ScenarioKind kind);
/// Accepts "perpendicular", "parallel", "adversarial", "custom" (case-insensitive).
ScenarioKind parse_scenario_kind(const std::string& name);

/// Straight, level chaser path at constant speed between two waypoints
/// (the path continues past the second waypoint if the run is longer).
struct ChaserPathSpec {
  std::vector<Vec2> waypoints{Vec2(0.0, 0.0), Vec2(1.0, 0.0)};
  double speed = 1.5;
  double depth = -20.0;
};

/// One constant-heading, constant-speed stretch of the target track.
struct TargetSegment {
  double start_time = 0.0;
  double heading = 0.0;  // rad, from +x towards +y
  double speed = 1.0;
};

struct TargetPathSpec {
  Vec2 start = Vec2::Zero();
  double depth = -2.0;
  std::vector<TargetSegment> segments{TargetSegment{}};
};

struct SensorNoise {
  double accel_sigma = 5.9898e-2;  // continuous density
  double gyro_sigma = 1.0471e-5;
  Vec3 accel_bias = Vec3::Zero();  // constant biases added to the IMU
  Vec3 gyro_bias = Vec3::Zero();
  double dvl_sigma = 0.02;
  double depth_sigma = 0.01;
  double usbl_range_sigma = 0.1;
  double usbl_angular_sigma = 0.0175;            // rad, range independent part
  double usbl_angular_sigma_per_meter = 0.0;     // rad/m, scaled by range

  /// All measurement noise switched off.
  static SensorNoise Zero();
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Perpendicular;
  double duration = 300.0;
  double ping_rate = 1.0;
  double imu_rate = 100.0;
  double dvl_rate = 10.0;
  double depth_rate = 10.0;
  ChaserPathSpec chaser;
  TargetPathSpec target;
  SensorNoise noise;
  double relay_delay = 0.0;   // delta_k, s
  double sound_speed = 1500.0;
  bool time_of_flight = true;
  std::uint64_t seed = 1;
};

/// Scenario defaults for a kind. Perpendicular and Parallel use constant
/// target motion; Adversarial adds two 30 degree turns and a 30% speed change.
ScenarioConfig default_scenario(ScenarioKind kind, std::uint64_t seed = 1);

/// Throws std::invalid_argument for an invalid configuration.
void validate(const ScenarioConfig& config);

struct TruthSample {
  double timestamp = 0.0;
  ChaserState chaser;
  Vec3 target = Vec3::Zero();
  double target_heading = 0.0;
  double target_speed = 0.0;
};

/// Analytic scenario evaluated at arbitrary times; `samples` holds the IMU grid.
class GroundTruth {
 public:
  explicit GroundTruth(ScenarioConfig config);

  TruthSample at(double t) const;
  Vec3 chaser_position(double t) const;
  Vec3 target_position(double t) const;
  const TargetSegment& target_segment(double t) const;

  const ScenarioConfig& config() const { return config_; }
  const std::vector<TruthSample>& samples() const { return samples_; }

 private:
  ScenarioConfig config_;
  Vec2 chaser_dir_ = Vec2::UnitX();
  std::vector<Vec2> segment_starts_;
  std::vector<TruthSample> samples_;
};

GroundTruth generate_truth(const ScenarioConfig& config);

/// IMU on the sample grid, DVL/depth at their rates, one relayed fix per ping.
MeasurementStream synthesize_measurements(const GroundTruth& truth, const ScenarioConfig& config);

/// Indices (into the stream) of the USBL records that were displaced.
struct OutlierInjection {
  MeasurementStream stream;
  std::vector<std::size_t> displaced;
};

/// Displaces round(fraction * fixes) seeded fixes perpendicular to the target
/// track by a distance in [magnitude, 1.5 magnitude).
OutlierInjection inject_outliers(const MeasurementStream& stream, const GroundTruth& truth,
                                 double fraction, double magnitude, std::uint64_t seed);

/// Writes time, chaser pose/velocity and target state as CSV.
void save_truth_csv(const std::string& path, const GroundTruth& truth, double rate_hz);

struct TruthTrack {
  std::vector<double> time;
  std::vector<Vec3> target;
  std::vector<double> heading;
  std::vector<double> speed;
  std::vector<Vec3> chaser;

  /// Linear interpolation of the target state; heading interpolated on the circle.
  TruthSample interpolate(double t) const;
};

TruthTrack load_truth_csv(const std::string& path);

}  // namespace homing
