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
 * @file frontend.hpp
 * @brief Measurement preprocessing: RANSAC line gating of relayed USBL
 *        fixes, target initialization, keyframe bundling and chaser
 *        dead reckoning.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "homing/factors.hpp"
#include "homing/imu.hpp"

namespace homing {

struct RansacParams {
  int window = 8;            // M
  double threshold = 5.0;    // d, metres
  int iterations = 50;
  int min_inliers = 5;       // ceil(0.6 * M)
  /// Gate on the 3D distance to a 3D line instead of the horizontal projection.
  bool use_3d_cylinder = false;
  /// Consecutive rejections after which the window is rebuilt from the
  /// rejected fixes, provided they reach line consensus themselves; 0
  /// disables the rebuild.
  int max_consecutive_rejections = 8;
};

void validate(const RansacParams& params);

struct LineModel2D {
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();
};

struct LineModel3D {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
};

/// Sample-consensus line fit refined by total least squares over the inliers.
/// Deterministic for a given seed; throws std::invalid_argument for < 2 points.
LineModel2D fit_line_ransac(std::span<const Vec2> points, const RansacParams& params, std::uint64_t seed);
LineModel3D fit_line_ransac(std::span<const Vec3> points, const RansacParams& params, std::uint64_t seed);

double point_line_distance(const LineModel2D& line, const Vec2& p);
double point_line_distance(const LineModel3D& line, const Vec3& p);

enum class FixClass { Inlier, Outlier };

FixClass classify_fix(const LineModel2D& line, const Vec2& fix_xy, double d);

struct TimedPosition {
  double timestamp = 0.0;
  Vec3 position = Vec3::Zero();
};

/// Relayed USBL fix: world-frame vector from the target to the chaser.
struct UsblFix {
  double timestamp = 0.0;    // delivery time at the chaser
  double measured_at = 0.0;  // time the target measured the fix
  Vec3 vector = Vec3::Zero();
};

/// Converts a relayed fix into a body-frame range/bearing measurement.
RangeBearingMeas fix_to_range_bearing(const UsblFix& fix, const Pose3& chaser_estimate);

enum class GateStatus { Accepted, Rejected, Buffering };

struct GateResult {
  GateStatus status = GateStatus::Buffering;
  RangeBearingMeas measurement;
  Vec3 target_world = Vec3::Zero();
  /// Timestamps of buffered fixes dropped when the window was first screened.
  std::vector<double> evicted;
};

/// Sliding-window RANSAC gate over target world positions implied by the
/// fixes. The window holds accepted fixes only. When the window first fills,
/// buffered fixes that disagree with the consensus line are dropped and
/// buffering continues until M consistent fixes are held.
class FixGate {
 public:
  FixGate(RansacParams params, std::uint64_t seed);

  /// Throws std::invalid_argument for non-increasing timestamps.
  GateResult process_fix(const UsblFix& fix, const Pose3& chaser_estimate);

  const std::deque<TimedPosition>& window() const { return window_; }
  const RansacParams& params() const { return params_; }

 private:
  RansacParams params_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  std::optional<double> last_time_;
  bool screened_ = false;
  std::deque<TimedPosition> window_;
  std::deque<TimedPosition> rejected_;
};

/// Prior information for the target derived from the first fixes.
struct InitBundle {
  TargetPosition x_T0;
  double v_bar = 0.0;
  Heading theta_hat;
  double timestamp = 0.0;
  Vec3 position_sigma{10.0, 10.0, 10.0};
  double speed_sigma = 1.0;
  double heading_sigma = 0.5;
};

struct InitSigmas {
  Vec3 position{10.0, 10.0, 10.0};
  double speed = 1.0;
  double heading = 0.5;
};

/// Heading from the fitted line (sign from chronological displacement), mean
/// horizontal speed over consecutive line inliers, and the last fix as the
/// initial position.
/// Throws std::invalid_argument for fewer than two fixes or non-increasing timestamps.
InitBundle initialize_target(std::span<const TimedPosition> fixes, const RansacParams& params,
                             const InitSigmas& sigmas = {}, std::uint64_t seed = 0);

/// Everything a keyframe needs from the chaser sensors.
struct KeyframeInputs {
  PreintegratedImu preintegrated;
  double depth = 0.0;         // z in the world frame (negative below the surface)
  Vec3 velocity_world = Vec3::Zero();
  double dt = 0.0;
};

/// Buffers IMU, depth and DVL data between keyframes.
class KeyframeBundler {
 public:
  void add_imu(const ImuSample& s);
  void add_depth(double timestamp, double z);
  void add_dvl(double timestamp, const Vec3& v_body);

  /// Starts the first interval at `t` without producing a bundle.
  void start(double t);

  /// Preintegrates the buffered IMU data up to `t` (holding the last sample
  /// if it precedes `t`), attaches the latest depth and world-frame DVL
  /// velocity, and starts the next interval at `t`. Throws std::runtime_error
  /// when no IMU sample arrived since the last keyframe or when depth or DVL
  /// data has never been received.
  KeyframeInputs bundle(double t, const Mat3& rotation_estimate, const ImuBias& bias,
                        const ImuParams& params);

  bool started() const { return start_time_.has_value(); }
  std::optional<double> latest_depth() const { return depth_; }
  std::optional<Vec3> latest_dvl() const { return dvl_; }

 private:
  std::vector<ImuSample> imu_;
  std::optional<ImuSample> carry_;
  std::optional<double> start_time_;
  std::optional<double> depth_;
  std::optional<Vec3> dvl_;
  int fresh_imu_ = 0;
};

/// Integrates gyro rates, DVL velocities and depth without absolute corrections.
class DeadReckoner {
 public:
  DeadReckoner() = default;
  DeadReckoner(const ChaserState& initial, double timestamp);

  void reset(const ChaserState& state, double timestamp, const ImuBias& bias = {});
  void add_imu(const ImuSample& s);
  void add_dvl(double timestamp, const Vec3& v_body);
  void add_depth(double timestamp, double z);

  const ChaserState& state() const { return state_; }
  double timestamp() const { return time_; }

 private:
  ChaserState state_;
  ImuBias bias_;
  double time_ = 0.0;
  std::optional<ImuSample> last_imu_;
  std::optional<Vec3> v_body_;
};

}  // namespace homing
