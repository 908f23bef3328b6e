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
 * @file eval.hpp
 * @brief Target-track error metrics against ground truth.
 *
 * Estimated tracks are anchored (their initial offset from the truth removed)
 * before errors are computed. Heading errors are wrapped into [0, 180] degrees.
 */

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homing/frontend.hpp"
#include "homing/sim.hpp"
#include "homing/smoother.hpp"

namespace homing {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Target state per sample; `chaser` is optional context for plots.
struct TargetTrack {
  std::vector<double> time;
  std::vector<Vec3> position;
  std::vector<double> speed;
  std::vector<double> heading;  // rad
  std::vector<Vec3> chaser;

  std::size_t size() const { return time.size(); }
  bool empty() const { return time.empty(); }
};

TargetTrack track_from(const EstimateSet& estimates);

/// Truth resampled at the given times.
TargetTrack sample_truth(const TruthTrack& truth, std::span<const double> times);
TargetTrack sample_truth(const GroundTruth& truth, std::span<const double> times);

/// Shifts every estimated position by truth[0] - estimated[0].
TargetTrack anchor_track(const TargetTrack& estimated, const TargetTrack& truth);

/// Raw fixes reprojected through the chaser dead-reckoning; speed and heading
/// from consecutive fix pairs (the first sample reuses the first pair).
TargetTrack dead_reckon_target(std::span<const UsblFix> fixes, std::span<const Vec3> chaser_positions);

enum class EstimateKind { RealTime, Smoothed, DeadReckoned };
std::string to_string(EstimateKind kind);
EstimateKind parse_estimate_kind(const std::string& name);

struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

ErrorStats error_stats(std::span<const double> values);

struct ErrorSeries {
  EstimateKind kind = EstimateKind::Smoothed;
  std::vector<double> time;
  std::vector<double> position;     // m
  std::vector<double> speed;        // m/s
  std::vector<double> heading_deg;  // [0, 180]

  ErrorStats position_stats() const { return error_stats(position); }
  ErrorStats speed_stats() const { return error_stats(speed); }
  ErrorStats heading_stats() const { return error_stats(heading_deg); }
};

/// Absolute heading difference in degrees after wrapping.
double heading_error_deg(double estimate_rad, double truth_rad);

/// Per-sample errors; the tracks must already be aligned sample by sample.
ErrorSeries compute_errors(EstimateKind kind, const TargetTrack& anchored, const TargetTrack& truth);

struct ErrorReport {
  std::vector<ErrorSeries> series;

  const ErrorSeries* find(EstimateKind kind) const;
};

/// Samples the truth at each track's times, anchors, and computes errors.
ErrorReport evaluate_tracks(const std::vector<std::pair<EstimateKind, TargetTrack>>& tracks,
                            const TruthTrack& truth);

void write_track_csv(std::ostream& os, const TargetTrack& track);
TargetTrack read_track_csv(std::istream& is);
void save_track_csv(const std::string& path, const TargetTrack& track);
TargetTrack load_track_csv(const std::string& path);

void write_errors_csv(std::ostream& os, const ErrorReport& report);
void write_summary_csv(std::ostream& os, const ErrorReport& report);
void write_report_text(std::ostream& os, const ErrorReport& report);
ErrorReport read_errors_csv(std::istream& is);

}  // namespace homing
