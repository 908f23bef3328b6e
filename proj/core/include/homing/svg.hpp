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
 * @file svg.hpp
 * @brief Minimal standalone SVG line and bar charts.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "homing/eval.hpp"

namespace homing {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct SvgPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  /// Forces one data unit to span the same length on both axes.
  bool equal_aspect = false;
};

/// Panels are stacked vertically in one document.
void write_line_chart(std::ostream& os, const std::vector<SvgPanel>& panels, double width = 720.0,
                      double panel_height = 320.0);

struct SvgBar {
  std::string label;
  std::string color;
  double value = 0.0;
  double error = 0.0;
};

struct SvgBarGroup {
  std::string title;
  std::vector<SvgBar> bars;
};

/// One panel per group, each with its own vertical scale.
void write_bar_chart(std::ostream& os, const std::vector<SvgBarGroup>& groups, double width = 720.0,
                     double height = 320.0);

/// Top-down overlay of truth and estimated target tracks, plus the chaser path.
void write_trajectory_svg(std::ostream& os, const std::vector<std::pair<std::string, TargetTrack>>& tracks);
void write_error_curves_svg(std::ostream& os, const ErrorReport& report);
void write_error_bars_svg(std::ostream& os, const ErrorReport& report);

std::string kind_color(EstimateKind kind);

}  // namespace homing
