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
 * @file stream.hpp
 * @brief Time-ordered sensor record stream and its line-oriented text format.
 *
 * One record per line:
 *   IMU   t ax ay az gx gy gz
 *   DVL   t vx vy vz
 *   DEPTH t z
 *   USBL  t x y z measured_at
 * Numbers use the shortest representation that round-trips exactly.
 */

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "homing/frontend.hpp"
#include "homing/imu.hpp"

namespace homing {

struct DepthRecord {
  double timestamp = 0.0;
  double z = 0.0;  // world z, negative below the surface
};

struct DvlRecord {
  double timestamp = 0.0;
  Vec3 velocity_body = Vec3::Zero();
};

using MeasurementRecord = std::variant<ImuSample, DvlRecord, DepthRecord, UsblFix>;
using MeasurementStream = std::vector<MeasurementRecord>;

double record_time(const MeasurementRecord& r);

/// Orders by time, then IMU, DVL, depth, USBL. Stable for equal keys.
void sort_stream(MeasurementStream& stream);

class StreamParseError : public std::runtime_error {
 public:
  StreamParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_double(double v);

void write_stream(std::ostream& os, const MeasurementStream& stream);
/// Throws StreamParseError naming the offending line.
MeasurementStream read_stream(std::istream& is);

void save_stream(const std::string& path, const MeasurementStream& stream);
MeasurementStream load_stream(const std::string& path);

}  // namespace homing
