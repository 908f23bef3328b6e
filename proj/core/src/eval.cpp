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

#include "homing/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "homing/stream.hpp"

namespace homing {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<double> parse_row(const std::string& line, std::size_t n, std::size_t skip) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string tok;
  std::size_t col = 0;
  while (std::getline(ss, tok, ',')) {
    if (col++ < skip) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw EvalError("line " + std::to_string(n) + ": invalid number '" + tok + "'");
    }
  }
  return v;
}

std::string first_field(const std::string& line) { return line.substr(0, line.find(',')); }

}  // namespace

TargetTrack track_from(const EstimateSet& estimates) {
  TargetTrack tr;
  for (const auto& k : estimates.keyframes) {
    tr.time.push_back(k.timestamp);
    tr.position.push_back(k.target.position);
    tr.speed.push_back(k.speed);
    tr.heading.push_back(k.heading.radians());
    tr.chaser.push_back(k.chaser.pose.translation());
  }
  return tr;
}

TargetTrack sample_truth(const TruthTrack& truth, std::span<const double> times) {
  TargetTrack tr;
  for (double t : times) {
    const TruthSample s = truth.interpolate(t);
    tr.time.push_back(t);
    tr.position.push_back(s.target);
    tr.speed.push_back(s.target_speed);
    tr.heading.push_back(s.target_heading);
    tr.chaser.push_back(s.chaser.pose.translation());
  }
  return tr;
}

TargetTrack sample_truth(const GroundTruth& truth, std::span<const double> times) {
  TargetTrack tr;
  for (double t : times) {
    const TruthSample s = truth.at(t);
    tr.time.push_back(t);
    tr.position.push_back(s.target);
    tr.speed.push_back(s.target_speed);
    tr.heading.push_back(s.target_heading);
    tr.chaser.push_back(s.chaser.pose.translation());
  }
  return tr;
}

TargetTrack anchor_track(const TargetTrack& estimated, const TargetTrack& truth) {
  if (estimated.empty() || truth.empty()) throw EvalError("anchor_track: empty track");
  const Vec3 offset = estimated.position.front() - truth.position.front();
  TargetTrack out = estimated;
  for (auto& p : out.position) p -= offset;
  // e - (e - t) can miss t by an ulp; the first sample is the anchor by definition.
  out.position.front() = truth.position.front();
  return out;
}

TargetTrack dead_reckon_target(std::span<const UsblFix> fixes, std::span<const Vec3> chaser_positions) {
  if (fixes.size() < 2) throw EvalError("dead_reckon_target: need at least 2 fixes");
  if (fixes.size() != chaser_positions.size()) {
    throw EvalError("dead_reckon_target: fix and chaser counts differ");
  }
  TargetTrack tr;
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    tr.time.push_back(fixes[i].timestamp);
    tr.position.push_back(chaser_positions[i] - fixes[i].vector);
    tr.chaser.push_back(chaser_positions[i]);
  }
  tr.speed.resize(fixes.size());
  tr.heading.resize(fixes.size());
  for (std::size_t i = 1; i < fixes.size(); ++i) {
    const Vec2 d = (tr.position[i] - tr.position[i - 1]).head<2>();
    const double dt = tr.time[i] - tr.time[i - 1];
    if (dt <= 0.0) throw EvalError("dead_reckon_target: fix timestamps must increase");
    tr.speed[i] = d.norm() / dt;
    tr.heading[i] = std::atan2(d.y(), d.x());
  }
  tr.speed[0] = tr.speed[1];
  tr.heading[0] = tr.heading[1];
  return tr;
}

std::string to_string(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::RealTime: return "realtime";
    case EstimateKind::Smoothed: return "smoothed";
    case EstimateKind::DeadReckoned: return "deadreckoned";
  }
  return "unknown";
}

EstimateKind parse_estimate_kind(const std::string& name) {
  for (auto k : {EstimateKind::RealTime, EstimateKind::Smoothed, EstimateKind::DeadReckoned}) {
    if (to_string(k) == name) return k;
  }
  throw EvalError("unknown estimate kind '" + name + "'");
}

ErrorStats error_stats(std::span<const double> values) {
  ErrorStats s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

double heading_error_deg(double estimate_rad, double truth_rad) {
  return std::abs(wrap_angle(estimate_rad - truth_rad)) * kRadToDeg;
}

ErrorSeries compute_errors(EstimateKind kind, const TargetTrack& anchored, const TargetTrack& truth) {
  if (anchored.size() != truth.size()) {
    throw EvalError("compute_errors: " + std::to_string(anchored.size()) + " estimates vs " +
                    std::to_string(truth.size()) + " truth samples");
  }
  ErrorSeries e;
  e.kind = kind;
  for (std::size_t i = 0; i < anchored.size(); ++i) {
    e.time.push_back(anchored.time[i]);
    e.position.push_back((anchored.position[i] - truth.position[i]).norm());
    e.speed.push_back(std::abs(anchored.speed[i] - truth.speed[i]));
    e.heading_deg.push_back(heading_error_deg(anchored.heading[i], truth.heading[i]));
  }
  return e;
}

const ErrorSeries* ErrorReport::find(EstimateKind kind) const {
  for (const auto& s : series) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

ErrorReport evaluate_tracks(const std::vector<std::pair<EstimateKind, TargetTrack>>& tracks,
                            const TruthTrack& truth) {
  ErrorReport r;
  for (const auto& [kind, track] : tracks) {
    const TargetTrack ref = sample_truth(truth, track.time);
    r.series.push_back(compute_errors(kind, anchor_track(track, ref), ref));
  }
  return r;
}

void write_track_csv(std::ostream& os, const TargetTrack& tr) {
  os << "t,x,y,z,speed,heading,chaser_x,chaser_y,chaser_z\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Vec3 c = i < tr.chaser.size() ? tr.chaser[i] : Vec3::Zero();
    os << format_double(tr.time[i]) << ',' << format_double(tr.position[i].x()) << ','
       << format_double(tr.position[i].y()) << ',' << format_double(tr.position[i].z()) << ','
       << format_double(tr.speed[i]) << ',' << format_double(tr.heading[i]) << ',' << format_double(c.x())
       << ',' << format_double(c.y()) << ',' << format_double(c.z()) << '\n';
  }
}

TargetTrack read_track_csv(std::istream& is) {
  TargetTrack tr;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    const auto v = parse_row(line, n, 0);
    if (v.size() != 9) throw EvalError("line " + std::to_string(n) + ": expected 9 columns");
    tr.time.push_back(v[0]);
    tr.position.emplace_back(v[1], v[2], v[3]);
    tr.speed.push_back(v[4]);
    tr.heading.push_back(v[5]);
    tr.chaser.emplace_back(v[6], v[7], v[8]);
  }
  return tr;
}

void save_track_csv(const std::string& path, const TargetTrack& track) {
  std::ofstream os(path);
  if (!os) throw EvalError("cannot write " + path);
  write_track_csv(os, track);
}

TargetTrack load_track_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw EvalError("cannot open " + path);
  try {
    return read_track_csv(is);
  } catch (const EvalError& e) {
    throw EvalError(path + ": " + e.what());
  }
}

void write_errors_csv(std::ostream& os, const ErrorReport& report) {
  os << "kind,t,position_error,speed_error,heading_error_deg\n";
  for (const auto& s : report.series) {
    for (std::size_t i = 0; i < s.time.size(); ++i) {
      os << to_string(s.kind) << ',' << format_double(s.time[i]) << ',' << format_double(s.position[i]) << ','
         << format_double(s.speed[i]) << ',' << format_double(s.heading_deg[i]) << '\n';
    }
  }
}

ErrorReport read_errors_csv(std::istream& is) {
  ErrorReport r;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    const EstimateKind kind = parse_estimate_kind(first_field(line));
    const auto v = parse_row(line, n, 1);
    if (v.size() != 4) throw EvalError("line " + std::to_string(n) + ": expected 5 columns");
    if (r.series.empty() || r.series.back().kind != kind) {
      r.series.push_back({});
      r.series.back().kind = kind;
    }
    auto& s = r.series.back();
    s.time.push_back(v[0]);
    s.position.push_back(v[1]);
    s.speed.push_back(v[2]);
    s.heading_deg.push_back(v[3]);
  }
  return r;
}

void write_summary_csv(std::ostream& os, const ErrorReport& report) {
  os << "kind,samples,position_mean,position_std,speed_mean,speed_std,heading_mean_deg,heading_std_deg\n";
  for (const auto& s : report.series) {
    const auto p = s.position_stats(), v = s.speed_stats(), h = s.heading_stats();
    os << to_string(s.kind) << ',' << s.time.size() << ',' << format_double(p.mean) << ','
       << format_double(p.stddev) << ',' << format_double(v.mean) << ',' << format_double(v.stddev) << ','
       << format_double(h.mean) << ',' << format_double(h.stddev) << '\n';
  }
}

void write_report_text(std::ostream& os, const ErrorReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %8s  %-21s %-21s %-21s\n", "estimate", "samples", "position [m]",
                "speed [m/s]", "heading [deg]");
  os << buf;
  for (const auto& s : report.series) {
    const auto p = s.position_stats(), v = s.speed_stats(), h = s.heading_stats();
    std::snprintf(buf, sizeof buf, "%-14s %8zu  %9.3f +- %-8.3f %9.3f +- %-8.3f %9.3f +- %-8.3f\n",
                  to_string(s.kind).c_str(), s.time.size(), p.mean, p.stddev, v.mean, v.stddev, h.mean,
                  h.stddev);
    os << buf;
  }
}

}  // namespace homing
