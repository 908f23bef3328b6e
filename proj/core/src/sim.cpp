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

#include "homing/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace homing {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

/// Independent generator per sensor so that changing one noise source leaves the others intact.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id)};
  return std::mt19937_64(seq);
}

/// Standard normal draw built on the raw generator, so sequences do not depend
/// on the standard library's distribution implementation.
double gaussian(std::mt19937_64& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(rng() >> 11) * kScale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(rng() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

Vec3 gaussian3(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return Vec3::Zero();
  const double a = gaussian(rng);
  const double b = gaussian(rng);
  const double c = gaussian(rng);
  return sigma * Vec3(a, b, c);
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Perpendicular: return "perpendicular";
    case ScenarioKind::Parallel: return "parallel";
    case ScenarioKind::Adversarial: return "adversarial";
    case ScenarioKind::Custom: return "custom";
  }
  return "custom";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "perpendicular") return ScenarioKind::Perpendicular;
  if (s == "parallel") return ScenarioKind::Parallel;
  if (s == "adversarial") return ScenarioKind::Adversarial;
  if (s == "custom") return ScenarioKind::Custom;
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

SensorNoise SensorNoise::Zero() {
  SensorNoise n;
  n.accel_sigma = 0.0;
  n.gyro_sigma = 0.0;
  n.dvl_sigma = 0.0;
  n.depth_sigma = 0.0;
  n.usbl_range_sigma = 0.0;
  n.usbl_angular_sigma = 0.0;
  n.usbl_angular_sigma_per_meter = 0.0;
  return n;
}

ScenarioConfig default_scenario(ScenarioKind kind, std::uint64_t seed) {
  ScenarioConfig c;
  c.kind = kind;
  c.seed = seed;
  switch (kind) {
    case ScenarioKind::Perpendicular:
    case ScenarioKind::Custom:
      c.chaser.waypoints = {Vec2(-600.0, 0.0), Vec2(600.0, 0.0)};
      c.chaser.speed = 2.0;
      c.chaser.depth = -30.0;
      c.target.start = Vec2(0.0, -400.0);
      c.target.depth = -2.0;
      c.target.segments = {TargetSegment{0.0, 90.0 * kDeg, 1.5}};
      break;
    case ScenarioKind::Parallel:
      c.chaser.waypoints = {Vec2(0.0, 0.0), Vec2(1000.0, 0.0)};
      c.chaser.speed = 1.5;
      c.chaser.depth = -30.0;
      c.target.start = Vec2(-300.0, 150.0);
      c.target.depth = -2.0;
      c.target.segments = {TargetSegment{0.0, 0.0, 3.0}};
      break;
    case ScenarioKind::Adversarial:
      c.chaser.waypoints = {Vec2(-600.0, 0.0), Vec2(600.0, 0.0)};
      c.chaser.speed = 2.0;
      c.chaser.depth = -30.0;
      c.target.start = Vec2(0.0, -400.0);
      c.target.depth = -2.0;
      c.target.segments = {TargetSegment{0.0, 90.0 * kDeg, 1.5},
                           TargetSegment{100.0, 120.0 * kDeg, 1.5},
                           TargetSegment{150.0, 120.0 * kDeg, 1.95},
                           TargetSegment{200.0, 90.0 * kDeg, 1.95}};
      break;
  }
  return c;
}

void validate(const ScenarioConfig& c) {
  if (!(c.duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(c.ping_rate > 0.0)) throw std::invalid_argument("scenario: ping_rate must be positive");
  if (!(c.imu_rate > 0.0) || !(c.dvl_rate > 0.0) || !(c.depth_rate > 0.0)) {
    throw std::invalid_argument("scenario: sensor rates must be positive");
  }
  if (c.chaser.waypoints.size() != 2) {
    throw std::invalid_argument("scenario: chaser path needs exactly two waypoints");
  }
  if (!((c.chaser.waypoints[1] - c.chaser.waypoints[0]).norm() > 0.0)) {
    throw std::invalid_argument("scenario: chaser waypoints coincide");
  }
  if (!(c.chaser.speed >= 0.0)) throw std::invalid_argument("scenario: chaser speed must be non-negative");
  if (c.target.segments.empty() || c.target.segments.front().start_time != 0.0) {
    throw std::invalid_argument("scenario: target segments must start at t = 0");
  }
  for (std::size_t k = 0; k < c.target.segments.size(); ++k) {
    if (!(c.target.segments[k].speed >= 0.0)) {
      throw std::invalid_argument("scenario: target speed must be non-negative");
    }
    if (k > 0 && !(c.target.segments[k].start_time > c.target.segments[k - 1].start_time)) {
      throw std::invalid_argument("scenario: target segments must be time ordered");
    }
  }
  if (!(c.relay_delay >= 0.0)) throw std::invalid_argument("scenario: relay delay must be non-negative");
  if (!(c.sound_speed > 0.0)) throw std::invalid_argument("scenario: sound speed must be positive");
}

GroundTruth::GroundTruth(ScenarioConfig config) : config_(std::move(config)) {
  validate(config_);
  chaser_dir_ = (config_.chaser.waypoints[1] - config_.chaser.waypoints[0]).normalized();

  Vec2 p = config_.target.start;
  const auto& segs = config_.target.segments;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    segment_starts_.push_back(p);
    if (k + 1 < segs.size()) {
      const double T = segs[k + 1].start_time - segs[k].start_time;
      p += segs[k].speed * T * Vec2(std::cos(segs[k].heading), std::sin(segs[k].heading));
    }
  }

  const auto n = static_cast<long long>(std::floor(config_.duration * config_.imu_rate + 1e-9));
  samples_.reserve(static_cast<std::size_t>(n + 1));
  for (long long k = 0; k <= n; ++k) {
    samples_.push_back(at(static_cast<double>(k) / config_.imu_rate));
  }
}

const TargetSegment& GroundTruth::target_segment(double t) const {
  const auto& segs = config_.target.segments;
  std::size_t k = 0;
  while (k + 1 < segs.size() && t >= segs[k + 1].start_time) ++k;
  return segs[k];
}

Vec3 GroundTruth::target_position(double t) const {
  const auto& segs = config_.target.segments;
  std::size_t k = 0;
  while (k + 1 < segs.size() && t >= segs[k + 1].start_time) ++k;
  const double tau = t - segs[k].start_time;
  const Vec2 xy = segment_starts_[k] +
                  segs[k].speed * tau * Vec2(std::cos(segs[k].heading), std::sin(segs[k].heading));
  return Vec3(xy.x(), xy.y(), config_.target.depth);
}

Vec3 GroundTruth::chaser_position(double t) const {
  const Vec2 xy = config_.chaser.waypoints[0] + config_.chaser.speed * t * chaser_dir_;
  return Vec3(xy.x(), xy.y(), config_.chaser.depth);
}

TruthSample GroundTruth::at(double t) const {
  TruthSample s;
  s.timestamp = t;
  const double yaw = std::atan2(chaser_dir_.y(), chaser_dir_.x());
  s.chaser.pose = Pose3::FromYawPitchRoll(yaw, 0.0, 0.0, chaser_position(t));
  s.chaser.velocity = config_.chaser.speed * Vec3(chaser_dir_.x(), chaser_dir_.y(), 0.0);
  s.target = target_position(t);
  const TargetSegment& seg = target_segment(t);
  s.target_heading = wrap_angle(seg.heading);
  s.target_speed = seg.speed;
  return s;
}

GroundTruth generate_truth(const ScenarioConfig& config) { return GroundTruth(config); }

MeasurementStream synthesize_measurements(const GroundTruth& truth, const ScenarioConfig& config) {
  validate(config);
  const SensorNoise& nz = config.noise;
  MeasurementStream out;

  // IMU: level, constant-velocity chaser, so the specific force is gravity
  // reaction and the body rate is zero.
  {
    std::mt19937_64 rng = make_rng(config.seed, 1);
    const double dt = 1.0 / config.imu_rate;
    const double sa = nz.accel_sigma / std::sqrt(dt);
    const double sg = nz.gyro_sigma / std::sqrt(dt);
    const Vec3 g(0.0, 0.0, -9.81);
    for (const auto& s : truth.samples()) {
      const Mat3& R = s.chaser.pose.rotation();
      ImuSample m;
      m.timestamp = s.timestamp;
      m.accel = R.transpose() * (Vec3::Zero() - g) + nz.accel_bias + gaussian3(rng, sa);
      m.gyro = Vec3::Zero() + nz.gyro_bias + gaussian3(rng, sg);
      out.emplace_back(m);
    }
  }
  // DVL and depth.
  {
    std::mt19937_64 rng = make_rng(config.seed, 2);
    const auto n = static_cast<long long>(std::floor(config.duration * config.dvl_rate + 1e-9));
    for (long long k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / config.dvl_rate;
      const TruthSample s = truth.at(t);
      const Vec3 v_body = s.chaser.pose.rotation().transpose() * s.chaser.velocity;
      out.emplace_back(DvlRecord{t, v_body + gaussian3(rng, nz.dvl_sigma)});
    }
  }
  {
    std::mt19937_64 rng = make_rng(config.seed, 3);
    const auto n = static_cast<long long>(std::floor(config.duration * config.depth_rate + 1e-9));
    for (long long k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / config.depth_rate;
      const double noise = nz.depth_sigma == 0.0 ? 0.0 : nz.depth_sigma * gaussian(rng);
      out.emplace_back(DepthRecord{t, truth.chaser_position(t).z() + noise});
    }
  }
  // Relayed USBL: the target pings, the chaser replies, the target measures
  // the reply and relays the world-frame fix after delta_k seconds.
  {
    std::mt19937_64 rng = make_rng(config.seed, 4);
    const double c = config.sound_speed;
    for (long long k = 0;; ++k) {
      const double t_ping = static_cast<double>(k) / config.ping_rate;
      if (t_ping > config.duration) break;
      double t_reply = t_ping;
      double t_meas = t_ping;
      if (config.time_of_flight) {
        for (int it = 0; it < 5; ++it) {
          t_reply = t_ping + (truth.chaser_position(t_reply) - truth.target_position(t_ping)).norm() / c;
        }
        t_meas = t_reply;
        for (int it = 0; it < 5; ++it) {
          t_meas = t_reply + (truth.chaser_position(t_reply) - truth.target_position(t_meas)).norm() / c;
        }
      }
      const double t_deliver = t_meas + config.relay_delay;
      if (t_deliver > config.duration) break;

      Vec3 u = truth.chaser_position(t_reply) - truth.target_position(t_meas);
      const double r = u.norm();
      const double sigma_ang = nz.usbl_angular_sigma + nz.usbl_angular_sigma_per_meter * r;
      const double e_r = gaussian(rng);
      const double e_az = gaussian(rng);
      const double e_el = gaussian(rng);
      if (nz.usbl_range_sigma != 0.0 || sigma_ang != 0.0) {
        // Spherical noise in the target frame; the relayed vector is already world aligned.
        const double az = std::atan2(u.y(), u.x()) + sigma_ang * e_az;
        const double el = std::asin(std::clamp(u.z() / r, -1.0, 1.0)) + sigma_ang * e_el;
        const double rn = r + nz.usbl_range_sigma * e_r;
        u = rn * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      }
      out.emplace_back(UsblFix{t_deliver, t_meas, u});
    }
  }
  sort_stream(out);
  return out;
}

OutlierInjection inject_outliers(const MeasurementStream& stream, const GroundTruth& truth,
                                 double fraction, double magnitude, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("inject_outliers: fraction must lie in [0, 1)");
  }
  OutlierInjection out;
  out.stream = stream;
  std::vector<std::size_t> fixes;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (std::holds_alternative<UsblFix>(stream[i])) fixes.push_back(i);
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(fixes.size())));
  if (count == 0) return out;

  std::mt19937_64 rng = make_rng(seed, 5);
  // Partial Fisher-Yates on the raw generator for a library-independent choice.
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t span = fixes.size() - k;
    const std::size_t j = k + static_cast<std::size_t>(rng() % span);
    std::swap(fixes[k], fixes[j]);
  }
  std::vector<std::size_t> chosen(fixes.begin(), fixes.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t idx : chosen) {
    auto& fix = std::get<UsblFix>(out.stream[idx]);
    const double heading = truth.target_segment(fix.measured_at).heading;
    const Vec3 normal(-std::sin(heading), std::cos(heading), 0.0);
    const double sign = (rng() & 1U) ? 1.0 : -1.0;
    const double dist = magnitude * (1.0 + 0.5 * uniform01(rng));
    // Target displaced by +dist * normal, so the target-to-chaser vector moves the other way.
    fix.vector -= sign * dist * normal;
  }
  out.displaced = std::move(chosen);
  return out;
}

void save_truth_csv(const std::string& path, const GroundTruth& truth, double rate_hz) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const auto f = format_double;
  os << "t,chaser_x,chaser_y,chaser_z,chaser_yaw,chaser_pitch,chaser_roll,chaser_vx,chaser_vy,chaser_vz,"
        "target_x,target_y,target_z,target_heading,target_speed\n";
  const auto n = static_cast<long long>(std::floor(truth.config().duration * rate_hz + 1e-9));
  for (long long k = 0; k <= n; ++k) {
    const TruthSample s = truth.at(static_cast<double>(k) / rate_hz);
    const Pose3& P = s.chaser.pose;
    os << f(s.timestamp) << ',' << f(P.translation().x()) << ',' << f(P.translation().y()) << ','
       << f(P.translation().z()) << ',' << f(P.yaw()) << ',' << f(P.pitch()) << ',' << f(P.roll()) << ','
       << f(s.chaser.velocity.x()) << ',' << f(s.chaser.velocity.y()) << ',' << f(s.chaser.velocity.z())
       << ',' << f(s.target.x()) << ',' << f(s.target.y()) << ',' << f(s.target.z()) << ','
       << f(s.target_heading) << ',' << f(s.target_speed) << '\n';
  }
}

TruthTrack load_truth_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  TruthTrack tr;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(n) + ": invalid number '" + tok + "'");
      }
    }
    if (v.size() != 15) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": expected 15 columns");
    }
    tr.time.push_back(v[0]);
    tr.chaser.emplace_back(v[1], v[2], v[3]);
    tr.target.emplace_back(v[10], v[11], v[12]);
    tr.heading.push_back(v[13]);
    tr.speed.push_back(v[14]);
  }
  if (tr.time.empty()) throw std::runtime_error(path + ": no truth samples");
  return tr;
}

TruthSample TruthTrack::interpolate(double t) const {
  if (time.empty()) throw std::logic_error("TruthTrack::interpolate: empty track");
  TruthSample s;
  s.timestamp = t;
  auto it = std::upper_bound(time.begin(), time.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - time.begin());
  if (hi == 0) hi = 1;
  if (hi >= time.size()) hi = time.size() - 1;
  const std::size_t lo = time.size() == 1 ? 0 : hi - 1;
  if (lo == hi) {
    s.target = target[lo];
    s.target_heading = heading[lo];
    s.target_speed = speed[lo];
    s.chaser.pose = Pose3(Mat3::Identity(), chaser[lo]);
    return s;
  }
  const double a = (t - time[lo]) / (time[hi] - time[lo]);
  s.target = (1.0 - a) * target[lo] + a * target[hi];
  s.chaser.pose = Pose3(Mat3::Identity(), (1.0 - a) * chaser[lo] + a * chaser[hi]);
  // Heading and speed are piecewise constant: take the sample at or before t.
  const std::size_t k = (a >= 1.0) ? hi : lo;
  s.target_heading = heading[k];
  s.target_speed = speed[k];
  return s;
}

}  // namespace homing
