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

#include "homing/frontend.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace homing {
namespace {

template <int D>
using VecD = Eigen::Matrix<double, D, 1>;

template <int D>
struct Line {
  VecD<D> point;
  VecD<D> direction;
};

template <int D>
double distance_to(const Line<D>& line, const VecD<D>& p) {
  const VecD<D> r = p - line.point;
  return (r - line.direction * line.direction.dot(r)).norm();
}

/// Principal direction of the points, oriented to agree with `hint`.
template <int D>
Line<D> total_least_squares(std::span<const VecD<D>> pts, const std::vector<int>& idx,
                            const VecD<D>& hint) {
  VecD<D> mean = VecD<D>::Zero();
  for (int i : idx) mean += pts[i];
  mean /= static_cast<double>(idx.size());
  Eigen::Matrix<double, D, D> scatter = Eigen::Matrix<double, D, D>::Zero();
  for (int i : idx) {
    const VecD<D> c = pts[i] - mean;
    scatter += c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(scatter);
  VecD<D> dir = es.eigenvectors().col(D - 1).normalized();
  if (dir.dot(hint) < 0.0) dir = -dir;
  return {mean, dir};
}

struct Score {
  int inliers = -1;
  double total_distance = std::numeric_limits<double>::infinity();

  bool better_than(const Score& o) const {
    if (inliers != o.inliers) return inliers > o.inliers;
    return total_distance < o.total_distance;
  }
};

template <int D>
Line<D> fit_ransac(std::span<const VecD<D>> pts, const RansacParams& params, std::uint64_t seed) {
  const int n = static_cast<int>(pts.size());
  if (n < 2) throw std::invalid_argument("fit_line_ransac: at least two points required");
  if (!(params.threshold > 0.0)) throw std::invalid_argument("fit_line_ransac: threshold must be positive");

  // Candidate pairs: all of them when they fit in the budget, otherwise seeded draws.
  std::vector<std::pair<int, int>> samples;
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (pairs <= params.iterations) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) samples.emplace_back(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < params.iterations; ++k) {
      const int i = pick(rng);
      int j = pick(rng);
      while (j == i) j = pick(rng);
      samples.emplace_back(i, j);
    }
  }

  Score best;
  Line<D> best_line{};
  std::vector<int> best_inliers;
  for (const auto& [i, j] : samples) {
    const VecD<D> diff = pts[j] - pts[i];
    const double len = diff.norm();
    if (!(len > 1e-12)) continue;
    const Line<D> cand{pts[i], diff / len};
    Score s{0, 0.0};
    std::vector<int> inl;
    for (int k = 0; k < n; ++k) {
      const double dist = distance_to(cand, pts[k]);
      if (dist <= params.threshold) {
        ++s.inliers;
        s.total_distance += dist;
        inl.push_back(k);
      }
    }
    if (s.better_than(best)) {
      best = s;
      best_line = cand;
      best_inliers = std::move(inl);
    }
  }
  if (best.inliers < 0) throw std::invalid_argument("fit_line_ransac: all points coincide");
  if (best_inliers.size() < 2) return best_line;
  return total_least_squares<D>(pts, best_inliers, best_line.direction);
}

int count_inliers(std::span<const Vec2> pts, const LineModel2D& l, double d) {
  int c = 0;
  for (const auto& p : pts) c += point_line_distance(l, p) <= d ? 1 : 0;
  return c;
}

int count_inliers(std::span<const Vec3> pts, const LineModel3D& l, double d) {
  int c = 0;
  for (const auto& p : pts) c += point_line_distance(l, p) <= d ? 1 : 0;
  return c;
}

}  // namespace

void validate(const RansacParams& params) {
  if (params.window < 2) throw std::invalid_argument("RansacParams: window must be at least 2");
  if (!(params.threshold > 0.0)) throw std::invalid_argument("RansacParams: threshold must be positive");
  if (params.iterations < 1) throw std::invalid_argument("RansacParams: iterations must be positive");
  if (params.min_inliers < 2 || params.min_inliers > params.window) {
    throw std::invalid_argument("RansacParams: min_inliers must lie in [2, window]");
  }
  if (params.max_consecutive_rejections < 0) {
    throw std::invalid_argument("RansacParams: max_consecutive_rejections must be non-negative");
  }
}

LineModel2D fit_line_ransac(std::span<const Vec2> points, const RansacParams& params, std::uint64_t seed) {
  const Line<2> l = fit_ransac<2>(points, params, seed);
  return {l.point, l.direction};
}

LineModel3D fit_line_ransac(std::span<const Vec3> points, const RansacParams& params, std::uint64_t seed) {
  const Line<3> l = fit_ransac<3>(points, params, seed);
  return {l.point, l.direction};
}

double point_line_distance(const LineModel2D& line, const Vec2& p) {
  const Vec2 r = p - line.point;
  return std::abs(line.direction.x() * r.y() - line.direction.y() * r.x());
}

double point_line_distance(const LineModel3D& line, const Vec3& p) {
  return distance_to<3>({line.point, line.direction}, p);
}

FixClass classify_fix(const LineModel2D& line, const Vec2& fix_xy, double d) {
  return point_line_distance(line, fix_xy) <= d ? FixClass::Inlier : FixClass::Outlier;
}

namespace {

// True when every fix lies strictly on the same side of `line` (horizontal
// projection). After a turn the rejected fixes drift off to one side; outliers
// scattered around the old track do not.
bool one_sided(const LineModel2D& line, const std::deque<TimedPosition>& fixes) {
  int left = 0, right = 0;
  for (const auto& f : fixes) {
    const Vec2 r = f.position.head<2>() - line.point;
    const double side = line.direction.x() * r.y() - line.direction.y() * r.x();
    (side > 0.0 ? left : right) += 1;
  }
  return left == 0 || right == 0;
}

}  // namespace

RangeBearingMeas fix_to_range_bearing(const UsblFix& fix, const Pose3& chaser_estimate) {
  const Vec3 body = usbl_to_body(chaser_estimate, fix.vector);
  RangeBearingMeas z;
  z.range = body.norm();
  z.bearing = UnitBearing(body);
  z.timestamp = fix.timestamp;
  return z;
}

FixGate::FixGate(RansacParams params, std::uint64_t seed) : params_(params), seed_(seed) {
  validate(params_);
}

GateResult FixGate::process_fix(const UsblFix& fix, const Pose3& chaser_estimate) {
  if (last_time_ && !(fix.timestamp > *last_time_)) {
    throw std::invalid_argument("FixGate::process_fix: timestamps must be strictly increasing");
  }
  last_time_ = fix.timestamp;

  GateResult out;
  out.target_world = chaser_estimate.translation() - fix.vector;
  out.measurement = fix_to_range_bearing(fix, chaser_estimate);
  const TimedPosition current{fix.timestamp, out.target_world};

  const auto push = [this](std::deque<TimedPosition>& q, const TimedPosition& p) {
    q.push_back(p);
    while (static_cast<int>(q.size()) > params_.window) q.pop_front();
  };
  const std::uint64_t seed = seed_ + calls_++;

  // Fits the window and reports which of `probe` lie within d of the line.
  const auto consensus = [&](const std::deque<TimedPosition>& win, const std::vector<Vec3>& probe,
                             std::vector<bool>& inside) {
    inside.assign(probe.size(), false);
    int count = 0;
    if (params_.use_3d_cylinder) {
      std::vector<Vec3> pts;
      for (const auto& w : win) pts.push_back(w.position);
      const LineModel3D line = fit_line_ransac(std::span<const Vec3>(pts), params_, seed);
      count = count_inliers(pts, line, params_.threshold);
      for (std::size_t k = 0; k < probe.size(); ++k) {
        inside[k] = point_line_distance(line, probe[k]) <= params_.threshold;
      }
    } else {
      std::vector<Vec2> pts;
      for (const auto& w : win) pts.push_back(w.position.head<2>());
      const LineModel2D line = fit_line_ransac(std::span<const Vec2>(pts), params_, seed);
      count = count_inliers(pts, line, params_.threshold);
      for (std::size_t k = 0; k < probe.size(); ++k) {
        inside[k] = classify_fix(line, probe[k].head<2>(), params_.threshold) == FixClass::Inlier;
      }
    }
    return count >= params_.min_inliers;
  };

  if (!screened_) {
    push(window_, current);
    if (static_cast<int>(window_.size()) < params_.window) {
      out.status = GateStatus::Buffering;
      return out;
    }
    if (!screened_) {
      std::vector<Vec3> probe;
      for (const auto& w : window_) probe.push_back(w.position);
      std::vector<bool> inside;
      if (!consensus(window_, probe, inside)) {
        // No consensus yet: slide the buffer and keep waiting.
        out.evicted.push_back(window_.front().timestamp);
        window_.pop_front();
        out.status = GateStatus::Buffering;
        return out;
      }
      std::deque<TimedPosition> kept;
      for (std::size_t k = 0; k < window_.size(); ++k) {
        if (inside[k]) {
          kept.push_back(window_[k]);
        } else if (window_[k].timestamp != current.timestamp) {
          out.evicted.push_back(window_[k].timestamp);
        }
      }
      const bool current_kept = inside.back();
      window_ = std::move(kept);
      if (static_cast<int>(window_.size()) < params_.window) {
        out.status = current_kept ? GateStatus::Buffering : GateStatus::Rejected;
        return out;
      }
      screened_ = true;
    }
    out.status = GateStatus::Accepted;
    return out;
  }

  std::vector<bool> inside;
  const bool reliable = consensus(window_, {out.target_world}, inside);
  if (inside[0] || !reliable) {
    push(window_, current);
    rejected_.clear();
    out.status = GateStatus::Accepted;
    return out;
  }

  push(rejected_, current);
  if (params_.max_consecutive_rejections > 0 &&
      static_cast<int>(rejected_.size()) >= params_.max_consecutive_rejections) {
    // A run of rejections on one side of the old track that agrees on its own
    // line means the track moved: rebuild the window from that consensus.
    std::vector<Vec2> old_pts;
    for (const auto& w : window_) old_pts.push_back(w.position.head<2>());
    const LineModel2D old_line = fit_line_ransac(std::span<const Vec2>(old_pts), params_, seed);
    std::vector<Vec3> probe;
    for (const auto& r : rejected_) probe.push_back(r.position);
    if (one_sided(old_line, rejected_) && consensus(rejected_, probe, inside) && inside.back()) {
      std::deque<TimedPosition> rebuilt;
      for (std::size_t k = 0; k < rejected_.size(); ++k) {
        if (inside[k]) rebuilt.push_back(rejected_[k]);
      }
      window_ = std::move(rebuilt);
      rejected_.clear();
      out.status = GateStatus::Accepted;
      return out;
    }
  }
  out.status = GateStatus::Rejected;
  return out;
}

InitBundle initialize_target(std::span<const TimedPosition> fixes, const RansacParams& params,
                             const InitSigmas& sigmas, std::uint64_t seed) {
  const std::size_t n = fixes.size();
  if (n < 2) throw std::invalid_argument("initialize_target: at least two fixes required");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(fixes[k].timestamp > fixes[k - 1].timestamp)) {
      throw std::invalid_argument("initialize_target: timestamps must be strictly increasing");
    }
  }

  std::vector<Vec2> xy;
  xy.reserve(n);
  for (const auto& f : fixes) xy.push_back(f.position.head<2>());
  const LineModel2D line = fit_line_ransac(std::span<const Vec2>(xy), params, seed);

  Vec2 dir = line.direction;
  if (dir.dot(xy.back() - xy.front()) < 0.0) dir = -dir;

  // Speeds between consecutive fixes that agree with the line.
  std::vector<std::size_t> inl;
  for (std::size_t k = 0; k < n; ++k) {
    if (point_line_distance(line, xy[k]) <= params.threshold) inl.push_back(k);
  }
  if (inl.size() < 2) {
    inl.resize(n);
    for (std::size_t k = 0; k < n; ++k) inl[k] = k;
  }
  double speed_sum = 0.0;
  for (std::size_t k = 0; k + 1 < inl.size(); ++k) {
    const std::size_t a = inl[k];
    const std::size_t b = inl[k + 1];
    speed_sum += (xy[b] - xy[a]).norm() / (fixes[b].timestamp - fixes[a].timestamp);
  }

  InitBundle b;
  b.x_T0 = TargetPosition{fixes.back().position};
  b.v_bar = speed_sum / static_cast<double>(inl.size() - 1);
  b.theta_hat = Heading(std::atan2(dir.y(), dir.x()));
  b.timestamp = fixes.back().timestamp;
  b.position_sigma = sigmas.position;
  b.speed_sigma = sigmas.speed;
  b.heading_sigma = sigmas.heading;
  return b;
}

void KeyframeBundler::add_imu(const ImuSample& s) {
  if (!imu_.empty() && !(s.timestamp > imu_.back().timestamp)) {
    throw std::invalid_argument("KeyframeBundler: IMU timestamps must be strictly increasing");
  }
  if (start_time_ && s.timestamp <= *start_time_) {
    // Before the current interval: only remember it as the interval's opening sample.
    carry_ = ImuSample{*start_time_, s.accel, s.gyro};
    return;
  }
  imu_.push_back(s);
  ++fresh_imu_;
}

void KeyframeBundler::add_depth(double /*timestamp*/, double z) { depth_ = z; }

void KeyframeBundler::add_dvl(double /*timestamp*/, const Vec3& v_body) { dvl_ = v_body; }

void KeyframeBundler::start(double t) {
  start_time_ = t;
  std::vector<ImuSample> keep;
  for (const auto& s : imu_) {
    if (s.timestamp <= t) {
      carry_ = ImuSample{t, s.accel, s.gyro};
    } else {
      keep.push_back(s);
    }
  }
  imu_ = std::move(keep);
  fresh_imu_ = static_cast<int>(imu_.size());
}

KeyframeInputs KeyframeBundler::bundle(double t, const Mat3& rotation_estimate, const ImuBias& bias,
                                       const ImuParams& params) {
  if (!start_time_) throw std::runtime_error("KeyframeBundler: interval not started");
  if (!(t > *start_time_)) throw std::invalid_argument("KeyframeBundler: keyframe time must increase");
  if (fresh_imu_ == 0) throw std::runtime_error("KeyframeBundler: no IMU samples since the last keyframe");
  if (!depth_) throw std::runtime_error("KeyframeBundler: no depth measurement received");
  if (!dvl_) throw std::runtime_error("KeyframeBundler: no DVL measurement received");

  std::vector<ImuSample> interval;
  std::vector<ImuSample> rest;
  if (carry_) {
    interval.push_back(*carry_);
  }
  for (const auto& s : imu_) {
    if (s.timestamp <= t) {
      if (interval.empty() && s.timestamp > *start_time_) {
        interval.push_back(ImuSample{*start_time_, s.accel, s.gyro});
      }
      interval.push_back(s);
    } else {
      rest.push_back(s);
    }
  }
  if (interval.empty()) {
    // Only samples after t arrived: hold the first one over the interval.
    interval.push_back(ImuSample{*start_time_, imu_.front().accel, imu_.front().gyro});
  }
  if (interval.back().timestamp < t) {
    // Zero-order hold of the latest sample up to the keyframe time.
    const ImuSample& last = interval.back();
    interval.push_back(ImuSample{t, last.accel, last.gyro});
  }

  KeyframeInputs out;
  out.preintegrated = imu_preintegrate(interval, bias, params);
  out.depth = *depth_;
  out.velocity_world = dvl_to_world(rotation_estimate, *dvl_);
  out.dt = t - *start_time_;

  carry_ = ImuSample{t, interval.back().accel, interval.back().gyro};
  imu_ = std::move(rest);
  fresh_imu_ = static_cast<int>(imu_.size());
  start_time_ = t;
  return out;
}

DeadReckoner::DeadReckoner(const ChaserState& initial, double timestamp) { reset(initial, timestamp); }

void DeadReckoner::reset(const ChaserState& state, double timestamp, const ImuBias& bias) {
  state_ = state;
  time_ = timestamp;
  bias_ = bias;
  if (last_imu_) last_imu_->timestamp = timestamp;
}

void DeadReckoner::add_imu(const ImuSample& s) {
  if (!last_imu_) {
    last_imu_ = s;
    if (s.timestamp > time_) time_ = s.timestamp;
    return;
  }
  const double dt = s.timestamp - time_;
  if (dt > 0.0) {
    const Vec3 omega = 0.5 * (last_imu_->gyro + s.gyro) - bias_.gyro;
    const Mat3 R0 = state_.pose.rotation();
    const Mat3 R1 = orthonormalize(R0 * so3_exp(omega * dt));
    Vec3 v_world = state_.velocity;
    Vec3 p = state_.pose.translation();
    if (v_body_) {
      const Vec3 v0 = R0 * *v_body_;
      const Vec3 v1 = R1 * *v_body_;
      p += 0.5 * (v0 + v1) * dt;
      v_world = v1;
    } else {
      p += v_world * dt;
    }
    state_.pose = Pose3(R1, p);
    state_.velocity = v_world;
    time_ = s.timestamp;
  }
  last_imu_ = s;
}

void DeadReckoner::add_dvl(double /*timestamp*/, const Vec3& v_body) {
  v_body_ = v_body;
  state_.velocity = state_.pose.rotation() * v_body;
}

void DeadReckoner::add_depth(double /*timestamp*/, double z) {
  state_.pose = Pose3(state_.pose.rotation(), Vec3(state_.pose.translation().x(),
                                                   state_.pose.translation().y(), z));
}

}  // namespace homing
