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

#include "homing/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <span>

namespace homing {
namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

PipelineConfig pipeline_config_from(const KeyValueConfig& kv) {
  PipelineConfig c;
  SmootherOptions& s = c.smoother;
  s.imu.accel_sigma = kv.get_double("imu.accel_sigma", s.imu.accel_sigma);
  s.imu.gyro_sigma = kv.get_double("imu.gyro_sigma", s.imu.gyro_sigma);
  s.imu.accel_bias_sigma = kv.get_double("imu.accel_bias_sigma", s.imu.accel_bias_sigma);
  s.imu.gyro_bias_sigma = kv.get_double("imu.gyro_bias_sigma", s.imu.gyro_bias_sigma);
  s.imu.gravity.z() = kv.get_double("imu.gravity_z", s.imu.gravity.z());
  s.usbl.angular_sigma_per_meter = kv.get_double("usbl.angular_sigma_per_meter", s.usbl.angular_sigma_per_meter);
  s.usbl.range_sigma = kv.get_double("usbl.range_sigma", s.usbl.range_sigma);
  s.depth_sigma = kv.get_double("depth.sigma", s.depth_sigma);
  s.dvl_sigma = kv.get_double("dvl.sigma", s.dvl_sigma);
  s.motion_sigmas.x() = kv.get_double("motion.sigma_x", s.motion_sigmas.x());
  s.motion_sigmas.y() = kv.get_double("motion.sigma_y", s.motion_sigmas.y());
  s.motion_sigmas.z() = kv.get_double("motion.sigma_z", s.motion_sigmas.z());
  s.smoothed.max_iterations = static_cast<int>(kv.get_int("solver.max_iterations", s.smoothed.max_iterations));
  s.smoothed.initial_lambda = kv.get_double("solver.initial_lambda", s.smoothed.initial_lambda);
  s.smoothed.gradient_tolerance = kv.get_double("solver.gradient_tolerance", s.smoothed.gradient_tolerance);
  s.smoothed.relative_cost_tolerance =
      kv.get_double("solver.relative_cost_tolerance", s.smoothed.relative_cost_tolerance);
  s.smoothed.compute_marginals = kv.get_bool("solver.compute_marginals", s.smoothed.compute_marginals);
  s.realtime_iterations = static_cast<int>(kv.get_int("solver.realtime_iterations", s.realtime_iterations));
  s.repreintegration_threshold =
      kv.get_double("solver.repreintegration_threshold", s.repreintegration_threshold);

  RansacParams& r = c.ransac;
  r.window = static_cast<int>(kv.get_int("ransac.window", r.window));
  r.threshold = kv.get_double("ransac.threshold", r.threshold);
  r.iterations = static_cast<int>(kv.get_int("ransac.iterations", r.iterations));
  r.min_inliers = static_cast<int>(kv.get_int("ransac.min_inliers", r.min_inliers));
  r.use_3d_cylinder = kv.get_bool("ransac.use_3d_cylinder", r.use_3d_cylinder);
  r.max_consecutive_rejections =
      static_cast<int>(kv.get_int("ransac.max_consecutive_rejections", r.max_consecutive_rejections));
  c.ransac_seed = static_cast<std::uint64_t>(kv.get_int("ransac.seed", static_cast<long long>(c.ransac_seed)));

  c.init_fixes = static_cast<int>(kv.get_int("init.num_fixes", c.init_fixes));
  c.skip_first = static_cast<int>(kv.get_int("init.skip_first", c.skip_first));
  c.init_sigmas.position.x() = kv.get_double("init.position_sigma_x", c.init_sigmas.position.x());
  c.init_sigmas.position.y() = kv.get_double("init.position_sigma_y", c.init_sigmas.position.y());
  c.init_sigmas.position.z() = kv.get_double("init.position_sigma_z", c.init_sigmas.position.z());
  c.init_sigmas.speed = kv.get_double("init.speed_sigma", c.init_sigmas.speed);
  c.init_sigmas.heading = kv.get_double("init.heading_sigma", c.init_sigmas.heading);

  c.chaser_time = kv.get_double("chaser0.time", c.chaser_time);
  const Vec3 p(kv.get_double("chaser0.x", 0.0), kv.get_double("chaser0.y", 0.0), kv.get_double("chaser0.z", 0.0));
  const double yaw = kv.get_double("chaser0.yaw", 0.0);
  const double pitch = kv.get_double("chaser0.pitch", 0.0);
  const double roll = kv.get_double("chaser0.roll", 0.0);
  c.chaser_start.pose = Pose3::FromYawPitchRoll(yaw, pitch, roll, p);
  c.chaser_start.velocity =
      Vec3(kv.get_double("chaser0.vx", 0.0), kv.get_double("chaser0.vy", 0.0), kv.get_double("chaser0.vz", 0.0));
  c.prior_rotation_sigma = kv.get_double("chaser0.sigma_rotation", c.prior_rotation_sigma);
  c.prior_position_sigma = kv.get_double("chaser0.sigma_position", c.prior_position_sigma);
  c.prior_velocity_sigma = kv.get_double("chaser0.sigma_velocity", c.prior_velocity_sigma);
  c.prior_accel_bias_sigma = kv.get_double("chaser0.sigma_accel_bias", c.prior_accel_bias_sigma);
  c.prior_gyro_bias_sigma = kv.get_double("chaser0.sigma_gyro_bias", c.prior_gyro_bias_sigma);

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ConfigError("unknown config keys: " + join(unused));
  validate(c.ransac);
  if (c.init_fixes < 0 || c.skip_first < 0) throw ConfigError("init counts must be non-negative");
  if (c.init_fixes == 1) throw ConfigError("init.num_fixes must be at least 2");
  return c;
}

KeyValueConfig to_key_values(const PipelineConfig& c) {
  KeyValueConfig kv;
  const auto f = [](double v) { return format_double(v); };
  const auto i = [](long long v) { return std::to_string(v); };
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  const SmootherOptions& s = c.smoother;
  kv.set("imu.accel_sigma", f(s.imu.accel_sigma));
  kv.set("imu.gyro_sigma", f(s.imu.gyro_sigma));
  kv.set("imu.accel_bias_sigma", f(s.imu.accel_bias_sigma));
  kv.set("imu.gyro_bias_sigma", f(s.imu.gyro_bias_sigma));
  kv.set("imu.gravity_z", f(s.imu.gravity.z()));
  kv.set("usbl.angular_sigma_per_meter", f(s.usbl.angular_sigma_per_meter));
  kv.set("usbl.range_sigma", f(s.usbl.range_sigma));
  kv.set("depth.sigma", f(s.depth_sigma));
  kv.set("dvl.sigma", f(s.dvl_sigma));
  kv.set("motion.sigma_x", f(s.motion_sigmas.x()));
  kv.set("motion.sigma_y", f(s.motion_sigmas.y()));
  kv.set("motion.sigma_z", f(s.motion_sigmas.z()));
  kv.set("solver.max_iterations", i(s.smoothed.max_iterations));
  kv.set("solver.initial_lambda", f(s.smoothed.initial_lambda));
  kv.set("solver.gradient_tolerance", f(s.smoothed.gradient_tolerance));
  kv.set("solver.relative_cost_tolerance", f(s.smoothed.relative_cost_tolerance));
  kv.set("solver.compute_marginals", b(s.smoothed.compute_marginals));
  kv.set("solver.realtime_iterations", i(s.realtime_iterations));
  kv.set("solver.repreintegration_threshold", f(s.repreintegration_threshold));
  kv.set("ransac.window", i(c.ransac.window));
  kv.set("ransac.threshold", f(c.ransac.threshold));
  kv.set("ransac.iterations", i(c.ransac.iterations));
  kv.set("ransac.min_inliers", i(c.ransac.min_inliers));
  kv.set("ransac.use_3d_cylinder", b(c.ransac.use_3d_cylinder));
  kv.set("ransac.max_consecutive_rejections", i(c.ransac.max_consecutive_rejections));
  kv.set("ransac.seed", i(static_cast<long long>(c.ransac_seed)));
  kv.set("init.num_fixes", i(c.init_fixes));
  kv.set("init.skip_first", i(c.skip_first));
  kv.set("init.position_sigma_x", f(c.init_sigmas.position.x()));
  kv.set("init.position_sigma_y", f(c.init_sigmas.position.y()));
  kv.set("init.position_sigma_z", f(c.init_sigmas.position.z()));
  kv.set("init.speed_sigma", f(c.init_sigmas.speed));
  kv.set("init.heading_sigma", f(c.init_sigmas.heading));
  const Pose3& P = c.chaser_start.pose;
  kv.set("chaser0.time", f(c.chaser_time));
  kv.set("chaser0.x", f(P.translation().x()));
  kv.set("chaser0.y", f(P.translation().y()));
  kv.set("chaser0.z", f(P.translation().z()));
  kv.set("chaser0.yaw", f(P.yaw()));
  kv.set("chaser0.pitch", f(P.pitch()));
  kv.set("chaser0.roll", f(P.roll()));
  kv.set("chaser0.vx", f(c.chaser_start.velocity.x()));
  kv.set("chaser0.vy", f(c.chaser_start.velocity.y()));
  kv.set("chaser0.vz", f(c.chaser_start.velocity.z()));
  kv.set("chaser0.sigma_rotation", f(c.prior_rotation_sigma));
  kv.set("chaser0.sigma_position", f(c.prior_position_sigma));
  kv.set("chaser0.sigma_velocity", f(c.prior_velocity_sigma));
  kv.set("chaser0.sigma_accel_bias", f(c.prior_accel_bias_sigma));
  kv.set("chaser0.sigma_gyro_bias", f(c.prior_gyro_bias_sigma));
  return kv;
}

PipelineResult run_pipeline(const MeasurementStream& stream, const PipelineConfig& config) {
  const int n_init = config.init_fixes > 0 ? config.init_fixes : config.ransac.window;

  Smoother smoother(config.smoother);
  FixGate gate(config.ransac, config.ransac_seed);
  KeyframeBundler bundler;
  DeadReckoner nav(config.chaser_start, config.chaser_time);
  DeadReckoner baseline(config.chaser_start, config.chaser_time);

  PipelineResult out;
  std::vector<TimedPosition> init_candidates;
  bool initialized = false;
  ImuBias bias;
  double last_time = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;

  for (const auto& rec : stream) {
    ++index;
    const double t = record_time(rec);
    if (t < last_time) {
      throw PipelineError("record " + std::to_string(index) + ": timestamps go backwards");
    }
    last_time = t;
    if (t < config.chaser_time) continue;

    if (const auto* s = std::get_if<ImuSample>(&rec)) {
      bundler.add_imu(*s);
      nav.add_imu(*s);
      baseline.add_imu(*s);
    } else if (const auto* d = std::get_if<DvlRecord>(&rec)) {
      bundler.add_dvl(d->timestamp, d->velocity_body);
      nav.add_dvl(d->timestamp, d->velocity_body);
      baseline.add_dvl(d->timestamp, d->velocity_body);
    } else if (const auto* z = std::get_if<DepthRecord>(&rec)) {
      bundler.add_depth(z->timestamp, z->z);
      nav.add_depth(z->timestamp, z->z);
      baseline.add_depth(z->timestamp, z->z);
    } else if (const auto* fix = std::get_if<UsblFix>(&rec)) {
      out.raw_fixes.push_back(*fix);
      out.baseline_chaser.push_back(baseline.state().pose.translation());
      if (out.counts.skipped < config.skip_first) {
        ++out.counts.skipped;
        continue;
      }

      const GateResult g = gate.process_fix(*fix, nav.state().pose);
      for (double te : g.evicted) {
        out.rejected_times.push_back(te);
        ++out.counts.rejected;
        --out.counts.buffered;
        std::erase_if(init_candidates, [te](const TimedPosition& p) { return p.timestamp == te; });
      }
      switch (g.status) {
        case GateStatus::Buffering: ++out.counts.buffered; break;
        case GateStatus::Accepted: ++out.counts.accepted; break;
        case GateStatus::Rejected:
          ++out.counts.rejected;
          out.rejected_times.push_back(fix->timestamp);
          break;
      }
      if (g.status == GateStatus::Rejected) continue;

      if (!initialized) {
        init_candidates.push_back({fix->timestamp, g.target_world});
        if (static_cast<int>(init_candidates.size()) < n_init) continue;
        const std::span<const TimedPosition> last_n(init_candidates.data() + init_candidates.size() - n_init,
                                                    static_cast<std::size_t>(n_init));
        const InitBundle init = initialize_target(last_n, config.ransac, config.init_sigmas, config.ransac_seed);

        ChaserPrior prior;
        prior.state = nav.state();
        prior.bias = bias;
        Eigen::Matrix<double, 15, 1> sig;
        sig << Vec3::Constant(config.prior_rotation_sigma), Vec3::Constant(config.prior_position_sigma),
            Vec3::Constant(config.prior_velocity_sigma), Vec3::Constant(config.prior_accel_bias_sigma),
            Vec3::Constant(config.prior_gyro_bias_sigma);
        prior.covariance = sig.array().square().matrix().asDiagonal();
        smoother.initialize_priors(prior, init);
        bundler.start(fix->timestamp);
        out.init_time = fix->timestamp;
        out.realtime = smoother.optimize(EstimateTag::RealTime);
        initialized = true;
        continue;
      }

      KeyframeInputs in;
      try {
        in = bundler.bundle(fix->timestamp, nav.state().pose.rotation(), bias, config.smoother.imu);
      } catch (const std::exception& e) {
        throw PipelineError("record " + std::to_string(index) + ": " + e.what());
      }
      smoother.add_keyframe(g.measurement, in.preintegrated, in.depth, in.velocity_world, in.dt);
      out.realtime = smoother.optimize(EstimateTag::RealTime);
      const KeyframeEstimate& latest = out.realtime.keyframes.back();
      bias = latest.bias;
      nav.reset(latest.chaser, fix->timestamp, latest.bias);
    }
  }

  if (!initialized) {
    throw PipelineError("initialization failed: " + std::to_string(init_candidates.size()) + " of " +
                        std::to_string(n_init) + " consistent fixes available");
  }
  out.smoothed = smoother.optimize(EstimateTag::Smoothed);
  out.graph = smoother.graph();
  return out;
}

}  // namespace homing
