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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. `homing_acceptance 4 6` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance/frozen_bounds.hpp"
#include "acceptance/scenario_runs.hpp"
#include "homing/solver.hpp"
#include "support/dense_oracle.hpp"
#include "support/small_problem.hpp"
#include "unit/test_util.hpp"

#ifndef HOMING_CLI_PATH
#define HOMING_CLI_PATH "homing"
#endif

using namespace homing;
using namespace homing::acceptance;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Scenario runs shared between criteria, computed on first use.
class RunCache {
 public:
  const ScenarioRun& get(ScenarioKind kind, std::uint64_t seed) {
    const auto key = std::make_pair(kind, seed);
    auto it = runs_.find(key);
    if (it == runs_.end()) it = runs_.emplace(key, run_scenario(kind, seed)).first;
    return it->second;
  }

 private:
  std::map<std::pair<ScenarioKind, std::uint64_t>, ScenarioRun> runs_;
};

RunCache& cache() {
  static RunCache c;
  return c;
}

// ---------------------------------------------------------------------------
// 1. Analytic Jacobians against central differences.

std::vector<ImuSample> wavy_imu(testing::Rng& rng) {
  const Vec3 a0 = rng.vec3(-2, 2), a1 = rng.vec3(-1, 1);
  const Vec3 g0 = rng.vec3(-0.3, 0.3), g1 = rng.vec3(-0.2, 0.2);
  const double f = rng.uniform(0.5, 2.0);
  std::vector<ImuSample> out;
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    out.push_back({t, a0 + a1 * std::sin(f * t), g0 + g1 * std::cos(f * t)});
  }
  return out;
}

Outcome jacobian_suite() {
  using testing::numerical_jacobian;
  using testing::relative_error;
  const auto t0 = std::chrono::steady_clock::now();
  testing::Rng rng(2024);
  double motion = 0.0, depth = 0.0, rb = 0.0, imu = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    // Motion model: affine in positions and speed, so wide steps are exact there.
    const TargetPosition a{rng.vec3(-500, 500)}, b{rng.vec3(-500, 500)};
    const TargetMotionParams p{rng.uniform(0, 3), Heading(rng.uniform(-kPi, kPi))};
    const double dt = rng.uniform(0.1, 3);
    const auto mm = motion_model_residual(a, b, p, dt);
    const auto err = [&](const TargetPosition& x, const TargetPosition& y, const TargetMotionParams& q) {
      return Eigen::VectorXd(motion_model_residual(x, y, q, dt).error);
    };
    motion = std::max(
        {motion,
         relative_error(mm.d_from, numerical_jacobian<Vec3>([&](const Vec3& x) { return err({x}, b, p); },
                                                            testing::retract_vec3, a.position, 3, 1e-2)),
         relative_error(mm.d_to, numerical_jacobian<Vec3>([&](const Vec3& x) { return err(a, {x}, p); },
                                                          testing::retract_vec3, b.position, 3, 1e-2)),
         relative_error(mm.d_speed, numerical_jacobian<double>(
                                        [&](const double& v) { return err(a, b, {v, p.heading}); },
                                        [](const double& v, const Eigen::VectorXd& d) { return v + d(0); },
                                        p.speed, 1, 1e-2)),
         relative_error(mm.d_heading,
                        numerical_jacobian<Heading>(
                            [&](const Heading& h) { return err(a, b, {p.speed, h}); },
                            [](const Heading& h, const Eigen::VectorXd& d) { return h.retract(d(0)); },
                            p.heading, 1, 1e-4),
                        1e-3)});

    const ChaserState c = rng.chaser(100.0);
    const double z = rng.uniform(-100, 0);
    depth = std::max(depth, relative_error(depth_residual(c, z).d_chaser,
                                           numerical_jacobian<ChaserState>(
                                               [&](const ChaserState& x) {
                                                 return Eigen::VectorXd::Constant(1, depth_residual(x, z).error);
                                               },
                                               testing::retract_chaser, c, 9)));

    const TargetPosition t{rng.vec3(-100, 100)};
    const RangeBearingMeas m{rng.uniform(1, 400), rng.bearing(), 0.0};
    const auto r = range_bearing_residual(c, t, m);
    rb = std::max({rb,
                   relative_error(r.d_chaser, numerical_jacobian<ChaserState>(
                                                  [&](const ChaserState& x) -> Eigen::VectorXd {
                                                    return range_bearing_residual(x, t, m).error;
                                                  },
                                                  testing::retract_chaser, c, 9)),
                   relative_error(r.d_target, numerical_jacobian<Vec3>(
                                                  [&](const Vec3& x) -> Eigen::VectorXd {
                                                    return range_bearing_residual(c, {x}, m).error;
                                                  },
                                                  testing::retract_vec3, t.position, 3))});

    const ImuBias b0{rng.vec3(-0.05, 0.05), rng.vec3(-1e-3, 1e-3)};
    const auto d = imu_preintegrate(wavy_imu(rng), b0);
    const ChaserState xi = rng.chaser();
    Vec9 nudge;
    nudge << rng.vec3(-0.05, 0.05), rng.vec3(-0.5, 0.5), rng.vec3(-0.1, 0.1);
    const ChaserState xj = chaser_retract(imu_predict(xi, b0, d), nudge);
    const ImuBias bi = ImuBias::FromVector(b0.vector() + Vec6::Constant(rng.uniform(-5e-3, 5e-3)));
    const ImuBias bj{rng.vec3(-0.05, 0.05), rng.vec3(-1e-3, 1e-3)};
    const auto ir = imu_residual(xi, xj, bi, bj, d);
    const auto f_i = [&](const ChaserState& x) -> Eigen::VectorXd { return imu_residual(x, xj, bi, bj, d).error; };
    const auto f_j = [&](const ChaserState& x) -> Eigen::VectorXd { return imu_residual(xi, x, bi, bj, d).error; };
    const auto f_bi = [&](const ImuBias& x) -> Eigen::VectorXd { return imu_residual(xi, xj, x, bj, d).error; };
    const auto f_bj = [&](const ImuBias& x) -> Eigen::VectorXd { return imu_residual(xi, xj, bi, x, d).error; };
    imu = std::max({imu,
                    relative_error(ir.d_state_i, numerical_jacobian<ChaserState>(f_i, testing::retract_chaser, xi, 9)),
                    relative_error(ir.d_state_j, numerical_jacobian<ChaserState>(f_j, testing::retract_chaser, xj, 9)),
                    relative_error(ir.d_bias_i, numerical_jacobian<ImuBias>(f_bi, testing::retract_bias, bi, 6)),
                    relative_error(ir.d_bias_j, numerical_jacobian<ImuBias>(f_bj, testing::retract_bias, bj, 6))});
  }
  const double secs = seconds_since(t0);
  const bool pass = motion <= 1e-8 && depth <= 1e-6 && rb <= 1e-5 && imu <= 1e-4 && secs < 5.0;
  return {pass, fmt("worst relative error: motion %.2e (<=1e-8), depth %.2e (<=1e-6), range-bearing %.2e "
                    "(<=1e-5), imu %.2e (<=1e-4); %.2f s (<5 s)",
                    motion, depth, rb, imu, secs)};
}

// ---------------------------------------------------------------------------
// 2. Sparse LM against a dense Gauss-Newton oracle.

Outcome dense_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  LmOptions o;
  o.max_iterations = 200;
  o.gradient_tolerance = 1e-12;
  o.relative_cost_tolerance = 1e-15;
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = testing::make_small_problem(3, seed);
    const LmResult lm = levenberg_marquardt(p.graph, o);
    ok = ok && !lm.summary.failed();
    const Values oracle = testing::dense_gauss_newton(p.graph, p.graph.values());
    worst = std::max(worst, testing::max_variable_distance(lm.values, oracle));
  }
  const double secs = seconds_since(t0) / 3.0;
  return {ok && worst <= 1e-8 && secs < 1.0,
          fmt("3 keyframes, seeds 1-3: max variable distance %.2e (<=1e-8); %.3f s per solve (<1 s)", worst, secs)};
}

// ---------------------------------------------------------------------------
// 3. Zero-noise recovery.

Outcome zero_noise() {
  bool pass = true;
  std::string detail;
  for (auto kind : {ScenarioKind::Perpendicular, ScenarioKind::Parallel}) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOptions o;
    // No sensor noise and no time of flight: the fix geometry is then exact.
    o.tweak = [](ScenarioConfig& c) {
      c.noise = SensorNoise::Zero();
      c.time_of_flight = false;
    };
    const ScenarioRun r = run_scenario(kind, 1, o);
    const double secs = seconds_since(t0);
    const GroundTruth truth = generate_truth(r.scenario);
    double pos = 0.0;
    for (const auto& k : r.result.smoothed.keyframes) {
      pos = std::max(pos, (k.target.position - truth.target_position(k.timestamp)).norm());
    }
    const TruthSample s = truth.at(0.0);
    const double head = std::abs(wrap_angle(r.result.smoothed.heading.radians() - s.target_heading));
    const double speed = std::abs(r.result.smoothed.speed - s.target_speed);
    const bool ok = pos <= 1e-6 && head <= 1e-6 && speed <= 1e-6 && secs < 30.0 && !r.result.smoothed.non_converged;
    pass = pass && ok;
    detail += fmt("%s%s: position %.1e m, heading %.1e rad, speed %.1e m/s, %.1f s", detail.empty() ? "" : "; ",
                  to_string(kind).c_str(), pos, head, speed, secs);
  }
  return {pass, detail + " (each <=1e-6, <30 s)"};
}

// ---------------------------------------------------------------------------
// 4. Real-time convergence on the Perpendicular scenario.

Outcome convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  int improved = 0;
  double sum_last = 0.0, worst_first = 0.0, worst_last = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ScenarioRun& r = cache().get(ScenarioKind::Perpendicular, seed);
    const double first = mean_over(r.realtime.position, 0.0, 0.25);
    const double last = mean_over(r.realtime.position, 0.75, 1.0);
    improved += last < first;
    sum_last += last;
    worst_first = std::max(worst_first, first);
    worst_last = std::max(worst_last, last);
  }
  const double secs = seconds_since(t0);
  const double avg_last = sum_last / 10.0;
  return {improved == 10 && avg_last <= bounds::kConvergenceLastQuarterMean && secs < 120.0,
          fmt("last quarter below first quarter in %d/10 seeds; average last-quarter error %.2f m (<=%.2f m); "
              "worst first %.1f m, worst last %.1f m; %.0f s (<120 s)",
              improved, avg_last, bounds::kConvergenceLastQuarterMean, worst_first, worst_last, secs)};
}

// ---------------------------------------------------------------------------
// 5. Smoothed no worse than real time.

Outcome smoothed_vs_realtime() {
  bool pass = true;
  std::string detail;
  for (auto kind : {ScenarioKind::Perpendicular, ScenarioKind::Parallel}) {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ScenarioRun& r = cache().get(kind, seed);
      wins += r.smoothed.position_stats().mean <= r.realtime.position_stats().mean;
    }
    pass = pass && wins >= 9;
    detail += fmt("%s%s %d/10", detail.empty() ? "" : ", ", to_string(kind).c_str(), wins);
  }
  return {pass, "smoothed mean error <= real-time mean error: " + detail + " (>=9/10 each)"};
}

// ---------------------------------------------------------------------------
// 6. Outlier gate.

Outcome outlier_gate() {
  const RansacParams gate;
  const double magnitude = 4.0 * gate.threshold;
  std::size_t injected = 0, caught = 0;
  double worst_change = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunOptions o;
    o.outlier_fraction = 0.1;
    o.outlier_magnitude = magnitude;
    const ScenarioRun dirty = run_scenario(ScenarioKind::Perpendicular, seed, o);
    const std::set<double> rejected(dirty.result.rejected_times.begin(), dirty.result.rejected_times.end());
    for (std::size_t i : dirty.displaced) {
      ++injected;
      caught += rejected.count(record_time(dirty.stream[i])) > 0;
    }
    const double clean = cache().get(ScenarioKind::Perpendicular, seed).smoothed.position_stats().mean;
    const double with = dirty.smoothed.position_stats().mean;
    worst_change = std::max(worst_change, std::abs(with - clean) / clean);
  }
  return {caught == injected && worst_change < 0.05,
          fmt("%zu/%zu injected fixes (>= %.0f m off track) rejected; worst relative change in smoothed mean "
              "error %.2f%% (<5%%)",
              caught, injected, magnitude, 100.0 * worst_change)};
}

// ---------------------------------------------------------------------------
// 7. Target initialization.

Outcome initialization() {
  const RansacParams ransac;
  // Exact constant-velocity windows.
  testing::Rng rng(77);
  double worst_heading = 0.0, worst_speed = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double heading = rng.uniform(-kPi, kPi), speed = rng.uniform(0.2, 3.0);
    const Vec3 p0 = rng.vec3(-500, 500);
    std::vector<TimedPosition> fixes;
    for (int k = 0; k < ransac.window; ++k) {
      fixes.push_back({static_cast<double>(k), p0 + speed * k * Vec3(std::cos(heading), std::sin(heading), 0)});
    }
    const InitBundle b = initialize_target(fixes, ransac, {}, static_cast<std::uint64_t>(trial));
    worst_heading = std::max(worst_heading, std::abs(b.theta_hat.minus(Heading(heading))));
    worst_speed = std::max(worst_speed, std::abs(b.v_bar - speed));
  }

  // Simulated fixes at 200 m range: stationary chaser, target crossing at 1.5 m/s.
  std::vector<double> errors;
  int flipped = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    ScenarioConfig c = default_scenario(ScenarioKind::Custom, seed);
    c.duration = static_cast<double>(ransac.window) + 1.0;
    c.imu_rate = c.dvl_rate = c.depth_rate = 1.0;
    c.chaser.waypoints = {Vec2(0.0, 0.0), Vec2(1.0, 0.0)};
    c.chaser.speed = 0.0;
    c.target.start = Vec2(200.0, -5.0);
    c.target.segments = {TargetSegment{0.0, kPi / 2, 1.5}};
    const GroundTruth truth = generate_truth(c);
    std::vector<TimedPosition> fixes;
    for (const auto& rec : synthesize_measurements(truth, c)) {
      const auto* f = std::get_if<UsblFix>(&rec);
      if (f == nullptr || static_cast<int>(fixes.size()) == ransac.window) continue;
      fixes.push_back({f->timestamp, truth.chaser_position(f->timestamp) - f->vector});
    }
    const InitBundle b = initialize_target(fixes, ransac, {}, seed);
    const double e = std::abs(wrap_angle(b.theta_hat.radians() - kPi / 2)) * 180.0 / kPi;
    errors.push_back(e);
    flipped += e > 30.0;
  }
  std::sort(errors.begin(), errors.end());
  const double p95 = errors[static_cast<std::size_t>(std::ceil(0.95 * errors.size())) - 1];
  return {worst_heading <= 1e-12 && worst_speed <= 1e-12 && p95 <= bounds::kInitHeadingP95,
          fmt("exact windows: heading %.1e rad, speed %.1e m/s (<=1e-12); 200 m range, 500 windows: median "
              "%.2f deg, p95 %.2f deg (<=%.3f), %d windows off by >30 deg",
              worst_heading, worst_speed, errors[errors.size() / 2], p95, bounds::kInitHeadingP95, flipped)};
}

// ---------------------------------------------------------------------------
// 8. Relay delay.

Outcome relay_delay() {
  // Geometry check: both agents at 2 m/s in opposite directions, about 1000 m apart.
  bool geometry_ok = true;
  double worst_disp = 0.0, worst_range = 0.0, min_range = 1e300;
  std::string geometry;
  for (double delay : {0.0, 1.0, 2.0}) {
    ScenarioConfig c = default_scenario(ScenarioKind::Custom, 1);
    c.noise = SensorNoise::Zero();
    c.relay_delay = delay;
    c.duration = 120.0;
    c.imu_rate = c.dvl_rate = c.depth_rate = 1.0;
    c.chaser.waypoints = {Vec2(-120.0, 0.0), Vec2(0.0, 0.0)};
    c.chaser.speed = 2.0;
    c.target.start = Vec2(120.0, 1000.0);
    c.target.segments = {TargetSegment{0.0, kPi, 2.0}};
    const GroundTruth truth = generate_truth(c);
    const double speed_sum = c.chaser.speed + c.target.segments[0].speed;
    double disp_max = 0.0;
    for (const auto& rec : synthesize_measurements(truth, c)) {
      const auto* f = std::get_if<UsblFix>(&rec);
      if (f == nullptr) continue;
      const double ping = std::floor(f->measured_at * c.ping_rate + 1e-9) / c.ping_rate;
      const double two_way = f->measured_at - ping;
      const Vec3 ideal = truth.chaser_position(f->timestamp) - truth.target_position(f->timestamp);
      const double disp = (f->vector - ideal).norm();
      const double range = ideal.norm();
      geometry_ok = geometry_ok && disp <= speed_sum * (delay + two_way) + 1e-9 && disp <= 10.0;
      disp_max = std::max(disp_max, disp);
      worst_range = std::max(worst_range, range);
      min_range = std::min(min_range, range);
    }
    worst_disp = std::max(worst_disp, disp_max);
    geometry += fmt("%s%.0f s: %.2f m", geometry.empty() ? "" : ", ", delay, disp_max);
  }

  // Estimator degradation on the default Perpendicular scenario (reported only).
  std::string degradation;
  for (double delay : {0.0, 1.0, 2.0}) {
    RunOptions o;
    o.tweak = [delay](ScenarioConfig& c) { c.relay_delay = delay; };
    const ScenarioRun r = delay == 0.0 ? cache().get(ScenarioKind::Perpendicular, 1)
                                       : run_scenario(ScenarioKind::Perpendicular, 1, o);
    degradation += fmt("%s%.0f s: %.2f m", degradation.empty() ? "" : ", ", delay, r.smoothed.position_stats().mean);
  }
  return {geometry_ok,
          fmt("range %.0f-%.0f m, max fix displacement per delay [", min_range, worst_range) + geometry +
              "] (<= speed sum x (delay + two-way ToF) and <= 10 m); smoothed mean error per delay, seed 1 [" +
              degradation + "] (reported)"};
}

// ---------------------------------------------------------------------------
// 9. Adversarial target.

Outcome adversarial() {
  bool converged = true;
  double sum = 0.0, worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ScenarioRun r = run_scenario(ScenarioKind::Adversarial, seed);
    converged = converged && !r.result.smoothed.non_converged && !r.result.realtime.non_converged &&
                std::isfinite(r.result.smoothed.final_cost);
    sum += r.smoothed.position_stats().mean;
    worst = std::max(worst, *std::max_element(r.smoothed.position.begin(), r.smoothed.position.end()));
  }
  const double avg = sum / 10.0;
  return {converged && avg <= bounds::kAdversarialMean && worst <= bounds::kAdversarialMax,
          fmt("10 seeds %s; average smoothed mean error %.2f m (<=%.2f m), worst error %.2f m (<=%.2f m)",
              converged ? "finite and converged" : "DIVERGED OR NOT CONVERGED", avg, bounds::kAdversarialMean,
              worst, bounds::kAdversarialMax)};
}

// ---------------------------------------------------------------------------
// 10. Determinism of every subcommand.

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt("homing_acceptance_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  const std::string cli = HOMING_CLI_PATH;
  int failures = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    const std::vector<std::string> commands{
        cli + " simulate --scenario perpendicular --seed 7 --outlier-fraction 0.05 --out " + (d / "sim").string(),
        cli + " estimate --stream " + (d / "sim" / "stream.txt").string() + " --config " +
            (d / "sim" / "estimator.cfg").string() + " --out " + (d / "est").string(),
        cli + " evaluate --estimates " + (d / "est").string() + " --truth " + (d / "sim" / "truth.csv").string() +
            " --out " + (d / "eval").string(),
        cli + " plot --report " + (d / "eval").string() + " --out " + (d / "plot").string()};
    for (const auto& cmd : commands) failures += std::system((cmd + " > /dev/null 2>&1").c_str()) != 0;
  }
  std::map<std::string, int> per_command;
  int files = 0, differing = 0;
  for (const char* sub : {"sim", "est", "eval", "plot"}) {
    const fs::path a = root / "a" / sub;
    if (!fs::exists(a)) continue;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), root / "a");
      ++files;
      ++per_command[sub];
      differing += slurp(e.path()) != slurp(root / "b" / rel);
    }
  }
  fs::remove_all(root);
  const bool all_present = per_command.size() == 4;
  return {failures == 0 && all_present && differing == 0,
          fmt("simulate/estimate/evaluate/plot run twice: %d command failures, %d files compared across %zu "
              "subcommands, %d differ",
              failures, files, per_command.size(), differing)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Jacobian suite", jacobian_suite},
      {2, "Dense-oracle equivalence", dense_oracle},
      {3, "Zero-noise recovery", zero_noise},
      {4, "Convergence behavior", convergence},
      {5, "Smoothed vs real-time ordering", smoothed_vs_realtime},
      {6, "Outlier gate", outlier_gate},
      {7, "Initialization", initialization},
      {8, "Relay-delay error check", relay_delay},
      {9, "Adversarial robustness", adversarial},
      {10, "Determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
