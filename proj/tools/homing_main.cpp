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

// homing: simulate, estimate, evaluate and plot target homing runs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "homing/eval.hpp"
#include "homing/pipeline.hpp"
#include "homing/sim.hpp"
#include "homing/stream.hpp"
#include "homing/svg.hpp"

namespace fs = std::filesystem;
using namespace homing;

namespace {

constexpr int kExitNonConverged = 1;
constexpr int kExitBadInput = 2;

struct SimulateArgs {
  std::string scenario = "perpendicular";
  std::uint64_t seed = 1;
  std::string out;
  double duration = 0.0;
  double relay_delay = 0.0;
  double noise_scale = 1.0;
  bool no_tof = false;
  double outlier_fraction = 0.0;
  double outlier_magnitude = 20.0;
};

struct EstimateArgs {
  std::string stream;
  std::string config;
  std::string out;
};

struct EvaluateArgs {
  std::string estimates;
  std::string truth;
  std::string out;
};

struct PlotArgs {
  std::string report;
  std::string out;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

SensorNoise scaled(SensorNoise n, double k) {
  n.accel_sigma *= k;
  n.gyro_sigma *= k;
  n.accel_bias *= k;
  n.gyro_bias *= k;
  n.dvl_sigma *= k;
  n.depth_sigma *= k;
  n.usbl_range_sigma *= k;
  n.usbl_angular_sigma *= k;
  n.usbl_angular_sigma_per_meter *= k;
  return n;
}

int run_simulate(const SimulateArgs& a) {
  ScenarioConfig cfg = default_scenario(parse_scenario_kind(a.scenario), a.seed);
  if (a.duration > 0.0) cfg.duration = a.duration;
  cfg.relay_delay = a.relay_delay;
  cfg.time_of_flight = !a.no_tof;
  cfg.noise = scaled(cfg.noise, a.noise_scale);
  validate(cfg);

  const GroundTruth truth = generate_truth(cfg);
  MeasurementStream stream = synthesize_measurements(truth, cfg);
  fs::create_directories(a.out);
  if (a.outlier_fraction > 0.0) {
    OutlierInjection inj = inject_outliers(stream, truth, a.outlier_fraction, a.outlier_magnitude, a.seed);
    stream = std::move(inj.stream);
    auto os = open_out(fs::path(a.out) / "outliers.csv");
    os << "t\n";
    for (auto i : inj.displaced) os << format_double(record_time(stream[i])) << '\n';
  }
  save_stream((fs::path(a.out) / "stream.txt").string(), stream);
  save_truth_csv((fs::path(a.out) / "truth.csv").string(), truth, 10.0);

  PipelineConfig pc;
  pc.chaser_start = truth.at(0.0).chaser;
  pc.chaser_time = 0.0;
  auto os = open_out(fs::path(a.out) / "estimator.cfg");
  os << "# estimator configuration for scenario " << to_string(cfg.kind) << ", seed " << a.seed << '\n';
  to_key_values(pc).write(os);
  std::cout << "wrote " << stream.size() << " records to " << a.out << '\n';
  return 0;
}

void write_summary(std::ostream& os, const PipelineResult& r) {
  char buf[256];
  const auto line = [&](const char* name, const EstimateSet& s) {
    std::snprintf(buf, sizeof buf, "%s: keyframes=%zu final_cost=%.9g iterations=%d converged=%s\n", name,
                  s.keyframes.size(), s.final_cost, s.summary.iterations, s.non_converged ? "no" : "yes");
    os << buf;
  };
  std::snprintf(buf, sizeof buf, "fixes=%zu skipped=%d buffered=%d accepted=%d rejected=%d init_time=%.6f\n",
                r.raw_fixes.size(), r.counts.skipped, r.counts.buffered, r.counts.accepted, r.counts.rejected,
                r.init_time);
  os << buf;
  line("realtime", r.realtime);
  line("smoothed", r.smoothed);
  std::snprintf(buf, sizeof buf, "speed=%.9g heading=%.9g\n", r.smoothed.speed, r.smoothed.heading.radians());
  os << buf;
}

int run_estimate(const EstimateArgs& a) {
  MeasurementStream stream;
  try {
    stream = load_stream(a.stream);
  } catch (const StreamParseError& e) {
    std::cerr << "error: " << a.stream << ": " << e.what() << '\n';
    return kExitBadInput;
  }
  const PipelineConfig cfg = pipeline_config_from(KeyValueConfig::Load(a.config));
  const PipelineResult r = run_pipeline(stream, cfg);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  save_track_csv((out / "realtime.csv").string(), track_from(r.realtime));
  save_track_csv((out / "smoothed.csv").string(), track_from(r.smoothed));
  save_track_csv((out / "deadreckoned.csv").string(), dead_reckon_target(r.raw_fixes, r.baseline_chaser));
  {
    auto os = open_out(out / "summary.txt");
    write_summary(os, r);
  }
  write_summary(std::cout, r);
  if (r.realtime.non_converged || r.smoothed.non_converged) {
    std::cerr << "error: optimization did not converge (" << r.smoothed.summary.message << ")\n";
    return kExitNonConverged;
  }
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  const fs::path in(a.estimates);
  std::vector<std::pair<EstimateKind, TargetTrack>> tracks;
  for (auto kind : {EstimateKind::RealTime, EstimateKind::Smoothed, EstimateKind::DeadReckoned}) {
    tracks.emplace_back(kind, load_track_csv((in / (to_string(kind) + ".csv")).string()));
  }
  const TruthTrack truth = load_truth_csv(a.truth);
  const ErrorReport report = evaluate_tracks(tracks, truth);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  {
    auto os = open_out(out / "errors.csv");
    write_errors_csv(os, report);
  }
  {
    auto os = open_out(out / "summary.csv");
    write_summary_csv(os, report);
  }
  {
    auto os = open_out(out / "report.txt");
    write_report_text(os, report);
  }
  for (const auto& [kind, track] : tracks) {
    const TargetTrack ref = sample_truth(truth, track.time);
    save_track_csv((out / ("anchored_" + to_string(kind) + ".csv")).string(), anchor_track(track, ref));
  }
  TargetTrack dense;
  for (std::size_t i = 0; i < truth.time.size(); ++i) {
    dense.time.push_back(truth.time[i]);
    dense.position.push_back(truth.target[i]);
    dense.speed.push_back(truth.speed[i]);
    dense.heading.push_back(truth.heading[i]);
    dense.chaser.push_back(truth.chaser[i]);
  }
  save_track_csv((out / "tracks.csv").string(), dense);
  write_report_text(std::cout, report);
  return 0;
}

int run_plot(const PlotArgs& a) {
  const fs::path in(a.report);
  ErrorReport report;
  {
    std::ifstream is(in / "errors.csv");
    if (!is) throw std::runtime_error("cannot open " + (in / "errors.csv").string());
    report = read_errors_csv(is);
  }
  std::vector<std::pair<std::string, TargetTrack>> tracks;
  tracks.emplace_back("truth", load_track_csv((in / "tracks.csv").string()));
  for (auto kind : {EstimateKind::Smoothed, EstimateKind::RealTime, EstimateKind::DeadReckoned}) {
    tracks.emplace_back(to_string(kind), load_track_csv((in / ("anchored_" + to_string(kind) + ".csv")).string()));
  }
  fs::create_directories(a.out);
  const fs::path out(a.out);
  {
    auto os = open_out(out / "trajectory.svg");
    write_trajectory_svg(os, tracks);
  }
  {
    auto os = open_out(out / "error_curves.svg");
    write_error_curves_svg(os, report);
  }
  {
    auto os = open_out(out / "error_bars.svg");
    write_error_bars_svg(os, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target homing estimator: simulate, estimate, evaluate, plot"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a measurement stream and ground truth");
  s->add_option("--scenario", sim.scenario, "perpendicular | parallel | adversarial")->capture_default_str();
  s->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--duration", sim.duration, "Override the scenario duration [s]");
  s->add_option("--relay-delay", sim.relay_delay, "Fix relay delay [s]")->capture_default_str();
  s->add_option("--noise-scale", sim.noise_scale, "Multiplier on every sensor noise sigma")->capture_default_str();
  s->add_flag("--no-tof", sim.no_tof, "Ignore acoustic time of flight");
  s->add_option("--outlier-fraction", sim.outlier_fraction, "Fraction of fixes displaced")->capture_default_str();
  s->add_option("--outlier-magnitude", sim.outlier_magnitude, "Minimum outlier displacement [m]")
      ->capture_default_str();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Run the estimator over a measurement stream");
  e->add_option("--stream", est.stream, "Measurement stream file")->required();
  e->add_option("--config", est.config, "Estimator configuration file")->required();
  e->add_option("--out", est.out, "Output directory")->required();

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Compare estimates against ground truth");
  v->add_option("--estimates", ev.estimates, "Directory written by estimate")->required();
  v->add_option("--truth", ev.truth, "Ground-truth CSV")->required();
  v->add_option("--out", ev.out, "Output directory")->required();

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Render SVG plots from an evaluation report");
  p->add_option("--report", pl.report, "Directory written by evaluate")->required();
  p->add_option("--out", pl.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return run_simulate(sim);
    if (*e) return run_estimate(est);
    if (*v) return run_evaluate(ev);
    if (*p) return run_plot(pl);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitBadInput;
  }
  return 0;
}
