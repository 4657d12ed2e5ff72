// Copyright 2026 The dmpflight Authors
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


// dmpflight command-line front end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "dmpflight/contraction.hpp"
#include "dmpflight/coupling.hpp"
#include "dmpflight/dmp.hpp"
#include "dmpflight/error.hpp"
#include "dmpflight/heli.hpp"
#include "dmpflight/io.hpp"
#include "dmpflight/learning.hpp"
#include "dmpflight/scenario.hpp"
#include "dmpflight/trajectory.hpp"

namespace {

using dmpflight::AngleUnit;
using dmpflight::Error;
using dmpflight::ErrorCode;
using dmpflight::Index;
using dmpflight::PrimitiveParams;
using dmpflight::SystemKind;
using dmpflight::Trajectory;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr double kReproductionWarning = 0.05;

struct GlobalOptions {
  std::string config;
  std::string out_dir = ".";
  double dt = 1e-3;
  bool dt_given = false;
  std::string units = "deg";

  AngleUnit unit() const { return dmpflight::angle_unit_from_string(units); }
};

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

double angle_in(double value, AngleUnit unit) {
  return unit == AngleUnit::kDegrees ? dmpflight::deg2rad(value) : value;
}

double angle_out(double value, AngleUnit unit) {
  return unit == AngleUnit::kDegrees ? dmpflight::rad2deg(value) : value;
}

// One closed period of sin(t) or cos(t).
Trajectory unit_wave(bool cosine, double dt) {
  const Index n = static_cast<Index>(std::lround(2.0 * dmpflight::kPi / dt)) + 1;
  const double step = 2.0 * dmpflight::kPi / static_cast<double>(n - 1);
  Trajectory traj = dmpflight::make_trajectory(n, 1, step, {"y"});
  for (Index k = 0; k < n; ++k) {
    const double t = traj.time(k);
    traj.y(k, 0) = cosine ? std::cos(t) : std::sin(t);
    traj.ydot(k, 0) = cosine ? -std::sin(t) : std::cos(t);
    traj.yddot(k, 0) = -traj.y(k, 0);
  }
  return traj;
}

Trajectory builtin_demo(const std::string& name, double dt) {
  if (name == "minimum-jerk") {
    dmpflight::WaypointPath path;
    path.dofs = {"y"};
    path.times = {0.0, 1.0};
    path.points = Eigen::MatrixXd(2, 1);
    path.points << 0.0, 1.0;
    return dmpflight::minimum_jerk_path(path, dt);
  }
  if (name == "sine") return unit_wave(false, dt);
  if (name == "cosine") return unit_wave(true, dt);
  if (name == "obstacle") return dmpflight::minimum_jerk_path(dmpflight::obstacle_waypoints(), dt);
  throw Error(ErrorCode::kInvalidArgument, "unknown built-in demonstration '" + name + "'");
}

// Applies NAME=VALUE goal overrides (VALUE in CLI angle units).
void apply_goals(const std::vector<std::string>& overrides, AngleUnit unit,
                 PrimitiveParams* params) {
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    dmpflight::require(eq != std::string::npos, ErrorCode::kInvalidArgument,
                       "goal override '" + item + "' is not NAME=VALUE");
    const std::string name = item.substr(0, eq);
    Index dof = -1;
    for (std::size_t d = 0; d < params->dof_names.size(); ++d) {
      if (params->dof_names[d] == name) dof = static_cast<Index>(d);
    }
    dmpflight::require(dof >= 0, ErrorCode::kInvalidArgument,
                       "goal override names unknown DOF '" + name + "'");
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "goal override '" + item + "' has no number");
    }
    const double rad = angle_in(value, unit);
    if (params->kind == SystemKind::kRhythmic) {
      params->baseline(dof) = rad;
    } else {
      params->goal(dof) = rad;
    }
  }
  dmpflight::validate(*params);
}

double default_duration(const PrimitiveParams& params) {
  return params.kind == SystemKind::kRhythmic ? 2.0 * dmpflight::kPi * params.tau : params.tau;
}

void emit_csv(const std::string& path, const Trajectory& traj, AngleUnit unit) {
  if (path.empty() || path == "-") {
    std::cout << dmpflight::format_trajectory_csv(traj, unit);
  } else {
    dmpflight::save_trajectory_csv(path, traj, unit);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_report(const char* label, const dmpflight::ContractionReport<double>& r) {
  std::printf("%-12s sup lambda %+.6g  margin %.3g  %s\n", label, r.sup_lambda, r.margin,
              r.contracting ? "contracting" : "NOT contracting");
}

// ---- learn ----------------------------------------------------------------

struct LearnOptions {
  std::string demo;
  std::string builtin;
  Index n_basis = 50;
  std::string kind = "discrete";
  std::string out;
};

int run_learn(const GlobalOptions& g, const LearnOptions& o) {
  dmpflight::require(o.demo.empty() != o.builtin.empty(), ErrorCode::kInvalidArgument,
                     "give exactly one of a demonstration CSV or --builtin");
  const Trajectory demo = o.builtin.empty() ? dmpflight::load_trajectory_csv(o.demo, g.unit())
                                            : builtin_demo(o.builtin, g.dt);
  const SystemKind kind = dmpflight::system_kind_from_string(o.kind);
  const PrimitiveParams params = dmpflight::learn(demo, o.n_basis, kind);
  const double err = dmpflight::relative_reproduction_error(params, demo);
  const std::string out = o.out.empty() ? join(g.out_dir, "params.json") : o.out;
  ensure_dir(std::filesystem::path(out).parent_path().string());
  dmpflight::save_params(out, params);
  std::printf("learned %s primitive: %lld DOF, %lld basis functions, tau %.6g s\n",
              dmpflight::to_string(kind), static_cast<long long>(params.dofs()),
              static_cast<long long>(params.basis.size()), params.tau);
  std::printf("reproduction RMS: %.4g%% of range\n", 100.0 * err);
  std::printf("wrote %s\n", out.c_str());
  if (err > kReproductionWarning) {
    std::fprintf(stderr,
                 "warning: reproduction RMS %.2f%% exceeds %.0f%% of range; "
                 "consider more basis functions\n",
                 100.0 * err, 100.0 * kReproductionWarning);
  }
  return 0;
}

// ---- rollout --------------------------------------------------------------

struct RolloutOptions {
  std::string params;
  double duration = 0.0;
  std::vector<std::string> goals;
  std::string out;
};

int run_rollout(const GlobalOptions& g, const RolloutOptions& o) {
  PrimitiveParams params = dmpflight::load_params(o.params);
  apply_goals(o.goals, g.unit(), &params);
  const double duration = o.duration > 0.0 ? o.duration : default_duration(params);
  emit_csv(o.out, dmpflight::rollout(params, g.dt, duration), g.unit());
  return 0;
}

// ---- segment --------------------------------------------------------------

struct SegmentOptions {
  std::string demo;
  std::string dof = "theta";
};

int run_segment(const GlobalOptions& g, const SegmentOptions& o) {
  const Trajectory demo = dmpflight::load_trajectory_csv(o.demo, g.unit());
  const Index dof = demo.dof_index(o.dof);
  dmpflight::require(dof >= 0, ErrorCode::kInvalidArgument,
                     "demonstration has no DOF '" + o.dof + "'");
  const dmpflight::SegmentationResult seg = dmpflight::segment_at_peak(demo, dof);
  ensure_dir(g.out_dir);
  dmpflight::save_trajectory_csv(join(g.out_dir, "segment1.csv"),
                                 dmpflight::differentiate(seg.first), g.unit());
  dmpflight::save_trajectory_csv(join(g.out_dir, "segment2.csv"),
                                 dmpflight::differentiate(seg.second), g.unit());
  std::printf("split at sample %lld (t = %.6g s, %s = %.6g)\n",
              static_cast<long long>(seg.split_index), demo.time(seg.split_index),
              o.dof.c_str(), angle_out(demo.y(seg.split_index, dof), g.unit()));
  return 0;
}

// ---- couple ---------------------------------------------------------------

struct CoupleOptions {
  std::vector<std::string> params;
  std::string mode = "one_way";
  double gain = 0.0;
  double activation = 0.85;
  double duration = 0.0;
  bool concatenate = false;
  bool start_at_first_goal = false;
};

int run_couple(const GlobalOptions& g, const CoupleOptions& o) {
  const PrimitiveParams a = dmpflight::load_params(o.params.at(0));
  const PrimitiveParams b = dmpflight::load_params(o.params.at(1));
  dmpflight::CouplingSpec spec;
  spec.mode = dmpflight::coupling_mode_from_string(o.mode);
  spec.gain = o.gain;
  spec.activation_phase = o.activation;
  ensure_dir(g.out_dir);

  if (o.concatenate) {
    dmpflight::ConcatenateOptions opts;
    if (o.start_at_first_goal) opts.second_start = a.goal;
    const dmpflight::Concatenation c = dmpflight::concatenate(a, b, spec, g.dt, opts);
    dmpflight::save_trajectory_csv(join(g.out_dir, "merged.csv"), c.merged, g.unit());
    std::printf("junction at sample %lld (t = %.6g s), coupling %s\n",
                static_cast<long long>(c.junction_index), c.merged.time(c.junction_index),
                c.coupled ? "on" : "off");
    std::printf("junction jump: position %.3g rad, velocity %.3g rad/s, acceleration %.3g\n",
                c.jump.position, c.jump.velocity, c.jump.acceleration);
    return 0;
  }

  const double duration =
      o.duration > 0.0 ? o.duration : std::max(default_duration(a), default_duration(b));
  const bool one_way = spec.mode == dmpflight::CouplingMode::kOneWay;
  const dmpflight::CoupledRollout r = one_way
                                          ? dmpflight::one_way_rollout(a, b, spec, g.dt, duration)
                                          : dmpflight::two_way_rollout(a, b, spec, g.dt, duration);
  dmpflight::save_trajectory_csv(join(g.out_dir, "leader.csv"), r.leader, g.unit());
  dmpflight::save_trajectory_csv(join(g.out_dir, "follower.csv"), r.follower, g.unit());
  std::printf("gap: initial %.6g, final %.6g (rad)\n", r.gap(0), r.gap(r.gap.size() - 1));
  if (r.activation_index < 0) {
    std::printf("coupling never activated\n");
    return 0;
  }
  const auto cert = one_way ? dmpflight::one_way_certificate(a, spec, r)
                            : dmpflight::two_way_certificate(a, spec, r);
  dmpflight::write_text_file(join(g.out_dir, "contraction.csv"),
                             dmpflight::contraction_csv({{"coupling", &cert}}));
  print_report("coupling", cert);
  return 0;
}

// ---- blend ----------------------------------------------------------------

struct BlendOptions {
  std::vector<std::string> params;
  double alpha = 0.5;
  double beta = 0.5;
  double duration = 0.0;
  std::string out;
  std::string params_out;
};

int run_blend(const GlobalOptions& g, const BlendOptions& o) {
  const PrimitiveParams a = dmpflight::load_params(o.params.at(0));
  const PrimitiveParams b = dmpflight::load_params(o.params.at(1));
  const PrimitiveParams mixed = dmpflight::blend(a, b, o.alpha, o.beta);
  if (!o.params_out.empty()) dmpflight::save_params(o.params_out, mixed);
  const double duration = o.duration > 0.0 ? o.duration : default_duration(mixed);
  emit_csv(o.out, dmpflight::rollout(mixed, g.dt, duration), g.unit());
  return 0;
}

// ---- check ----------------------------------------------------------------

struct CheckOptions {
  std::string params;
  double duration = 0.0;
  double margin = 1e-6;
};

int run_check(const GlobalOptions& g, const CheckOptions& o) {
  const PrimitiveParams params = dmpflight::load_params(o.params);
  const double duration = o.duration > 0.0 ? o.duration : 1.25 * params.tau;
  const auto h = dmpflight::check_primitive_hierarchy(params, g.dt, duration, o.margin);
  ensure_dir(g.out_dir);
  dmpflight::write_text_file(join(g.out_dir, "contraction.csv"),
                             dmpflight::contraction_csv({{"canonical", &h.top},
                                                         {"transform", &h.bottom}}));
  print_report("canonical", h.top);
  print_report("transform", h.bottom);
  std::printf("interconnection bound %.6g\n", h.interconnection_bound);
  const bool ok = h.top.contracting && h.bottom.contracting &&
                  std::isfinite(h.interconnection_bound);
  std::printf("verdict: %s\n", ok ? "contracting" : "NOT contracting");
  return ok ? 0 : kExitNumerical;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
  std::string reference;
  std::string out;
};

int run_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  dmpflight::HeliParams heli;
  dmpflight::ControllerGains gains;
  double dt = g.dt;
  if (!g.config.empty()) {
    dmpflight::apply_simulation_config(dmpflight::read_text_file(g.config), &heli, &gains, &dt);
  }
  if (g.dt_given) dt = g.dt;
  Trajectory reference = dmpflight::load_trajectory_csv(o.reference, g.unit());
  if (!reference.has_derivatives()) reference = dmpflight::differentiate(reference);
  const dmpflight::TrackingResult r = dmpflight::simulate_tracking(reference, heli, gains, dt);
  const std::string out = o.out.empty() ? join(g.out_dir, "tracking.csv") : o.out;
  ensure_dir(std::filesystem::path(out).parent_path().string());
  dmpflight::save_trajectory_csv(out, r.actual, g.unit());
  std::printf("tracking RMS: psi %.4f deg, theta %.4f deg\n", dmpflight::rad2deg(r.rms_psi),
              dmpflight::rad2deg(r.rms_theta));
  return 0;
}

// ---- pipeline -------------------------------------------------------------

struct PipelineOptions {
  std::string scenario;
  bool timestamp = false;
};

int run_pipeline_cmd(const GlobalOptions& g, const PipelineOptions& o) {
  dmpflight::ScenarioConfig config = dmpflight::load_scenario(o.scenario);
  if (!g.config.empty()) {
    dmpflight::apply_simulation_config(dmpflight::read_text_file(g.config), &config.heli,
                                       &config.gains, &config.dt);
  }
  if (g.dt_given) config.dt = g.dt;
  const dmpflight::PipelineResult r = dmpflight::run_pipeline(config);
  dmpflight::write_pipeline_outputs(g.out_dir, config, r, o.timestamp ? utc_timestamp() : "");

  const auto& jump = r.merged.jump;
  std::printf("scenario %s: outputs in %s\n", config.name.c_str(), g.out_dir.c_str());
  std::printf("reproduction error: %.4f%%, %.4f%%\n", 100.0 * r.reproduction_error[0],
              100.0 * r.reproduction_error[1]);
  std::printf("junction jump: position %.3g rad, velocity %.3g rad/s (%s)\n", jump.position,
              jump.velocity, r.junction_continuous ? "continuous" : "DISCONTINUOUS");
  std::printf("tracking RMS: psi %.4f deg, theta %.4f deg (%s)\n",
              dmpflight::rad2deg(r.tracking.rms_psi), dmpflight::rad2deg(r.tracking.rms_theta),
              r.tracking_within_threshold ? "within threshold" : "THRESHOLD EXCEEDED");
  std::printf("contraction: %s\n", r.contracting ? "contracting" : "NOT contracting");
  return r.contracting ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic movement primitives, contraction checks and helicopter tracking."};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Simulation config (heli, gains, dt) in JSON");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  auto* dt_opt = app.add_option("--dt", g.dt, "Integration step in seconds")
                     ->check(CLI::PositiveNumber);
  app.add_option("--units", g.units, "Angle unit of CSV files and goal overrides")
      ->check(CLI::IsMember({"deg", "rad"}));

  LearnOptions learn;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a primitive from a demonstration");
  learn_cmd->add_option("demo", learn.demo, "Demonstration CSV");
  learn_cmd->add_option("--builtin", learn.builtin, "Built-in demonstration")
      ->check(CLI::IsMember({"minimum-jerk", "sine", "cosine", "obstacle"}));
  learn_cmd->add_option("--n-basis", learn.n_basis, "Basis functions per DOF")
      ->check(CLI::Range(1, 100000));
  learn_cmd->add_option("--kind", learn.kind, "Primitive kind")
      ->check(CLI::IsMember({"discrete", "rhythmic", "filtered"}));
  learn_cmd->add_option("--out", learn.out, "Params file (default <out-dir>/params.json)");

  RolloutOptions roll;
  auto* roll_cmd = app.add_subcommand("rollout", "Integrate a primitive to a CSV trajectory");
  roll_cmd->add_option("params", roll.params, "Params file")->required();
  roll_cmd->add_option("--duration", roll.duration, "Duration in seconds (default tau)");
  roll_cmd->add_option("--goal", roll.goals, "Goal override NAME=VALUE (repeatable)");
  roll_cmd->add_option("--out", roll.out, "Output CSV (default stdout)");

  SegmentOptions seg;
  auto* seg_cmd = app.add_subcommand("segment", "Split a demonstration at the peak of one DOF");
  seg_cmd->add_option("demo", seg.demo, "Demonstration CSV")->required();
  seg_cmd->add_option("--dof", seg.dof, "DOF whose maximum marks the split");

  CoupleOptions couple;
  auto* couple_cmd = app.add_subcommand(
      "couple", "Couple two primitives (leader then follower, or first then second)");
  couple_cmd->add_option("params", couple.params, "Two params files")->required()->expected(2);
  couple_cmd->add_option("--mode", couple.mode, "Coupling mode")
      ->check(CLI::IsMember({"one_way", "two_way"}));
  couple_cmd->add_option("--gain", couple.gain, "Diffusive coupling gain K");
  couple_cmd->add_option("--activation", couple.activation,
                         "Activation phase as a fraction of the first tau");
  couple_cmd->add_option("--duration", couple.duration, "Duration in seconds");
  couple_cmd->add_flag("--concatenate", couple.concatenate,
                       "Merge the two primitives into one trajectory");
  couple_cmd->add_flag("--start-at-first-goal", couple.start_at_first_goal,
                       "Start the second primitive at the first goal");

  BlendOptions blend;
  auto* blend_cmd = app.add_subcommand("blend", "Blend the weights of two primitives");
  blend_cmd->add_option("params", blend.params, "Two params files")->required()->expected(2);
  blend_cmd->add_option("--alpha", blend.alpha, "Weight of the first primitive");
  blend_cmd->add_option("--beta", blend.beta, "Weight of the second primitive");
  blend_cmd->add_option("--duration", blend.duration, "Rollout duration in seconds");
  blend_cmd->add_option("--out", blend.out, "Output CSV (default stdout)");
  blend_cmd->add_option("--params-out", blend.params_out, "Write the blended params here");

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Contraction check of a primitive hierarchy");
  check_cmd->add_option("params", check.params, "Params file")->required();
  check_cmd->add_option("--duration", check.duration, "Duration in seconds (default 1.25 tau)");
  check_cmd->add_option("--margin", check.margin, "Required contraction margin");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Track a psi/theta reference with the helicopter");
  sim_cmd->add_option("reference", sim.reference, "Reference CSV")->required();
  sim_cmd->add_option("--out", sim.out, "Output CSV (default <out-dir>/tracking.csv)");

  PipelineOptions pipe;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run a scenario end to end");
  pipe_cmd->add_option("scenario", pipe.scenario, "Scenario file")->required();
  pipe_cmd->add_flag("--timestamp", pipe.timestamp, "Record the run time in summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  g.dt_given = dt_opt->count() > 0;

  try {
    if (*learn_cmd) return run_learn(g, learn);
    if (*roll_cmd) return run_rollout(g, roll);
    if (*seg_cmd) return run_segment(g, seg);
    if (*couple_cmd) return run_couple(g, couple);
    if (*blend_cmd) return run_blend(g, blend);
    if (*check_cmd) return run_check(g, check);
    if (*sim_cmd) return run_simulate(g, sim);
    if (*pipe_cmd) return run_pipeline_cmd(g, pipe);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", dmpflight::to_string(e.code()), e.what());
    return dmpflight::classify(e.code()) == dmpflight::ErrorClass::kData ? kExitData
                                                                         : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
