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

#include "dmpflight/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dmpflight/error.hpp"
#include "dmpflight/io.hpp"

namespace dmpflight {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  require(j.is_object(), ErrorCode::kParse, where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw Error(ErrorCode::kParse, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

void read_deg_if(const json& j, const char* key, double* out_rad) {
  if (j.contains(key)) *out_rad = deg2rad(j.at(key).get<double>());
}

void apply_heli(const json& j, HeliParams* p) {
  check_keys(j, "heli", {"j_xx", "j_yy", "j_zz", "mass", "rotor_mass", "beam_length",
                         "rotor_arm", "l_theta", "l_phi", "theta_0_deg", "s0", "s0_roll", "rho",
                         "g_grav", "t_max"});
  read_if(j, "j_xx", &p->j_xx);
  read_if(j, "j_yy", &p->j_yy);
  read_if(j, "j_zz", &p->j_zz);
  read_if(j, "mass", &p->mass);
  read_if(j, "rotor_mass", &p->rotor_mass);
  read_if(j, "beam_length", &p->beam_length);
  read_if(j, "rotor_arm", &p->rotor_arm);
  read_if(j, "l_theta", &p->l_theta);
  read_if(j, "l_phi", &p->l_phi);
  read_deg_if(j, "theta_0_deg", &p->theta_0);
  read_if(j, "s0", &p->s0);
  read_if(j, "s0_roll", &p->s0_roll);
  read_if(j, "rho", &p->rho);
  read_if(j, "g_grav", &p->g_grav);
  read_if(j, "t_max", &p->t_max);
  validate(*p);
}

void apply_gains(const json& j, ControllerGains* g) {
  check_keys(j, "gains",
             {"k_p", "k_d", "k_p_roll", "k_d_roll", "roll_limit_deg", "roll_guard_deg"});
  read_if(j, "k_p", &g->k_p);
  read_if(j, "k_d", &g->k_d);
  read_if(j, "k_p_roll", &g->k_p_roll);
  read_if(j, "k_d_roll", &g->k_d_roll);
  read_deg_if(j, "roll_limit_deg", &g->roll_limit);
  read_deg_if(j, "roll_guard_deg", &g->roll_guard);
}

WaypointPath parse_waypoints(const json& j) {
  check_keys(j, "synthetic", {"dofs", "waypoints"});
  WaypointPath path;
  path.dofs = j.at("dofs").get<std::vector<std::string>>();
  const json& points = j.at("waypoints");
  require(points.is_array() && points.size() >= 2, ErrorCode::kParse,
          "synthetic demonstration needs at least two waypoints");
  path.points.resize(static_cast<Index>(points.size()), static_cast<Index>(path.dofs.size()));
  std::set<std::string> allowed(path.dofs.begin(), path.dofs.end());
  allowed.insert("t");
  for (size_t i = 0; i < points.size(); ++i) {
    check_keys(points[i], "waypoint", allowed);
    path.times.push_back(points[i].at("t").get<double>());
    for (size_t d = 0; d < path.dofs.size(); ++d) {
      path.points(static_cast<Index>(i), static_cast<Index>(d)) =
          deg2rad(points[i].at(path.dofs[d]).get<double>());
    }
  }
  return path;
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

json report_json(const ContractionReport<double>& r) {
  return {{"contracting", r.contracting},
          {"sup_lambda_max", r.sup_lambda},
          {"rate", r.rate},
          {"margin", r.margin},
          {"samples", r.samples.size()}};
}

json degrees_map(const PrimitiveParams& p) {
  json out = json::object();
  for (Index d = 0; d < p.dofs(); ++d) out[p.dof_names[static_cast<size_t>(d)]] = rad2deg(p.goal(d));
  return out;
}

}  // namespace

Trajectory minimum_jerk_path(const WaypointPath& path, double dt) {
  const Index m = static_cast<Index>(path.times.size());
  require(m >= 2 && path.points.rows() == m &&
              path.points.cols() == static_cast<Index>(path.dofs.size()),
          ErrorCode::kInvalidArgument, "waypoint table is inconsistent");
  for (Index i = 1; i < m; ++i) {
    require(path.times[static_cast<size_t>(i)] > path.times[static_cast<size_t>(i - 1)],
            ErrorCode::kInvalidArgument, "waypoint times must increase");
  }
  const double t0 = path.times.front();
  const Index n = sample_count(path.times.back() - t0, dt);
  Trajectory traj = make_trajectory(n, path.points.cols(), dt, path.dofs);
  Index seg = 0;
  for (Index k = 0; k < n; ++k) {
    const double t = std::min(t0 + traj.time(k), path.times.back());
    while (seg + 2 < m && t > path.times[static_cast<size_t>(seg + 1)]) ++seg;
    const double ta = path.times[static_cast<size_t>(seg)];
    const double len = path.times[static_cast<size_t>(seg + 1)] - ta;
    const double s = std::clamp((t - ta) / len, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double pos = 10 * s3 - 15 * s3 * s + 6 * s3 * s2;
    const double vel = (30 * s2 - 60 * s3 + 30 * s3 * s) / len;
    const double acc = (60 * s - 180 * s2 + 120 * s3) / (len * len);
    const Eigen::RowVectorXd delta = path.points.row(seg + 1) - path.points.row(seg);
    traj.y.row(k) = path.points.row(seg) + pos * delta;
    traj.ydot.row(k) = vel * delta;
    traj.yddot.row(k) = acc * delta;
  }
  return traj;
}

WaypointPath obstacle_waypoints() {
  WaypointPath path;
  path.dofs = {"psi", "theta"};
  path.times = {0.0, 8.0, 14.0};
  path.points.resize(3, 2);
  path.points << 0.0, 0.0, deg2rad(220.0), deg2rad(60.0), deg2rad(317.0), deg2rad(28.0);
  return path;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& base_dir) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text, nullptr, true, true);
    check_keys(j, "scenario", {"name", "dt", "demonstration", "segmentation", "learning",
                               "goals", "coupling", "heli", "gains", "thresholds",
                               "contraction_margin"});
    read_if(j, "name", &c.name);
    read_if(j, "dt", &c.dt);
    require(c.dt > 0.0, ErrorCode::kParse, "dt must be positive");
    if (j.contains("demonstration")) {
      const json& d = j.at("demonstration");
      check_keys(d, "demonstration", {"file", "synthetic"});
      require(d.contains("file") != d.contains("synthetic"), ErrorCode::kParse,
              "demonstration needs exactly one of 'file' or 'synthetic'");
      if (d.contains("file")) {
        const std::filesystem::path file = d.at("file").get<std::string>();
        c.demo_file = (file.is_absolute() ? file : std::filesystem::path(base_dir) / file).string();
      } else {
        c.waypoints = parse_waypoints(d.at("synthetic"));
      }
    }
    if (j.contains("segmentation")) {
      check_keys(j.at("segmentation"), "segmentation", {"dof"});
      read_if(j.at("segmentation"), "dof", &c.segment_dof);
    }
    if (j.contains("learning")) {
      check_keys(j.at("learning"), "learning", {"n_basis"});
      read_if(j.at("learning"), "n_basis", &c.n_basis);
      require(c.n_basis >= 2, ErrorCode::kParse, "n_basis must be at least 2");
    }
    if (j.contains("goals")) {
      const json& g = j.at("goals");
      require(g.is_array() && g.size() <= 2, ErrorCode::kParse,
              "goals must be a list of at most two objects");
      for (size_t i = 0; i < g.size(); ++i) {
        require(g[i].is_object(), ErrorCode::kParse, "goal override must be an object");
        for (const auto& item : g[i].items()) {
          if (!c.demo_file) {
            const auto& dofs = c.waypoints.dofs;
            require(std::find(dofs.begin(), dofs.end(), item.key()) != dofs.end(),
                    ErrorCode::kParse, "goal override for undeclared DOF '" + item.key() + "'");
          }
          c.goals[i][item.key()] = deg2rad(item.value().get<double>());
        }
      }
    }
    if (j.contains("coupling")) {
      const json& k = j.at("coupling");
      check_keys(k, "coupling",
                 {"mode", "gain", "activation_phase", "second_start", "settle_fraction"});
      if (k.contains("mode")) c.coupling.mode = coupling_mode_from_string(k.at("mode").get<std::string>());
      read_if(k, "gain", &c.coupling.gain);
      read_if(k, "activation_phase", &c.coupling.activation_phase);
      read_if(k, "settle_fraction", &c.settle_fraction);
      if (k.contains("second_start")) {
        const std::string start = k.at("second_start").get<std::string>();
        require(start == "first_goal" || start == "learned", ErrorCode::kParse,
                "second_start must be 'first_goal' or 'learned'");
        c.second_start_at_first_goal = start == "first_goal";
      }
      validate(c.coupling);
    }
    if (j.contains("heli")) apply_heli(j.at("heli"), &c.heli);
    if (j.contains("gains")) apply_gains(j.at("gains"), &c.gains);
    if (j.contains("thresholds")) {
      const json& t = j.at("thresholds");
      check_keys(t, "thresholds",
                 {"tracking_rms_deg", "junction_position_rad", "junction_velocity_rad_s"});
      read_if(t, "tracking_rms_deg", &c.thresholds.tracking_rms_deg);
      read_if(t, "junction_position_rad", &c.thresholds.junction_position);
      read_if(t, "junction_velocity_rad_s", &c.thresholds.junction_velocity);
    }
    read_if(j, "contraction_margin", &c.contraction_margin);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, std::string("scenario: ") + e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_text_file(path), dir.empty() ? "." : dir);
}

void apply_simulation_config(const std::string& text, HeliParams* heli, ControllerGains* gains,
                             double* dt) {
  try {
    const json j = json::parse(text, nullptr, true, true);
    require(j.is_object(), ErrorCode::kParse, "config must be an object");
    if (j.contains("heli")) apply_heli(j.at("heli"), heli);
    if (j.contains("gains")) apply_gains(j.at("gains"), gains);
    if (j.contains("dt")) *dt = j.at("dt").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
}

PipelineResult run_pipeline(const ScenarioConfig& config) {
  PipelineResult r;
  r.demo = stage("demonstration", [&] {
    return config.demo_file ? load_trajectory_csv(*config.demo_file, AngleUnit::kDegrees)
                            : minimum_jerk_path(config.waypoints, config.dt);
  });
  r.segments = stage("segmentation", [&] {
    const Index dof = r.demo.dof_index(config.segment_dof);
    require(dof >= 0, ErrorCode::kInvalidArgument,
            "segmentation DOF '" + config.segment_dof + "' not in demonstration");
    return segment_at_peak(r.demo, dof);
  });
  stage("learning", [&] {
    const Demonstration* halves[2] = {&r.segments.first, &r.segments.second};
    for (int i = 0; i < 2; ++i) {
      r.primitives[i] = learn(*halves[i], config.n_basis, SystemKind::kDiscrete);
      r.reproduction_error[i] = relative_reproduction_error(r.primitives[i], *halves[i]);
    }
    return 0;
  });
  stage("retarget", [&] {
    for (int i = 0; i < 2; ++i) {
      for (const auto& [name, goal] : config.goals[static_cast<size_t>(i)]) {
        const auto& names = r.primitives[i].dof_names;
        const auto it = std::find(names.begin(), names.end(), name);
        require(it != names.end(), ErrorCode::kInvalidArgument,
                "goal override for unknown DOF '" + name + "'");
        r.primitives[i].goal(it - names.begin()) = goal;
      }
      validate(r.primitives[i]);
    }
    return 0;
  });
  r.merged = stage("concatenation", [&] {
    ConcatenateOptions options;
    options.settle_fraction = config.settle_fraction;
    if (config.second_start_at_first_goal) options.second_start = r.primitives[0].goal;
    return concatenate(r.primitives[0], r.primitives[1], config.coupling, config.dt, options);
  });
  stage("contraction", [&] {
    r.contracting = true;
    for (int i = 0; i < 2; ++i) {
      const PrimitiveParams& p = r.primitives[i];
      r.hierarchy[i] = check_primitive_hierarchy(p, config.dt, p.tau * (1.0 + config.settle_fraction),
                                                 config.contraction_margin);
      r.contracting = r.contracting && r.hierarchy[i].top.contracting &&
                      r.hierarchy[i].bottom.contracting;
    }
    if (r.merged.coupled) {
      CoupledRollout view;
      view.leader = r.merged.leader;
      view.follower = slice(r.merged.merged, r.merged.junction_index, r.merged.merged.samples() - 1);
      view.activation_index = 0;
      r.coupling_certificate =
          one_way_certificate(r.primitives[1], config.coupling, view, config.contraction_margin);
      r.contracting = r.contracting && r.coupling_certificate->contracting;
    }
    return 0;
  });
  r.junction_continuous = r.merged.jump.position < config.thresholds.junction_position &&
                          r.merged.jump.velocity < config.thresholds.junction_velocity;
  r.tracking = stage("tracking", [&] {
    return simulate_tracking(r.merged.merged, config.heli, config.gains, config.dt);
  });
  r.tracking_within_threshold =
      rad2deg(r.tracking.rms_psi) <= config.thresholds.tracking_rms_deg &&
      rad2deg(r.tracking.rms_theta) <= config.thresholds.tracking_rms_deg;
  return r;
}

std::string pipeline_summary_json(const ScenarioConfig& config, const PipelineResult& r,
                                  const std::string& timestamp) {
  json j;
  j["scenario"] = config.name;
  if (!timestamp.empty()) j["timestamp"] = timestamp;
  j["thresholds"] = {{"note", "artifact-defined thresholds"},
                     {"tracking_rms_deg", config.thresholds.tracking_rms_deg},
                     {"junction_position_rad", config.thresholds.junction_position},
                     {"junction_velocity_rad_s", config.thresholds.junction_velocity}};
  j["segmentation"] = {{"dof", config.segment_dof},
                       {"split_index", r.segments.split_index},
                       {"split_time_s", r.demo.time(r.segments.split_index)}};
  json prims = json::array();
  for (int i = 0; i < 2; ++i) {
    prims.push_back({{"tau_s", r.primitives[i].tau},
                     {"goal_deg", degrees_map(r.primitives[i])},
                     {"reproduction_error", r.reproduction_error[i]}});
  }
  j["primitives"] = prims;
  const Concatenation& m = r.merged;
  j["junction"] = {{"index", m.junction_index},
                   {"time_s", m.merged.time(m.junction_index)},
                   {"coupled", m.coupled},
                   {"activation_phase", config.coupling.activation_phase},
                   {"gain", config.coupling.gain},
                   {"position_jump_rad", m.jump.position},
                   {"velocity_jump_rad_s", m.jump.velocity},
                   {"acceleration_jump_rad_s2", m.jump.acceleration},
                   {"continuous", r.junction_continuous}};
  j["merged"] = {{"samples", m.merged.samples()}, {"duration_s", m.merged.duration()}};
  j["tracking"] = {{"rms_deg", {{"psi", rad2deg(r.tracking.rms_psi)},
                                {"theta", rad2deg(r.tracking.rms_theta)}}},
                   {"max_abs_roll_deg", rad2deg(r.tracking.actual.y.col(2).cwiseAbs().maxCoeff())},
                   {"within_threshold", r.tracking_within_threshold}};
  json hierarchy = json::array();
  for (int i = 0; i < 2; ++i) {
    hierarchy.push_back({{"canonical", report_json(r.hierarchy[i].top)},
                         {"transformation", report_json(r.hierarchy[i].bottom)},
                         {"interconnection_bound", r.hierarchy[i].interconnection_bound}});
  }
  j["contraction"] = {{"contracting", r.contracting},
                      {"hierarchy", hierarchy},
                      {"coupling", r.coupling_certificate ? report_json(*r.coupling_certificate)
                                                          : json(nullptr)}};
  json flags = json::array();
  if (!r.junction_continuous) flags.push_back("junction_discontinuous");
  if (!m.coupled) flags.push_back("coupling_disabled");
  if (!r.tracking_within_threshold) flags.push_back("tracking_threshold_exceeded");
  if (!r.contracting) flags.push_back("not_contracting");
  j["flags"] = flags;
  return j.dump(2) + "\n";
}

std::string contraction_csv(
    const std::vector<std::pair<std::string, const ContractionReport<double>*>>& reports) {
  std::string out = "source,t,lambda_max\n";
  char buf[64];
  for (const auto& [name, report] : reports) {
    if (!report) continue;
    for (const auto& s : report->samples) {
      std::snprintf(buf, sizeof(buf), ",%.12g,%.12g\n", s.t, s.lambda_max);
      out += name + buf;
    }
  }
  return out;
}

void write_pipeline_outputs(const std::string& out_dir, const ScenarioConfig& config,
                            const PipelineResult& r, const std::string& timestamp) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
  auto with_derivatives = [](const Trajectory& t) {
    return t.has_derivatives() ? t : differentiate(t);
  };
  save_trajectory_csv(path("demo.csv"), with_derivatives(r.demo), AngleUnit::kDegrees);
  save_trajectory_csv(path("segment1.csv"), with_derivatives(r.segments.first), AngleUnit::kDegrees);
  save_trajectory_csv(path("segment2.csv"), with_derivatives(r.segments.second), AngleUnit::kDegrees);
  save_params(path("primitive1.json"), r.primitives[0]);
  save_params(path("primitive2.json"), r.primitives[1]);
  save_trajectory_csv(path("merged.csv"), r.merged.merged, AngleUnit::kDegrees);
  save_trajectory_csv(path("tracking.csv"), r.tracking.actual, AngleUnit::kDegrees);
  write_text_file(path("contraction.csv"),
                  contraction_csv({{"primitive1_canonical", &r.hierarchy[0].top},
                                   {"primitive1_transformation", &r.hierarchy[0].bottom},
                                   {"primitive2_canonical", &r.hierarchy[1].top},
                                   {"primitive2_transformation", &r.hierarchy[1].bottom},
                                   {"coupling", r.coupling_certificate ? &*r.coupling_certificate
                                                                       : nullptr}}));
  write_text_file(path("summary.json"), pipeline_summary_json(config, r, timestamp));
}

}  // namespace dmpflight
