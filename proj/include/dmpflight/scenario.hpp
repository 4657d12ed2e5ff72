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

#ifndef DMPFLIGHT_SCENARIO_HPP_
#define DMPFLIGHT_SCENARIO_HPP_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmpflight/contraction.hpp"
#include "dmpflight/coupling.hpp"
#include "dmpflight/dmp.hpp"
#include "dmpflight/heli.hpp"
#include "dmpflight/learning.hpp"
#include "dmpflight/trajectory.hpp"

namespace dmpflight {

/// Waypoints joined by minimum-jerk segments with zero velocity and
/// acceleration at every waypoint. Angles in radians.
struct WaypointPath {
  std::vector<std::string> dofs;
  std::vector<double> times;
  Eigen::MatrixXd points;  // One row per waypoint.
};

Trajectory minimum_jerk_path(const WaypointPath& path, double dt);

/// The obstacle maneuver: rest, over the obstacle top, down to the stop.
WaypointPath obstacle_waypoints();

struct Thresholds {
  double tracking_rms_deg = 2.0;
  double junction_position = 1e-3;  // rad
  double junction_velocity = 1e-2;  // rad/s
};

struct ScenarioConfig {
  std::string name = "scenario";
  double dt = 1e-3;
  std::optional<std::string> demo_file;  // CSV in degrees; otherwise `waypoints`.
  WaypointPath waypoints = obstacle_waypoints();
  std::string segment_dof = "theta";
  Index n_basis = 50;
  std::array<std::map<std::string, double>, 2> goals;  // rad, per primitive.
  CouplingSpec coupling;
  bool second_start_at_first_goal = false;
  double settle_fraction = 0.25;
  HeliParams heli;
  ControllerGains gains;
  Thresholds thresholds;
  double contraction_margin = 1e-6;
};

/// JSON with comments. Angles in degrees; relative paths resolve against
/// `base_dir`. Unknown keys are rejected.
ScenarioConfig parse_scenario(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);

/// Applies the "heli", "gains" and "dt" sections of a config document.
void apply_simulation_config(const std::string& text, HeliParams* heli, ControllerGains* gains,
                             double* dt);

struct PipelineResult {
  Trajectory demo;
  SegmentationResult segments;
  std::array<PrimitiveParams, 2> primitives;  // After goal retargeting.
  std::array<double, 2> reproduction_error{};  // Relative, before retargeting.
  Concatenation merged;
  TrackingResult tracking;
  std::array<HierarchyReport<double>, 2> hierarchy;
  std::optional<ContractionReport<double>> coupling_certificate;

  bool junction_continuous = false;
  bool tracking_within_threshold = false;
  bool contracting = false;
};

/// Runs demonstration, segmentation, learning, retargeting, concatenation,
/// contraction checks and tracking. Errors are re-thrown with the stage name
/// prefixed.
PipelineResult run_pipeline(const ScenarioConfig& config);

/// Deterministic summary; `timestamp` is included only when non-empty.
std::string pipeline_summary_json(const ScenarioConfig& config, const PipelineResult& result,
                                  const std::string& timestamp = "");

/// Writes demo.csv, segment1.csv, segment2.csv, primitive1.json,
/// primitive2.json, merged.csv, tracking.csv, contraction.csv and summary.json.
void write_pipeline_outputs(const std::string& out_dir, const ScenarioConfig& config,
                            const PipelineResult& result, const std::string& timestamp = "");

std::string contraction_csv(const std::vector<std::pair<std::string,
                                                        const ContractionReport<double>*>>& reports);

}  // namespace dmpflight

#endif  // DMPFLIGHT_SCENARIO_HPP_
