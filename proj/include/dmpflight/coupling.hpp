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

#ifndef DMPFLIGHT_COUPLING_HPP_
#define DMPFLIGHT_COUPLING_HPP_

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dmpflight/contraction.hpp"
#include "dmpflight/dmp.hpp"
#include "dmpflight/trajectory.hpp"

namespace dmpflight {

enum class CouplingMode { kOneWay, kTwoWay };

const char* to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& name);

/// `gain` multiplies the diffusive term K * kappa * (x_other - x_self) on the
/// transformation state (y, z), kappa = alpha_z * beta_z / tau. One-way
/// coupling already replaces the follower's drive g + f by the leader's; the
/// gain adds extra stiffness on top and may be negative. Two-way coupling
/// needs a positive gain. `activation_phase` is the fraction of the
/// follower's tau after which one-way coupling switches on; 1 disables it.
struct CouplingSpec {
  CouplingMode mode = CouplingMode::kOneWay;
  double gain = 0.0;
  double activation_phase = 0.85;
};

void validate(const CouplingSpec& spec);

double coupling_stiffness(const PrimitiveParams& params);

struct CoupledRollout {
  Trajectory leader;
  Trajectory follower;
  Eigen::VectorXd gap;        // Euclidean norm of y_follower - y_leader per sample.
  Index activation_index = -1;  // -1 when coupling never switched on.
};

CoupledRollout one_way_rollout(const PrimitiveParams& leader,
                               const PrimitiveParams& follower,
                               const CouplingSpec& spec, double dt, double duration);

CoupledRollout two_way_rollout(const PrimitiveParams& p1, const PrimitiveParams& p2,
                               const CouplingSpec& spec, double dt, double duration);

Eigen::MatrixXd blend_weights(const Eigen::MatrixXd& w_a, const Eigen::MatrixXd& w_b,
                              double alpha, double beta);

/// Blends weights and the linear fields (goal, baseline, start state) of two
/// primitives sharing kind, gains, tau and basis.
PrimitiveParams blend(const PrimitiveParams& a, const PrimitiveParams& b, double alpha,
                      double beta);

struct JunctionJump {
  double position = 0.0;      // max over DOFs of |y[k] - y[k-1] - dt * ydot[k-1]|
  double velocity = 0.0;      // max over DOFs of |ydot[k] - ydot[k-1] - dt * yddot[k-1]|
  double acceleration = 0.0;  // max over DOFs of |yddot[k] - yddot[k-1]|
};

JunctionJump junction_jump(const Trajectory& traj, Index k);

struct ConcatenateOptions {
  // Start of the second primitive; defaults to its own `start`.
  std::optional<Eigen::VectorXd> second_start;
  // Extra time after the second primitive's nominal end, as a fraction of its tau.
  double settle_fraction = 0.25;
};

struct Concatenation {
  Trajectory merged;
  Trajectory leader;          // Second primitive, time-shifted onto the merged clock.
  Index junction_index = 0;
  bool coupled = false;
  JunctionJump jump;
};

Concatenation concatenate(const PrimitiveParams& first, const PrimitiveParams& second,
                          const CouplingSpec& spec, double dt,
                          const ConcatenateOptions& options = {});

/// Certificate for the follower after activation: the coupled field of the
/// follower state with the leader as exogenous input, under the Lyapunov
/// metric of the leader's linear transformation dynamics.
ContractionReport<double> one_way_certificate(const PrimitiveParams& leader,
                                              const CouplingSpec& spec,
                                              const CoupledRollout& rollout,
                                              double margin = 1e-6);

/// Certificate for f - 2 K u along the first system's rollout, identity metric.
ContractionReport<double> two_way_certificate(const PrimitiveParams& p1,
                                              const CouplingSpec& spec,
                                              const CoupledRollout& rollout,
                                              double margin = 1e-6);

/// Canonical system (top) driving the transformation system (bottom), checked
/// along a nominal rollout under the Lyapunov metrics of both linear parts.
HierarchyReport<double> check_primitive_hierarchy(const PrimitiveParams& params, double dt,
                                                  double duration, double margin = 1e-6);

/// Least-squares slope of log(gap) against time over samples [first, last).
double log_gap_slope(const Eigen::VectorXd& gap, double dt, Index first, Index last);

}  // namespace dmpflight

#endif  // DMPFLIGHT_COUPLING_HPP_
