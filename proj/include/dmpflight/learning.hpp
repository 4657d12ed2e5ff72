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

#ifndef DMPFLIGHT_LEARNING_HPP_
#define DMPFLIGHT_LEARNING_HPP_

#include <vector>

#include <Eigen/Dense>

#include "dmpflight/dmp.hpp"
#include "dmpflight/trajectory.hpp"

namespace dmpflight {

/// A demonstration is a trajectory whose derivative arrays may be empty.
using Demonstration = Trajectory;

constexpr Index kMinDemonstrationSamples = 10;

/// Fills velocities and accelerations by finite differences (central inside,
/// second-order one-sided at the ends). Returns the input unchanged when
/// derivatives are already present.
Demonstration differentiate(const Demonstration& demo);

/// Forcing values that make the primitive reproduce the demonstration, one
/// row per sample. Discrete: integrates the z-equation driven by the demo
/// and returns tau*ydot - z. Rhythmic: the same, iterated over the demo as
/// one period until z is periodic. Filtered: inverts the filter cascade.
Eigen::MatrixXd compute_f_target(const Demonstration& demo, const PrimitiveParams& params);

/// Locally weighted regression of each basis weight against the forcing
/// regressor (g*v discrete, r*(cos phi, sin phi) rhythmic).
Eigen::MatrixXd fit_weights(const Eigen::MatrixXd& f_target,
                            const std::vector<Phase>& phase_trace,
                            const PrimitiveParams& params);

/// Learns a primitive with default gains. tau is the demo duration
/// (discrete, filtered) or the demo period / 2pi (rhythmic, where the demo
/// is taken to span exactly one closed period).
PrimitiveParams learn(const Demonstration& demo, Index basis_count, SystemKind kind);

/// Same, starting from `prototype` for gains, basis and kind.
PrimitiveParams learn(const Demonstration& demo, const PrimitiveParams& prototype);

/// Rollout of `params` from the demo's initial state compared with the demo:
/// the largest per-DOF RMS error divided by that DOF's range.
double relative_reproduction_error(const PrimitiveParams& params,
                                   const Demonstration& demo);

struct SegmentationResult {
  Index split_index = 0;
  Demonstration first;
  Demonstration second;
};

/// Splits at the earliest global maximum of `dof`. Both halves keep the
/// split sample.
SegmentationResult segment_at_peak(const Demonstration& demo, Index dof);

}  // namespace dmpflight

#endif  // DMPFLIGHT_LEARNING_HPP_
