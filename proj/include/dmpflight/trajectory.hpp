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

#ifndef DMPFLIGHT_TRAJECTORY_HPP_
#define DMPFLIGHT_TRAJECTORY_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dmpflight {

using Eigen::Index;

/// Uniformly sampled multi-DOF time series. Row k holds the sample at time
/// k * dt; column d holds DOF d.
struct Trajectory {
  double dt = 0.0;
  std::vector<std::string> dof_names;
  Eigen::MatrixXd y;
  Eigen::MatrixXd ydot;
  Eigen::MatrixXd yddot;

  Index samples() const { return y.rows(); }
  Index dofs() const { return y.cols(); }
  double time(Index k) const { return static_cast<double>(k) * dt; }
  double duration() const { return time(samples() - 1); }
  bool has_derivatives() const {
    return ydot.rows() == y.rows() && yddot.rows() == y.rows() &&
           ydot.cols() == y.cols() && yddot.cols() == y.cols();
  }

  /// Column index of the named DOF, or -1.
  Index dof_index(const std::string& name) const;
};

/// Allocates a zeroed trajectory with `samples` rows. DOF names default to
/// "y0", "y1", ...
Trajectory make_trajectory(Index samples, Index dofs, double dt,
                           std::vector<std::string> dof_names = {});

/// Checks the structural invariants: matching shapes, at least two samples,
/// dt > 0, no non-finite entries. Derivative arrays may be empty when
/// `require_derivatives` is false.
void validate(const Trajectory& traj, bool require_derivatives = true);

/// Rows [first, last] inclusive.
Trajectory slice(const Trajectory& traj, Index first, Index last);

/// Linear interpolation of every channel at time t (clamped to the range).
Eigen::RowVectorXd sample_position(const Trajectory& traj, double t);

/// Root-mean-square difference of the position arrays, per DOF.
Eigen::VectorXd rms_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Resamples (times, values) onto a uniform grid of spacing dt by linear
/// interpolation. `times` must be strictly increasing.
Trajectory resample_uniform(const std::vector<double>& times,
                            const Eigen::MatrixXd& values, double dt,
                            std::vector<std::string> dof_names);

constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace dmpflight

#endif  // DMPFLIGHT_TRAJECTORY_HPP_
