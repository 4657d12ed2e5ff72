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

#include "dmpflight/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmpflight/error.hpp"

namespace dmpflight {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kGoalZero: return "goal-zero";
    case ErrorCode::kDegenerateNormalizer: return "degenerate-normalizer";
    case ErrorCode::kStepSize: return "step-size";
    case ErrorCode::kTooFewSamples: return "too-few-samples";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kBoundaryPeak: return "boundary-peak";
    case ErrorCode::kBasisMismatch: return "basis-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kSingularMetric: return "singular-metric";
    case ErrorCode::kNonHurwitz: return "non-hurwitz";
    case ErrorCode::kRollGuard: return "roll-guard";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

Index Trajectory::dof_index(const std::string& name) const {
  auto it = std::find(dof_names.begin(), dof_names.end(), name);
  return it == dof_names.end() ? -1 : static_cast<Index>(it - dof_names.begin());
}

Trajectory make_trajectory(Index samples, Index dofs, double dt,
                           std::vector<std::string> dof_names) {
  Trajectory traj;
  traj.dt = dt;
  if (dof_names.empty()) {
    for (Index d = 0; d < dofs; ++d) dof_names.push_back("y" + std::to_string(d));
  }
  traj.dof_names = std::move(dof_names);
  traj.y = Eigen::MatrixXd::Zero(samples, dofs);
  traj.ydot = Eigen::MatrixXd::Zero(samples, dofs);
  traj.yddot = Eigen::MatrixXd::Zero(samples, dofs);
  return traj;
}

void validate(const Trajectory& traj, bool require_derivatives) {
  require(traj.dt > 0.0 && std::isfinite(traj.dt), ErrorCode::kInvalidArgument,
          "trajectory dt must be positive");
  require(traj.samples() >= 2, ErrorCode::kTooFewSamples,
          "trajectory needs at least two samples");
  require(static_cast<Index>(traj.dof_names.size()) == traj.dofs(),
          ErrorCode::kLengthMismatch, "one DOF name per column required");
  require(traj.y.allFinite(), ErrorCode::kNonFinite, "non-finite position sample");
  if (require_derivatives || traj.ydot.size() > 0 || traj.yddot.size() > 0) {
    require(traj.has_derivatives(), ErrorCode::kLengthMismatch,
            "derivative arrays must match the position array");
    require(traj.ydot.allFinite() && traj.yddot.allFinite(), ErrorCode::kNonFinite,
            "non-finite derivative sample");
  }
}

Trajectory slice(const Trajectory& traj, Index first, Index last) {
  require(0 <= first && first <= last && last < traj.samples(),
          ErrorCode::kInvalidArgument, "slice bounds out of range");
  Trajectory out;
  out.dt = traj.dt;
  out.dof_names = traj.dof_names;
  const Index n = last - first + 1;
  out.y = traj.y.middleRows(first, n);
  if (traj.has_derivatives()) {
    out.ydot = traj.ydot.middleRows(first, n);
    out.yddot = traj.yddot.middleRows(first, n);
  }
  return out;
}

Eigen::RowVectorXd sample_position(const Trajectory& traj, double t) {
  const double u = std::clamp(t / traj.dt, 0.0, static_cast<double>(traj.samples() - 1));
  const Index k = std::min(static_cast<Index>(std::floor(u)), traj.samples() - 2);
  const double frac = u - static_cast<double>(k);
  return (1.0 - frac) * traj.y.row(k) + frac * traj.y.row(k + 1);
}

Eigen::VectorXd rms_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kLengthMismatch,
          "rms_difference: shape mismatch");
  return ((a - b).array().square().colwise().mean()).sqrt().transpose();
}

Trajectory resample_uniform(const std::vector<double>& times,
                            const Eigen::MatrixXd& values, double dt,
                            std::vector<std::string> dof_names) {
  require(times.size() >= 2, ErrorCode::kTooFewSamples, "need at least two samples");
  require(static_cast<Index>(times.size()) == values.rows(), ErrorCode::kLengthMismatch,
          "time column length differs from value rows");
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      std::ostringstream msg;
      msg << "time column not strictly increasing at sample " << i;
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
  }
  const double span = times.back() - times.front();
  const Index n = static_cast<Index>(std::floor(span / dt + 1e-9)) + 1;
  Trajectory out;
  out.dt = dt;
  out.dof_names = std::move(dof_names);
  out.y.resize(n, values.cols());
  size_t seg = 0;
  for (Index k = 0; k < n; ++k) {
    const double t = times.front() + static_cast<double>(k) * dt;
    while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
    const double frac =
        std::clamp((t - times[seg]) / (times[seg + 1] - times[seg]), 0.0, 1.0);
    out.y.row(k) = (1.0 - frac) * values.row(static_cast<Index>(seg)) +
                   frac * values.row(static_cast<Index>(seg + 1));
  }
  return out;
}

}  // namespace dmpflight
