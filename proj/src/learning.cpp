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

#include "dmpflight/learning.hpp"

#include <cfloat>
#include <cmath>

#include "dmpflight/error.hpp"

namespace dmpflight {
namespace {

// Integrates tau*zdot = alpha_z*(beta_z*(target - y) - z) over one interval
// with y Hermite-interpolated from the endpoint positions and velocities.
double z_step(const PrimitiveParams& p, double target, double z, double y0, double y1,
              double yd0, double yd1, double dt) {
  const double ymid = 0.5 * (y0 + y1) + dt * (yd0 - yd1) / 8.0;
  auto rate = [&](double zz, double yy) {
    return p.alpha_z * (p.beta_z * (target - yy) - zz) / p.tau;
  };
  const double k1 = rate(z, y0);
  const double k2 = rate(z + dt / 2 * k1, ymid);
  const double k3 = rate(z + dt / 2 * k2, ymid);
  const double k4 = rate(z + dt * k3, y1);
  return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Demonstration differentiate(const Demonstration& demo) {
  if (demo.has_derivatives()) return demo;
  const Index n = demo.samples();
  require(n >= 4, ErrorCode::kTooFewSamples, "differentiation needs at least 4 samples");
  require(demo.dt > 0.0, ErrorCode::kInvalidArgument, "demonstration dt must be positive");
  Demonstration out = demo;
  const double h = demo.dt;
  const auto& y = demo.y;
  out.ydot.resize(n, demo.dofs());
  out.yddot.resize(n, demo.dofs());
  for (Index k = 1; k + 1 < n; ++k) {
    out.ydot.row(k) = (y.row(k + 1) - y.row(k - 1)) / (2.0 * h);
    out.yddot.row(k) = (y.row(k + 1) - 2.0 * y.row(k) + y.row(k - 1)) / (h * h);
  }
  out.ydot.row(0) = (-3.0 * y.row(0) + 4.0 * y.row(1) - y.row(2)) / (2.0 * h);
  out.ydot.row(n - 1) = (3.0 * y.row(n - 1) - 4.0 * y.row(n - 2) + y.row(n - 3)) / (2.0 * h);
  out.yddot.row(0) = (2.0 * y.row(0) - 5.0 * y.row(1) + 4.0 * y.row(2) - y.row(3)) / (h * h);
  out.yddot.row(n - 1) =
      (2.0 * y.row(n - 1) - 5.0 * y.row(n - 2) + 4.0 * y.row(n - 3) - y.row(n - 4)) / (h * h);
  return out;
}

Eigen::MatrixXd compute_f_target(const Demonstration& demo, const PrimitiveParams& p) {
  require(demo.has_derivatives(), ErrorCode::kInvalidArgument,
          "compute_f_target needs demonstration velocities");
  require(demo.dofs() == p.dofs(), ErrorCode::kLengthMismatch,
          "demonstration and primitive DOF counts differ");
  const Index n = demo.samples();
  const double dt = demo.dt;
  Eigen::MatrixXd f(n, demo.dofs());

  if (p.kind == SystemKind::kFiltered) {
    for (Index d = 0; d < demo.dofs(); ++d) {
      f.col(d) = p.tau * p.tau * demo.yddot.col(d) + p.tau * (p.a1 + p.a2) * demo.ydot.col(d) +
                 p.a1 * p.a2 * demo.y.col(d) -
                 Eigen::VectorXd::Constant(n, p.goal(d));
    }
    return f;
  }

  for (Index d = 0; d < demo.dofs(); ++d) {
    const auto y = demo.y.col(d);
    const auto yd = demo.ydot.col(d);
    Eigen::VectorXd z(n);
    if (p.kind == SystemKind::kDiscrete) {
      // f vanishes at the start (canonical v = 0), so z(0) = tau * ydot(0).
      z(0) = p.tau * yd(0);
      for (Index k = 0; k + 1 < n; ++k) {
        z(k + 1) = z_step(p, p.goal(d), z(k), y(k), y(k + 1), yd(k), yd(k + 1), dt);
      }
    } else {
      // Periodic steady state of the z-equation: sweep the closed demo until
      // the start-up transient (decay exp(-alpha_z * 2pi) per sweep) is gone.
      double zk = p.tau * yd(0);
      constexpr int kSweeps = 3;
      for (int sweep = 0; sweep < kSweeps; ++sweep) {
        z(0) = zk;
        for (Index k = 0; k + 1 < n; ++k) {
          zk = z_step(p, p.baseline(d), zk, y(k), y(k + 1), yd(k), yd(k + 1), dt);
          z(k + 1) = zk;
        }
      }
    }
    f.col(d) = p.tau * yd - z;
  }
  return f;
}

Eigen::MatrixXd fit_weights(const Eigen::MatrixXd& f_target,
                            const std::vector<Phase>& trace, const PrimitiveParams& p) {
  require(static_cast<Index>(trace.size()) == f_target.rows(), ErrorCode::kLengthMismatch,
          "phase trace and forcing target lengths differ");
  require(f_target.cols() == p.dofs(), ErrorCode::kLengthMismatch,
          "forcing target DOF count differs from primitive");
  const Index n = p.basis.size();
  const Index samples = f_target.rows();
  Eigen::MatrixXd psi(samples, n);
  for (Index k = 0; k < samples; ++k) psi.row(k) = basis_activation(p, trace[k]).transpose();

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(p.dofs(), n * p.components());
  if (p.kind != SystemKind::kRhythmic) {
    Eigen::VectorXd v(samples);
    for (Index k = 0; k < samples; ++k) v(k) = std::get<DiscretePhase>(trace[k]).v;
    for (Index d = 0; d < p.dofs(); ++d) {
      const Eigen::VectorXd regressor = p.goal(d) * v;
      const Eigen::VectorXd spread = psi.transpose() * regressor.cwiseAbs2();
      const Eigen::VectorXd moment =
          psi.transpose() * regressor.cwiseProduct(f_target.col(d));
      const double floor = 1e-14 * spread.maxCoeff() + DBL_MIN;
      for (Index i = 0; i < n; ++i) {
        weights(d, i) = moment(i) / (spread(i) * (1.0 + 1e-8) + floor);
      }
    }
    return weights;
  }

  Eigen::MatrixXd basis_dir(samples, 2);
  for (Index k = 0; k < samples; ++k) {
    const auto& r = std::get<RhythmicPhase>(trace[k]);
    basis_dir(k, 0) = r.r * std::cos(r.phi);
    basis_dir(k, 1) = r.r * std::sin(r.phi);
  }
  for (Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd weighted = basis_dir.array().colwise() * psi.col(i).array();
    Eigen::Matrix2d gram = weighted.transpose() * basis_dir;
    const double reg = 1e-8 * gram.trace() / 2.0 + DBL_MIN;
    gram += reg * Eigen::Matrix2d::Identity();
    const Eigen::LDLT<Eigen::Matrix2d> solver(gram);
    for (Index d = 0; d < p.dofs(); ++d) {
      const Eigen::Vector2d rhs = weighted.transpose() * f_target.col(d);
      const Eigen::Vector2d w = solver.solve(rhs);
      weights(d, 2 * i) = w(0);
      weights(d, 2 * i + 1) = w(1);
    }
  }
  return weights;
}

PrimitiveParams learn(const Demonstration& raw, const PrimitiveParams& prototype) {
  validate(raw, false);
  require(raw.samples() >= kMinDemonstrationSamples, ErrorCode::kTooFewSamples,
          "demonstration needs at least 10 samples");
  const Demonstration demo = differentiate(raw);
  const Index n = demo.samples();

  PrimitiveParams p = prototype;
  p.dof_names = demo.dof_names;
  p.weights = Eigen::MatrixXd::Zero(demo.dofs(), p.basis.size() * p.components());
  p.start = demo.y.row(0).transpose();
  p.start_velocity = demo.ydot.row(0).transpose();
  p.goal = Eigen::VectorXd::Zero(demo.dofs());
  p.baseline = Eigen::VectorXd::Zero(demo.dofs());
  const double duration = demo.duration();
  switch (p.kind) {
    case SystemKind::kDiscrete:
      p.tau = duration;
      p.goal = demo.y.row(n - 1).transpose();
      break;
    case SystemKind::kFiltered:
      p.tau = duration;
      p.goal = p.a1 * p.a2 * demo.y.row(n - 1).transpose();
      break;
    case SystemKind::kRhythmic:
      p.tau = duration / (2.0 * kPi);
      p.r0 = 1.0;
      p.baseline = demo.y.topRows(n - 1).colwise().mean().transpose();
      break;
  }
  validate(p);
  check_step_size(p, demo.dt);
  const Eigen::MatrixXd f_target = compute_f_target(demo, p);
  p.weights = fit_weights(f_target, phase_trace(p, demo.dt, n), p);
  return p;
}

PrimitiveParams learn(const Demonstration& demo, Index basis_count, SystemKind kind) {
  return learn(demo, make_params(kind, demo.dofs(), basis_count));
}

double relative_reproduction_error(const PrimitiveParams& params,
                                   const Demonstration& raw) {
  const Demonstration demo = differentiate(raw);
  const Trajectory rep = rollout(params, demo.y.row(0).transpose(),
                                 demo.ydot.row(0).transpose(), demo.dt, demo.duration());
  require(rep.samples() == demo.samples(), ErrorCode::kLengthMismatch,
          "reproduction length differs from demonstration");
  const Eigen::VectorXd rms = rms_difference(rep.y, demo.y);
  double worst = 0.0;
  for (Index d = 0; d < demo.dofs(); ++d) {
    const double range = demo.y.col(d).maxCoeff() - demo.y.col(d).minCoeff();
    worst = std::max(worst, range > 0.0 ? rms(d) / range : rms(d));
  }
  return worst;
}

SegmentationResult segment_at_peak(const Demonstration& demo, Index dof) {
  require(0 <= dof && dof < demo.dofs(), ErrorCode::kInvalidArgument,
          "segmentation DOF out of range");
  require(demo.samples() >= 3, ErrorCode::kTooFewSamples,
          "segmentation needs at least three samples");
  Index peak = 0;
  for (Index k = 1; k < demo.samples(); ++k) {
    if (demo.y(k, dof) > demo.y(peak, dof)) peak = k;
  }
  if (peak == 0 || peak == demo.samples() - 1) {
    throw Error(ErrorCode::kBoundaryPeak,
                "maximum of '" + demo.dof_names[static_cast<size_t>(dof)] +
                    "' lies at the " + (peak == 0 ? "start" : "end") +
                    " of the demonstration");
  }
  return {peak, slice(demo, 0, peak), slice(demo, peak, demo.samples() - 1)};
}

}  // namespace dmpflight
