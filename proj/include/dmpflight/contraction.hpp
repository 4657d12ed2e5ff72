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

#ifndef DMPFLIGHT_CONTRACTION_HPP_
#define DMPFLIGHT_CONTRACTION_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "dmpflight/error.hpp"

namespace dmpflight {

template <typename Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DynVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Vector field x -> f(x, t).
template <typename Scalar>
using VectorField = std::function<DynVector<Scalar>(const DynVector<Scalar>&, Scalar)>;

/// Bottom field of a hierarchy: (x2, x1, t) -> f2.
template <typename Scalar>
using DrivenField = std::function<DynVector<Scalar>(
    const DynVector<Scalar>&, const DynVector<Scalar>&, Scalar)>;

/// Differential coordinate transform dz = Theta dx. A constant metric leaves
/// `theta_of_t` empty; when it is set it overrides `theta` and `theta_dot`,
/// with the rate obtained by central differences.
template <typename Scalar>
struct Metric {
  DynMatrix<Scalar> theta;
  DynMatrix<Scalar> theta_dot;
  std::function<DynMatrix<Scalar>(Scalar)> theta_of_t;

  static Metric identity(Eigen::Index n) {
    return {DynMatrix<Scalar>::Identity(n, n), DynMatrix<Scalar>::Zero(n, n), {}};
  }
};

template <typename Scalar>
struct ContractionSample {
  Scalar t;
  Scalar lambda_max;
};

/// Verdict is `contracting` iff sup lambda_max < -margin; `rate` = |sup lambda_max|.
template <typename Scalar>
struct ContractionReport {
  std::vector<ContractionSample<Scalar>> samples;
  Scalar margin = Scalar(1e-6);
  Scalar sup_lambda = -std::numeric_limits<Scalar>::infinity();
  bool contracting = false;
  Scalar rate = Scalar(0);
};

template <typename Scalar>
struct HierarchyReport {
  ContractionReport<Scalar> top;
  ContractionReport<Scalar> bottom;
  Scalar interconnection_bound = Scalar(0);  // sup of the spectral norm of F21.
};

template <typename Scalar>
ContractionReport<Scalar> summarize(std::vector<ContractionSample<Scalar>> samples,
                                    std::type_identity_t<Scalar> margin) {
  ContractionReport<Scalar> report;
  report.margin = margin;
  report.samples = std::move(samples);
  for (const auto& s : report.samples) {
    report.sup_lambda = std::max(report.sup_lambda, s.lambda_max);
  }
  report.contracting = !report.samples.empty() && report.sup_lambda < -margin;
  report.rate = report.samples.empty() ? Scalar(0) : std::abs(report.sup_lambda);
  return report;
}

template <typename Scalar>
DynMatrix<Scalar> numeric_jacobian(const VectorField<Scalar>& field,
                                   const std::type_identity_t<DynVector<Scalar>>& x,
                                   std::type_identity_t<Scalar> t) {
  using std::abs;
  const DynVector<Scalar> f0 = field(x, t);
  require(f0.allFinite(), ErrorCode::kNonFinite, "vector field returned non-finite values");
  DynMatrix<Scalar> jac(f0.size(), x.size());
  DynVector<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar h = Scalar(1e-6) * (Scalar(1) + abs(x(i)));
    probe(i) = x(i) + h;
    const DynVector<Scalar> plus = field(probe, t);
    probe(i) = x(i) - h;
    const DynVector<Scalar> minus = field(probe, t);
    probe(i) = x(i);
    require(plus.allFinite() && minus.allFinite(), ErrorCode::kNonFinite,
            "vector field returned non-finite values");
    jac.col(i) = (plus - minus) / (Scalar(2) * h);
  }
  return jac;
}

template <typename Scalar>
DynMatrix<Scalar> checked_inverse(const DynMatrix<Scalar>& theta) {
  require(theta.rows() == theta.cols() && theta.rows() > 0, ErrorCode::kSingularMetric,
          "metric must be square and non-empty");
  const Eigen::JacobiSVD<DynMatrix<Scalar>> svd(theta);
  const auto& sv = svd.singularValues();
  const Scalar smallest = sv(sv.size() - 1);
  if (!(smallest > Scalar(0)) || sv(0) / smallest > Scalar(1e12)) {
    throw Error(ErrorCode::kSingularMetric, "metric is singular or badly conditioned");
  }
  return theta.inverse();
}

/// F = (theta_dot + theta * jac) * theta^-1.
template <typename Scalar>
DynMatrix<Scalar> generalized_jacobian(const DynMatrix<Scalar>& theta,
                                       const std::type_identity_t<DynMatrix<Scalar>>& theta_dot,
                                       const std::type_identity_t<DynMatrix<Scalar>>& jac) {
  require(theta.cols() == jac.rows() && jac.rows() == jac.cols(),
          ErrorCode::kLengthMismatch, "metric and Jacobian sizes differ");
  const DynMatrix<Scalar> inv = checked_inverse(theta);
  if (theta_dot.size() == 0) return theta * jac * inv;
  return (theta_dot + theta * jac) * inv;
}

template <typename Scalar>
void metric_at(const Metric<Scalar>& metric, Scalar t, DynMatrix<Scalar>* theta,
               DynMatrix<Scalar>* theta_dot) {
  if (!metric.theta_of_t) {
    *theta = metric.theta;
    *theta_dot = metric.theta_dot.size() ? metric.theta_dot
                                         : DynMatrix<Scalar>::Zero(theta->rows(), theta->cols());
    return;
  }
  using std::abs;
  const Scalar h = Scalar(1e-6) * (Scalar(1) + abs(t));
  *theta = metric.theta_of_t(t);
  *theta_dot = (metric.theta_of_t(t + h) - metric.theta_of_t(t - h)) / (Scalar(2) * h);
}

template <typename Scalar>
DynMatrix<Scalar> generalized_jacobian(const Metric<Scalar>& metric,
                                       const std::type_identity_t<DynMatrix<Scalar>>& jac,
                                       std::type_identity_t<Scalar> t = Scalar(0)) {
  DynMatrix<Scalar> theta, theta_dot;
  metric_at(metric, t, &theta, &theta_dot);
  return generalized_jacobian(theta, theta_dot, jac);
}

/// Largest eigenvalue of (F + F^T) / 2.
template <typename Derived>
typename Derived::Scalar max_symmetric_eigenvalue(const Eigen::MatrixBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  const DynMatrix<Scalar> sym = (f + f.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

template <typename Scalar>
ContractionReport<Scalar> check_trajectory(const VectorField<Scalar>& field,
                                           const Metric<Scalar>& metric,
                                           const std::vector<Scalar>& times,
                                           const std::vector<DynVector<Scalar>>& states,
                                           std::type_identity_t<Scalar> margin = Scalar(1e-6)) {
  require(times.size() == states.size(), ErrorCode::kLengthMismatch,
          "times and states differ in length");
  std::vector<ContractionSample<Scalar>> samples;
  samples.reserve(times.size());
  for (size_t k = 0; k < times.size(); ++k) {
    require(states[k].allFinite(), ErrorCode::kNonFinite, "trajectory sample is not finite");
    const DynMatrix<Scalar> jac = numeric_jacobian(field, states[k], times[k]);
    const Scalar lambda = max_symmetric_eigenvalue(generalized_jacobian(metric, jac, times[k]));
    samples.push_back({times[k], lambda});
  }
  return summarize(std::move(samples), margin);
}

/// Solves A^T P + P A = -I and returns Theta = P^(1/2).
template <typename Derived>
Metric<typename Derived::Scalar> lyapunov_metric(const Eigen::MatrixBase<Derived>& a_expr) {
  using Scalar = typename Derived::Scalar;
  const DynMatrix<Scalar> a = a_expr;
  const Eigen::Index n = a.rows();
  require(n > 0 && a.cols() == n, ErrorCode::kInvalidArgument, "A must be square");
  const Eigen::EigenSolver<DynMatrix<Scalar>> eig(a, false);
  const Scalar worst = eig.eigenvalues().real().maxCoeff();
  if (!(worst < Scalar(0))) {
    std::ostringstream msg;
    msg << "matrix is not Hurwitz (max real eigenvalue " << worst << ")";
    throw Error(ErrorCode::kNonHurwitz, msg.str());
  }
  // Column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P.
  const DynMatrix<Scalar> eye = DynMatrix<Scalar>::Identity(n, n);
  DynMatrix<Scalar> system = DynMatrix<Scalar>::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system.block(i * n, j * n, n, n) += eye(i, j) * a.transpose();
      system.block(i * n, j * n, n, n) += a(j, i) * eye;
    }
  }
  const DynVector<Scalar> rhs = -Eigen::Map<const DynVector<Scalar>>(eye.data(), n * n);
  const DynVector<Scalar> vec_p = system.fullPivLu().solve(rhs);
  DynMatrix<Scalar> p = Eigen::Map<const DynMatrix<Scalar>>(vec_p.data(), n, n);
  p = (p + p.transpose()) / Scalar(2);
  const Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> root(p);
  require(root.eigenvalues().minCoeff() > Scalar(0), ErrorCode::kSingularMetric,
          "Lyapunov solution is not positive definite");
  return {root.operatorSqrt(), DynMatrix<Scalar>::Zero(n, n), {}};
}

template <typename Scalar>
HierarchyReport<Scalar> check_hierarchy(const VectorField<Scalar>& top,
                                        const DrivenField<Scalar>& bottom,
                                        const Metric<Scalar>& top_metric,
                                        const Metric<Scalar>& bottom_metric,
                                        const std::vector<Scalar>& times,
                                        const std::vector<DynVector<Scalar>>& top_states,
                                        const std::vector<DynVector<Scalar>>& bottom_states,
                                        std::type_identity_t<Scalar> margin = Scalar(1e-6)) {
  require(times.size() == top_states.size() && times.size() == bottom_states.size(),
          ErrorCode::kLengthMismatch, "hierarchy samples differ in length");
  std::vector<ContractionSample<Scalar>> top_samples, bottom_samples;
  Scalar bound = Scalar(0);
  for (size_t k = 0; k < times.size(); ++k) {
    const Scalar t = times[k];
    const DynVector<Scalar>& x1 = top_states[k];
    const DynVector<Scalar>& x2 = bottom_states[k];
    const DynMatrix<Scalar> j11 = numeric_jacobian(top, x1, t);
    const VectorField<Scalar> lower = [&](const DynVector<Scalar>& s, Scalar tt) {
      return bottom(s, x1, tt);
    };
    const VectorField<Scalar> cross = [&](const DynVector<Scalar>& s, Scalar tt) {
      return bottom(x2, s, tt);
    };
    const DynMatrix<Scalar> j22 = numeric_jacobian(lower, x2, t);
    const DynMatrix<Scalar> j21 = numeric_jacobian(cross, x1, t);

    DynMatrix<Scalar> th1, th1_dot, th2, th2_dot;
    metric_at(top_metric, t, &th1, &th1_dot);
    metric_at(bottom_metric, t, &th2, &th2_dot);
    top_samples.push_back(
        {t, max_symmetric_eigenvalue(generalized_jacobian(th1, th1_dot, j11))});
    bottom_samples.push_back(
        {t, max_symmetric_eigenvalue(generalized_jacobian(th2, th2_dot, j22))});
    const DynMatrix<Scalar> f21 = th2 * j21 * checked_inverse(th1);
    const Eigen::JacobiSVD<DynMatrix<Scalar>> svd(f21);
    bound = std::max(bound, svd.singularValues().size() ? svd.singularValues()(0) : Scalar(0));
  }
  return {summarize(std::move(top_samples), margin),
          summarize(std::move(bottom_samples), margin), bound};
}

}  // namespace dmpflight

#endif  // DMPFLIGHT_CONTRACTION_HPP_
