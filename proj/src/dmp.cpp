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

#include "dmpflight/dmp.hpp"

#include <cmath>
#include <sstream>

#include "dmpflight/error.hpp"

namespace dmpflight {
namespace {

// Normalized discrete canonical flow in units of t / tau.
Eigen::Vector2d unit_canonical_rate(const Eigen::Vector2d& s, double alpha_v,
                                    double beta_v) {
  return {s(1), alpha_v * (beta_v * (1.0 - s(0)) - s(1))};
}

double weight(const PrimitiveParams& p, Index dof, Index basis, Index component) {
  return p.weights(dof, basis * p.components() + component);
}

struct Activation {
  Eigen::ArrayXd psi;
  Eigen::ArrayXd dpsi;  // derivative w.r.t. the phase coordinate
  double sum = 0.0;
  double dsum = 0.0;
};

Activation discrete_activation(const BasisSet& basis, double x) {
  Activation a;
  const Eigen::ArrayXd diff = x - basis.centers.array();
  a.psi = (-basis.widths.array() * diff.square()).exp();
  a.dpsi = -2.0 * basis.widths.array() * diff * a.psi;
  a.sum = a.psi.sum();
  a.dsum = a.dpsi.sum();
  return a;
}

Activation rhythmic_activation(const BasisSet& basis, double phi) {
  Activation a;
  const Eigen::ArrayXd diff = phi - basis.centers.array();
  a.psi = (basis.widths.array() * (diff.cos() - 1.0)).exp();
  a.dpsi = -basis.widths.array() * diff.sin() * a.psi;
  a.sum = a.psi.sum();
  a.dsum = a.dpsi.sum();
  return a;
}

void check_normalizer(double sum) {
  if (!(sum > kNormalizerFloor)) {
    std::ostringstream msg;
    msg << "basis normalizer " << sum << " at or below floor " << kNormalizerFloor;
    throw Error(ErrorCode::kDegenerateNormalizer, msg.str());
  }
}

void check_phase_kind(const PrimitiveParams& params, const Phase& phase) {
  const bool rhythmic = std::holds_alternative<RhythmicPhase>(phase);
  require(rhythmic == (params.kind == SystemKind::kRhythmic), ErrorCode::kInvalidArgument,
          "phase type does not match primitive kind");
}

Phase add_scaled(const Phase& base, double h, const Phase& rate) {
  if (const auto* d = std::get_if<DiscretePhase>(&base)) {
    const auto& dr = std::get<DiscretePhase>(rate);
    return DiscretePhase{d->x + h * dr.x, d->v + h * dr.v};
  }
  const auto& r = std::get<RhythmicPhase>(base);
  const auto& rr = std::get<RhythmicPhase>(rate);
  return RhythmicPhase{r.phi + h * rr.phi, r.r + h * rr.r};
}

Phase rk4_combine(const Phase& base, double dt, const std::array<Phase, 4>& k) {
  if (const auto* d = std::get_if<DiscretePhase>(&base)) {
    const auto& k1 = std::get<DiscretePhase>(k[0]);
    const auto& k2 = std::get<DiscretePhase>(k[1]);
    const auto& k3 = std::get<DiscretePhase>(k[2]);
    const auto& k4 = std::get<DiscretePhase>(k[3]);
    return DiscretePhase{d->x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                         d->v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
  }
  const auto& r = std::get<RhythmicPhase>(base);
  const auto& k1 = std::get<RhythmicPhase>(k[0]);
  const auto& k2 = std::get<RhythmicPhase>(k[1]);
  const auto& k3 = std::get<RhythmicPhase>(k[2]);
  const auto& k4 = std::get<RhythmicPhase>(k[3]);
  return RhythmicPhase{
      r.phi + dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
      r.r + dt / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r)};
}

TransformState add_scaled(const TransformState& base, double h,
                          const TransformState& rate) {
  return {base.y + h * rate.y, base.z + h * rate.z};
}

}  // namespace

const char* to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDiscrete: return "discrete";
    case SystemKind::kRhythmic: return "rhythmic";
    case SystemKind::kFiltered: return "filtered";
  }
  return "unknown";
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "discrete") return SystemKind::kDiscrete;
  if (name == "rhythmic") return SystemKind::kRhythmic;
  if (name == "filtered") return SystemKind::kFiltered;
  throw Error(ErrorCode::kInvalidArgument, "unknown system kind '" + name + "'");
}

bool PrimitiveParams::operator==(const PrimitiveParams& o) const {
  return kind == o.kind && alpha_z == o.alpha_z && beta_z == o.beta_z &&
         alpha_v == o.alpha_v && beta_v == o.beta_v && tau == o.tau && mu == o.mu &&
         r0 == o.r0 && a1 == o.a1 && a2 == o.a2 && goal == o.goal &&
         baseline == o.baseline && start == o.start &&
         start_velocity == o.start_velocity && basis == o.basis &&
         weights == o.weights && dof_names == o.dof_names;
}

BasisSet make_basis(SystemKind kind, Index count, double alpha_v, double beta_v) {
  require(count >= 2, ErrorCode::kInvalidArgument, "basis count must be at least 2");
  BasisSet basis;
  basis.centers.resize(count);
  basis.widths.resize(count);
  if (kind == SystemKind::kRhythmic) {
    const double spacing = 2.0 * kPi / static_cast<double>(count);
    const double width = std::log(2.0) / (1.0 - std::cos(spacing / 2.0));
    for (Index i = 0; i < count; ++i) basis.centers(i) = spacing * static_cast<double>(i);
    basis.widths.setConstant(width);
    return basis;
  }

  require(alpha_v > 0.0 && beta_v > 0.0, ErrorCode::kInvalidArgument,
          "canonical gains must be positive");
  constexpr int kSubsteps = 2000;
  const double h = 1.0 / (static_cast<double>(count - 1) * kSubsteps);
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  basis.centers(0) = 0.0;
  for (Index i = 1; i + 1 < count; ++i) {
    for (int j = 0; j < kSubsteps; ++j) {
      const Eigen::Vector2d k1 = unit_canonical_rate(s, alpha_v, beta_v);
      const Eigen::Vector2d k2 = unit_canonical_rate(s + h / 2 * k1, alpha_v, beta_v);
      const Eigen::Vector2d k3 = unit_canonical_rate(s + h / 2 * k2, alpha_v, beta_v);
      const Eigen::Vector2d k4 = unit_canonical_rate(s + h * k3, alpha_v, beta_v);
      s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    basis.centers(i) = s(0);
  }
  basis.centers(count - 1) = 1.0;
  for (Index i = 0; i + 1 < count; ++i) {
    const double gap = basis.centers(i + 1) - basis.centers(i);
    require(gap > 0.0, ErrorCode::kInvalidArgument,
            "canonical phase is not monotone for these gains; centers collide");
    basis.widths(i) = 1.0 / (gap * gap);
  }
  basis.widths(count - 1) = basis.widths(count - 2);
  return basis;
}

PrimitiveParams make_params(SystemKind kind, Index dofs, Index basis_count) {
  PrimitiveParams p;
  p.kind = kind;
  p.basis = make_basis(kind, basis_count, p.alpha_v, p.beta_v);
  p.weights = Eigen::MatrixXd::Zero(dofs, basis_count * p.components());
  p.goal = Eigen::VectorXd::Zero(dofs);
  p.baseline = Eigen::VectorXd::Zero(dofs);
  p.start = Eigen::VectorXd::Zero(dofs);
  p.start_velocity = Eigen::VectorXd::Zero(dofs);
  for (Index d = 0; d < dofs; ++d) p.dof_names.push_back("y" + std::to_string(d));
  return p;
}

void validate(const PrimitiveParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(p.tau), ErrorCode::kInvalidArgument, "tau must be positive");
  require(positive(p.alpha_z) && positive(p.beta_z), ErrorCode::kInvalidArgument,
          "alpha_z and beta_z must be positive");
  require(p.basis.size() >= 2 && p.basis.widths.size() == p.basis.size(),
          ErrorCode::kInvalidArgument, "basis needs at least two centers with widths");
  require((p.basis.widths.array() > 0.0).all(), ErrorCode::kInvalidArgument,
          "basis widths must be positive");
  require(p.dofs() >= 1, ErrorCode::kInvalidArgument, "primitive has no DOFs");
  require(p.weights.cols() == p.basis.size() * p.components(), ErrorCode::kBasisMismatch,
          "weight count does not match basis count");
  const Index n = p.dofs();
  require(p.goal.size() == n && p.baseline.size() == n && p.start.size() == n &&
              p.start_velocity.size() == n &&
              static_cast<Index>(p.dof_names.size()) == n,
          ErrorCode::kLengthMismatch, "per-DOF fields must have one entry per DOF");
  require(p.weights.allFinite() && p.goal.allFinite() && p.baseline.allFinite(),
          ErrorCode::kNonFinite, "non-finite primitive parameters");
  switch (p.kind) {
    case SystemKind::kRhythmic:
      require(positive(p.mu), ErrorCode::kInvalidArgument, "mu must be positive");
      require(std::isfinite(p.r0) && p.r0 >= 0.0, ErrorCode::kInvalidArgument,
              "r0 must be non-negative");
      break;
    case SystemKind::kFiltered:
      require(positive(p.a1) && positive(p.a2), ErrorCode::kInvalidArgument,
              "filter constants must be positive");
      [[fallthrough]];
    case SystemKind::kDiscrete:
      require(positive(p.alpha_v) && positive(p.beta_v), ErrorCode::kInvalidArgument,
              "canonical gains must be positive");
      require((p.goal.array() != 0.0).all(), ErrorCode::kGoalZero,
              "discrete phase normalization x/g needs a non-zero goal on every DOF");
      for (Index i = 0; i + 1 < p.basis.size(); ++i) {
        require(p.basis.centers(i) < p.basis.centers(i + 1), ErrorCode::kInvalidArgument,
                "discrete centers must be strictly increasing");
      }
      break;
  }
}

DiscretePhase normalize_phase(const DiscretePhase& raw, double goal) {
  require(goal != 0.0, ErrorCode::kGoalZero, "phase normalization x/g with g = 0");
  return {raw.x / goal, raw.v / goal};
}

Phase initial_phase(const PrimitiveParams& params) {
  if (params.kind == SystemKind::kRhythmic) return RhythmicPhase{0.0, params.r0};
  return DiscretePhase{0.0, 0.0};
}

Phase phase_derivative(const PrimitiveParams& p, const Phase& phase) {
  check_phase_kind(p, phase);
  if (const auto* d = std::get_if<DiscretePhase>(&phase)) {
    return DiscretePhase{d->v / p.tau, p.alpha_v * (p.beta_v * (1.0 - d->x) - d->v) / p.tau};
  }
  const auto& r = std::get<RhythmicPhase>(phase);
  return RhythmicPhase{1.0 / p.tau, -p.mu * (r.r - p.r0) / p.tau};
}

Eigen::VectorXd basis_activation(const PrimitiveParams& params, const Phase& phase) {
  check_phase_kind(params, phase);
  if (const auto* d = std::get_if<DiscretePhase>(&phase)) {
    return discrete_activation(params.basis, d->x).psi.matrix();
  }
  return rhythmic_activation(params.basis, std::get<RhythmicPhase>(phase).phi).psi.matrix();
}

ForcingSample forcing_with_rate(const PrimitiveParams& p, const Phase& phase) {
  check_phase_kind(p, phase);
  const Index dofs = p.dofs();
  const Index n = p.basis.size();
  ForcingSample out{Eigen::VectorXd::Zero(dofs), Eigen::VectorXd::Zero(dofs)};
  const Phase rate = phase_derivative(p, phase);

  if (const auto* d = std::get_if<DiscretePhase>(&phase)) {
    const auto& dr = std::get<DiscretePhase>(rate);
    const Activation a = discrete_activation(p.basis, d->x);
    check_normalizer(a.sum);
    for (Index dof = 0; dof < dofs; ++dof) {
      const Eigen::ArrayXd w = p.weights.row(dof).transpose().array();
      const double num = (w * a.psi).sum();
      const double dnum = (w * a.dpsi).sum();
      const double shape = num / a.sum;
      const double dshape = (dnum * a.sum - num * a.dsum) / (a.sum * a.sum);
      const double g = p.goal(dof);
      out.f(dof) = g * d->v * shape;
      out.fdot(dof) = g * (dr.v * shape + d->v * dshape * dr.x);
    }
    return out;
  }

  const auto& r = std::get<RhythmicPhase>(phase);
  const auto& rr = std::get<RhythmicPhase>(rate);
  const Activation a = rhythmic_activation(p.basis, r.phi);
  check_normalizer(a.sum);
  const double c = std::cos(r.phi);
  const double s = std::sin(r.phi);
  for (Index dof = 0; dof < dofs; ++dof) {
    double num_c = 0.0, num_s = 0.0, dnum_c = 0.0, dnum_s = 0.0;
    for (Index i = 0; i < n; ++i) {
      num_c += a.psi(i) * weight(p, dof, i, 0);
      num_s += a.psi(i) * weight(p, dof, i, 1);
      dnum_c += a.dpsi(i) * weight(p, dof, i, 0);
      dnum_s += a.dpsi(i) * weight(p, dof, i, 1);
    }
    const double ac = num_c / a.sum;
    const double as = num_s / a.sum;
    const double dac = (dnum_c * a.sum - num_c * a.dsum) / (a.sum * a.sum);
    const double das = (dnum_s * a.sum - num_s * a.dsum) / (a.sum * a.sum);
    const double radial = ac * c + as * s;
    out.f(dof) = r.r * radial;
    const double dphi = r.r * (dac * c + das * s - ac * s + as * c);
    out.fdot(dof) = dphi * rr.phi + radial * rr.r;
  }
  return out;
}

Eigen::VectorXd forcing_vector(const PrimitiveParams& params, const Phase& phase) {
  return forcing_with_rate(params, phase).f;
}

double forcing_term(const PrimitiveParams& params, const Phase& phase, Index dof) {
  require(0 <= dof && dof < params.dofs(), ErrorCode::kInvalidArgument,
          "DOF index out of range");
  return forcing_vector(params, phase)(dof);
}

TransformState transform_derivative(const PrimitiveParams& p, const TransformState& s,
                                    const Eigen::VectorXd& f) {
  TransformState rate;
  switch (p.kind) {
    case SystemKind::kDiscrete:
      rate.y = (s.z + f) / p.tau;
      rate.z = p.alpha_z * (p.beta_z * (p.goal - s.y) - s.z) / p.tau;
      break;
    case SystemKind::kRhythmic:
      rate.y = (s.z + f) / p.tau;
      rate.z = p.alpha_z * (p.beta_z * (p.baseline - s.y) - s.z) / p.tau;
      break;
    case SystemKind::kFiltered:
      rate.y = (s.z - p.a1 * s.y) / p.tau;
      rate.z = (p.goal + f - p.a2 * s.z) / p.tau;
      break;
  }
  return rate;
}

TransformState transform_derivative(const PrimitiveParams& params,
                                    const TransformState& state, const Phase& phase) {
  return transform_derivative(params, state, forcing_vector(params, phase));
}

Eigen::VectorXd output_acceleration(const PrimitiveParams& p, const TransformState& rate,
                                    const Eigen::VectorXd& forcing_rate) {
  if (p.kind == SystemKind::kFiltered) return (rate.z - p.a1 * rate.y) / p.tau;
  return (rate.z + forcing_rate) / p.tau;
}

TransformState initial_transform(const PrimitiveParams& p, const Eigen::VectorXd& y0,
                                 const Eigen::VectorXd& ydot0, const Phase& phase) {
  require(y0.size() == p.dofs() && ydot0.size() == p.dofs(), ErrorCode::kLengthMismatch,
          "initial state must have one entry per DOF");
  if (p.kind == SystemKind::kFiltered) return {y0, p.tau * ydot0 + p.a1 * y0};
  return {y0, p.tau * ydot0 - forcing_vector(p, phase)};
}

Eigen::VectorXd output_velocity(const PrimitiveParams& p, const TransformState& state,
                                const Phase& phase) {
  return transform_derivative(p, state, phase).y;
}

PhaseStages canonical_stages(const PrimitiveParams& p, const Phase& phase, double dt) {
  PhaseStages out;
  std::array<Phase, 4> k;
  out.stage[0] = phase;
  k[0] = phase_derivative(p, out.stage[0]);
  out.stage[1] = add_scaled(phase, dt / 2, k[0]);
  k[1] = phase_derivative(p, out.stage[1]);
  out.stage[2] = add_scaled(phase, dt / 2, k[1]);
  k[2] = phase_derivative(p, out.stage[2]);
  out.stage[3] = add_scaled(phase, dt, k[2]);
  k[3] = phase_derivative(p, out.stage[3]);
  out.next = rk4_combine(phase, dt, k);
  return out;
}

TransformStages advance_transform(const PrimitiveParams& driver,
                                  const TransformState& state, const PhaseStages& phases,
                                  double dt, const TransformInjection& inject) {
  TransformStages out;
  const double offsets[4] = {0.0, dt / 2, dt / 2, dt};
  for (int i = 0; i < 4; ++i) {
    out.state[i] = i == 0 ? state : add_scaled(state, offsets[i], out.rate[i - 1]);
    out.rate[i] = transform_derivative(driver, out.state[i], phases.stage[i]);
    if (inject) {
      const TransformState extra = inject(i, out.state[i]);
      out.rate[i].y += extra.y;
      out.rate[i].z += extra.z;
    }
  }
  const auto& k = out.rate;
  out.next.y = state.y + dt / 6.0 * (k[0].y + 2.0 * k[1].y + 2.0 * k[2].y + k[3].y);
  out.next.z = state.z + dt / 6.0 * (k[0].z + 2.0 * k[1].z + 2.0 * k[2].z + k[3].z);
  return out;
}

void check_step_size(const PrimitiveParams& params, double dt) {
  if (!(dt > 0.0) || dt > params.tau / 10.0) {
    std::ostringstream msg;
    msg << "step " << dt << " outside (0, tau/10] for tau = " << params.tau;
    throw Error(ErrorCode::kStepSize, msg.str());
  }
}

StepResult step(const PrimitiveParams& params, const TransformState& transform,
                const Phase& phase, double dt) {
  check_step_size(params, dt);
  check_phase_kind(params, phase);
  const PhaseStages phases = canonical_stages(params, phase, dt);
  return {advance_transform(params, transform, phases, dt).next, phases.next};
}

std::pair<FilterState, DiscretePhase> step_filtered(const PrimitiveParams& params,
                                                    const FilterState& state,
                                                    const DiscretePhase& phase,
                                                    double dt) {
  require(params.kind == SystemKind::kFiltered, ErrorCode::kInvalidArgument,
          "step_filtered needs a filtered primitive");
  const StepResult r = step(params, TransformState{state.y, state.x}, phase, dt);
  return {FilterState{r.transform.y, r.transform.z}, std::get<DiscretePhase>(r.phase)};
}

Index sample_count(double duration, double dt) {
  require(dt > 0.0 && duration >= dt * (1.0 - 1e-12), ErrorCode::kInvalidArgument,
          "duration must be at least one step");
  return static_cast<Index>(std::floor(duration / dt + 1e-9)) + 1;
}

std::vector<Phase> phase_trace(const PrimitiveParams& params, double dt, Index samples) {
  std::vector<Phase> trace;
  trace.reserve(static_cast<size_t>(samples));
  Phase phase = initial_phase(params);
  for (Index k = 0; k < samples; ++k) {
    trace.push_back(phase);
    if (k + 1 < samples) phase = canonical_stages(params, phase, dt).next;
  }
  return trace;
}

Trajectory rollout(const PrimitiveParams& params, const Eigen::VectorXd& y0,
                   const Eigen::VectorXd& ydot0, double dt, double duration) {
  validate(params);
  check_step_size(params, dt);
  const Index n = sample_count(duration, dt);
  Trajectory traj = make_trajectory(n, params.dofs(), dt, params.dof_names);

  Phase phase = initial_phase(params);
  TransformState state = initial_transform(params, y0, ydot0, phase);
  for (Index k = 0; k < n; ++k) {
    const ForcingSample fs = forcing_with_rate(params, phase);
    const TransformState rate = transform_derivative(params, state, fs.f);
    traj.y.row(k) = state.y.transpose();
    traj.ydot.row(k) = rate.y.transpose();
    traj.yddot.row(k) = output_acceleration(params, rate, fs.fdot).transpose();
    if (k + 1 < n) {
      const PhaseStages phases = canonical_stages(params, phase, dt);
      state = advance_transform(params, state, phases, dt).next;
      phase = phases.next;
    }
  }
  return traj;
}

Trajectory rollout(const PrimitiveParams& params, double dt, double duration) {
  return rollout(params, params.start, params.start_velocity, dt, duration);
}

}  // namespace dmpflight
