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

#include "dmpflight/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "dmpflight/error.hpp"

namespace dmpflight {
namespace {

void require_transform_kind(const PrimitiveParams& p) {
  require(p.kind != SystemKind::kFiltered, ErrorCode::kInvalidArgument,
          "coupling supports discrete and rhythmic primitives");
}

void require_compatible(const PrimitiveParams& a, const PrimitiveParams& b) {
  validate(a);
  validate(b);
  require_transform_kind(a);
  require_transform_kind(b);
  require(a.kind == b.kind, ErrorCode::kInvalidArgument, "coupled primitives differ in kind");
  require(a.dofs() == b.dofs(), ErrorCode::kLengthMismatch,
          "coupled primitives differ in DOF count");
}

Index first_index_at_or_after(double t, double dt) {
  return static_cast<Index>(std::ceil(t / dt - 1e-9));
}

TransformState scaled_difference(double gain, const TransformState& to,
                                 const TransformState& from) {
  return {gain * (to.y - from.y), gain * (to.z - from.z)};
}

void add_to(TransformState* acc, const TransformState& extra) {
  acc->y += extra.y;
  acc->z += extra.z;
}

// Re-expresses a follower state in the leader's z so that position and
// velocity are unchanged when the leader's field takes over.
TransformState remap_into(const PrimitiveParams& follower, const Eigen::VectorXd& f_follower,
                          const PrimitiveParams& leader, const Eigen::VectorXd& f_leader,
                          const TransformState& s) {
  if (follower.tau == leader.tau) return {s.y, s.z + (f_follower - f_leader)};
  return {s.y, leader.tau / follower.tau * (s.z + f_follower) - f_leader};
}

struct FollowRun {
  Trajectory leader;    // Starts at merged sample `leader_offset`.
  Trajectory follower;  // All samples.
  Index activation_index = -1;
};

// Leader starts running at sample `leader_offset`; the follower runs its own
// field until `activation` and then the leader's field plus diffusive coupling.
FollowRun run_follow(const PrimitiveParams& leader, const Eigen::VectorXd& leader_y0,
                     const Eigen::VectorXd& leader_ydot0, const PrimitiveParams& follower,
                     double gain, Index activation, Index leader_offset, Index n, double dt) {
  FollowRun run;
  run.follower = make_trajectory(n, follower.dofs(), dt, follower.dof_names);
  run.leader = make_trajectory(n - leader_offset, leader.dofs(), dt, leader.dof_names);
  const double kappa = gain * coupling_stiffness(leader);

  Phase phase_f = initial_phase(follower);
  TransformState state_f =
      initial_transform(follower, follower.start, follower.start_velocity, phase_f);
  Phase phase_l = initial_phase(leader);
  TransformState state_l;
  bool active = false;

  for (Index k = 0; k < n; ++k) {
    const bool leader_running = k >= leader_offset;
    ForcingSample fs_l;
    TransformState rate_l;
    if (k == leader_offset) state_l = initial_transform(leader, leader_y0, leader_ydot0, phase_l);
    if (leader_running) {
      fs_l = forcing_with_rate(leader, phase_l);
      rate_l = transform_derivative(leader, state_l, fs_l.f);
      const Index j = k - leader_offset;
      run.leader.y.row(j) = state_l.y.transpose();
      run.leader.ydot.row(j) = rate_l.y.transpose();
      run.leader.yddot.row(j) = output_acceleration(leader, rate_l, fs_l.fdot).transpose();
    }
    if (k == activation) {
      state_f = remap_into(follower, forcing_vector(follower, phase_f), leader, fs_l.f, state_f);
      // The diffusive term also acts on y; compensate so the velocity is kept.
      if (kappa != 0.0) state_f.z -= leader.tau * kappa * (state_l.y - state_f.y);
      active = true;
      run.activation_index = k;
    }

    if (active) {
      TransformState rate = transform_derivative(leader, state_f, fs_l.f);
      add_to(&rate, scaled_difference(kappa, state_l, state_f));
      run.follower.y.row(k) = state_f.y.transpose();
      run.follower.ydot.row(k) = rate.y.transpose();
      run.follower.yddot.row(k) =
          ((rate.z + fs_l.fdot) / leader.tau + kappa * (rate_l.y - rate.y)).transpose();
    } else {
      const ForcingSample fs = forcing_with_rate(follower, phase_f);
      const TransformState rate = transform_derivative(follower, state_f, fs.f);
      run.follower.y.row(k) = state_f.y.transpose();
      run.follower.ydot.row(k) = rate.y.transpose();
      run.follower.yddot.row(k) = output_acceleration(follower, rate, fs.fdot).transpose();
    }
    if (k + 1 == n) break;

    TransformStages leader_stages;
    PhaseStages leader_phases;
    if (leader_running) {
      leader_phases = canonical_stages(leader, phase_l, dt);
      leader_stages = advance_transform(leader, state_l, leader_phases, dt);
    }
    if (active) {
      const TransformInjection inject = [&](int i, const TransformState& s) {
        return scaled_difference(kappa, leader_stages.state[static_cast<size_t>(i)], s);
      };
      state_f = advance_transform(leader, state_f, leader_phases, dt, inject).next;
    } else {
      const PhaseStages phases = canonical_stages(follower, phase_f, dt);
      state_f = advance_transform(follower, state_f, phases, dt).next;
      phase_f = phases.next;
    }
    if (leader_running) {
      state_l = leader_stages.next;
      phase_l = leader_phases.next;
    }
  }
  return run;
}

Eigen::VectorXd gap_of(const Trajectory& a, const Trajectory& b) {
  return (a.y - b.y).rowwise().norm();
}

std::vector<Index> sample_indices(Index first, Index last, Index max_count) {
  std::vector<Index> out;
  if (last <= first) return out;
  const Index stride = std::max<Index>(1, (last - first) / max_count);
  for (Index k = first; k < last; k += stride) out.push_back(k);
  return out;
}

Eigen::VectorXd stack(const TransformState& s) {
  Eigen::VectorXd x(2 * s.y.size());
  x << s.y, s.z;
  return x;
}

TransformState unstack(const Eigen::VectorXd& x) {
  const Index n = x.size() / 2;
  return {x.head(n), x.tail(n)};
}

Eigen::MatrixXd transform_linear_part(const PrimitiveParams& p) {
  const Index n = p.dofs();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd a(2 * n, 2 * n);
  a << Eigen::MatrixXd::Zero(n, n), eye / p.tau,
      -p.alpha_z * p.beta_z / p.tau * eye, -p.alpha_z / p.tau * eye;
  return a;
}

}  // namespace

const char* to_string(CouplingMode mode) {
  return mode == CouplingMode::kOneWay ? "one_way" : "two_way";
}

CouplingMode coupling_mode_from_string(const std::string& name) {
  if (name == "one_way") return CouplingMode::kOneWay;
  if (name == "two_way") return CouplingMode::kTwoWay;
  throw Error(ErrorCode::kInvalidArgument, "unknown coupling mode '" + name + "'");
}

void validate(const CouplingSpec& spec) {
  require(std::isfinite(spec.gain), ErrorCode::kInvalidArgument, "coupling gain must be finite");
  require(spec.activation_phase >= 0.0 && spec.activation_phase <= 1.0,
          ErrorCode::kInvalidArgument, "activation phase must lie in [0, 1]");
  if (spec.mode == CouplingMode::kTwoWay) {
    require(spec.gain > 0.0, ErrorCode::kInvalidArgument, "two-way coupling needs K > 0");
  }
}

double coupling_stiffness(const PrimitiveParams& params) {
  return params.alpha_z * params.beta_z / params.tau;
}

CoupledRollout one_way_rollout(const PrimitiveParams& leader, const PrimitiveParams& follower,
                               const CouplingSpec& spec, double dt, double duration) {
  validate(spec);
  require(spec.mode == CouplingMode::kOneWay, ErrorCode::kInvalidArgument,
          "one_way_rollout needs a one-way spec");
  require_compatible(leader, follower);
  check_step_size(leader, dt);
  check_step_size(follower, dt);
  const Index n = sample_count(duration, dt);
  const Index activation = spec.activation_phase >= 1.0
                               ? n
                               : first_index_at_or_after(spec.activation_phase * follower.tau, dt);
  FollowRun run = run_follow(leader, leader.start, leader.start_velocity, follower, spec.gain,
                             activation, 0, n, dt);
  CoupledRollout out;
  out.gap = gap_of(run.follower, run.leader);
  out.leader = std::move(run.leader);
  out.follower = std::move(run.follower);
  out.activation_index = run.activation_index;
  return out;
}

CoupledRollout two_way_rollout(const PrimitiveParams& p1, const PrimitiveParams& p2,
                               const CouplingSpec& spec, double dt, double duration) {
  validate(spec);
  require(spec.mode == CouplingMode::kTwoWay, ErrorCode::kInvalidArgument,
          "two_way_rollout needs a two-way spec");
  require_compatible(p1, p2);
  require(p1.tau == p2.tau, ErrorCode::kInvalidArgument,
          "two-way coupling needs a common tau");
  check_step_size(p1, dt);
  const Index n = sample_count(duration, dt);
  const PrimitiveParams* params[2] = {&p1, &p2};
  const double kappa[2] = {spec.gain * coupling_stiffness(p1), spec.gain * coupling_stiffness(p2)};
  Trajectory traj[2] = {make_trajectory(n, p1.dofs(), dt, p1.dof_names),
                        make_trajectory(n, p2.dofs(), dt, p2.dof_names)};
  Phase phase[2] = {initial_phase(p1), initial_phase(p2)};
  TransformState state[2];
  for (int i = 0; i < 2; ++i) {
    state[i] = initial_transform(*params[i], params[i]->start, params[i]->start_velocity,
                                 phase[i]);
  }

  for (Index k = 0; k < n; ++k) {
    ForcingSample fs[2];
    TransformState rate[2];
    for (int i = 0; i < 2; ++i) {
      fs[i] = forcing_with_rate(*params[i], phase[i]);
      rate[i] = transform_derivative(*params[i], state[i], fs[i].f);
      add_to(&rate[i], scaled_difference(kappa[i], state[1 - i], state[i]));
    }
    for (int i = 0; i < 2; ++i) {
      traj[i].y.row(k) = state[i].y.transpose();
      traj[i].ydot.row(k) = rate[i].y.transpose();
      traj[i].yddot.row(k) = ((rate[i].z + fs[i].fdot) / params[i]->tau +
                              kappa[i] * (rate[1 - i].y - rate[i].y))
                                 .transpose();
    }
    if (k + 1 == n) break;

    PhaseStages phases[2] = {canonical_stages(p1, phase[0], dt),
                             canonical_stages(p2, phase[1], dt)};
    std::array<TransformState, 4> stage_state[2];
    std::array<TransformState, 4> stage_rate[2];
    const double offsets[4] = {0.0, dt / 2, dt / 2, dt};
    for (int s = 0; s < 4; ++s) {
      for (int i = 0; i < 2; ++i) {
        stage_state[i][s] = state[i];
        if (s > 0) {
          stage_state[i][s].y += offsets[s] * stage_rate[i][s - 1].y;
          stage_state[i][s].z += offsets[s] * stage_rate[i][s - 1].z;
        }
      }
      for (int i = 0; i < 2; ++i) {
        stage_rate[i][s] = transform_derivative(*params[i], stage_state[i][s], phases[i].stage[s]);
        add_to(&stage_rate[i][s],
               scaled_difference(kappa[i], stage_state[1 - i][s], stage_state[i][s]));
      }
    }
    for (int i = 0; i < 2; ++i) {
      const auto& r = stage_rate[i];
      state[i].y += dt / 6.0 * (r[0].y + 2.0 * r[1].y + 2.0 * r[2].y + r[3].y);
      state[i].z += dt / 6.0 * (r[0].z + 2.0 * r[1].z + 2.0 * r[2].z + r[3].z);
      phase[i] = phases[i].next;
    }
  }

  CoupledRollout out;
  out.gap = gap_of(traj[1], traj[0]);
  out.leader = std::move(traj[0]);
  out.follower = std::move(traj[1]);
  out.activation_index = 0;
  return out;
}

Eigen::MatrixXd blend_weights(const Eigen::MatrixXd& w_a, const Eigen::MatrixXd& w_b,
                              double alpha, double beta) {
  if (w_a.rows() != w_b.rows() || w_a.cols() != w_b.cols()) {
    std::ostringstream msg;
    msg << "weight shapes differ: " << w_a.rows() << "x" << w_a.cols() << " vs " << w_b.rows()
        << "x" << w_b.cols();
    throw Error(ErrorCode::kBasisMismatch, msg.str());
  }
  return alpha * w_a + beta * w_b;
}

PrimitiveParams blend(const PrimitiveParams& a, const PrimitiveParams& b, double alpha,
                      double beta) {
  validate(a);
  validate(b);
  require(a.basis == b.basis, ErrorCode::kBasisMismatch, "primitives use different bases");
  require(a.kind == b.kind && a.tau == b.tau && a.alpha_z == b.alpha_z &&
              a.beta_z == b.beta_z && a.alpha_v == b.alpha_v && a.beta_v == b.beta_v &&
              a.mu == b.mu && a.r0 == b.r0 && a.a1 == b.a1 && a.a2 == b.a2,
          ErrorCode::kInvalidArgument, "primitives differ in kind, tau or gains");
  PrimitiveParams out = a;
  out.weights = blend_weights(a.weights, b.weights, alpha, beta);
  out.goal = alpha * a.goal + beta * b.goal;
  out.baseline = alpha * a.baseline + beta * b.baseline;
  out.start = alpha * a.start + beta * b.start;
  out.start_velocity = alpha * a.start_velocity + beta * b.start_velocity;
  return out;
}

JunctionJump junction_jump(const Trajectory& traj, Index k) {
  require(k >= 1 && k < traj.samples(), ErrorCode::kInvalidArgument,
          "junction index out of range");
  JunctionJump j;
  const double dt = traj.dt;
  j.position = (traj.y.row(k) - traj.y.row(k - 1) - dt * traj.ydot.row(k - 1)).cwiseAbs().maxCoeff();
  j.velocity =
      (traj.ydot.row(k) - traj.ydot.row(k - 1) - dt * traj.yddot.row(k - 1)).cwiseAbs().maxCoeff();
  j.acceleration = (traj.yddot.row(k) - traj.yddot.row(k - 1)).cwiseAbs().maxCoeff();
  return j;
}

Concatenation concatenate(const PrimitiveParams& first, const PrimitiveParams& second,
                          const CouplingSpec& spec, double dt,
                          const ConcatenateOptions& options) {
  validate(spec);
  require(spec.mode == CouplingMode::kOneWay, ErrorCode::kInvalidArgument,
          "concatenation uses one-way coupling");
  require_compatible(first, second);
  require(first.kind == SystemKind::kDiscrete, ErrorCode::kInvalidArgument,
          "concatenation needs discrete primitives");
  require(options.settle_fraction >= 0.0, ErrorCode::kInvalidArgument,
          "settle fraction must be non-negative");
  check_step_size(first, dt);
  check_step_size(second, dt);

  const Eigen::VectorXd leader_y0 = options.second_start.value_or(second.start);
  require(leader_y0.size() == second.dofs(), ErrorCode::kLengthMismatch,
          "second start has the wrong size");
  const Eigen::VectorXd leader_ydot0 =
      options.second_start ? Eigen::VectorXd::Zero(second.dofs()) : second.start_velocity;

  Concatenation out;
  out.coupled = spec.activation_phase < 1.0;
  const double t_switch = (out.coupled ? spec.activation_phase : 1.0) * first.tau;
  out.junction_index = first_index_at_or_after(t_switch, dt);
  const Index leader_samples = sample_count(second.tau * (1.0 + options.settle_fraction), dt);
  const Index n = out.junction_index + leader_samples;

  if (out.coupled) {
    FollowRun run = run_follow(second, leader_y0, leader_ydot0, first, spec.gain,
                               out.junction_index, out.junction_index, n, dt);
    out.merged = std::move(run.follower);
    out.leader = std::move(run.leader);
  } else {
    const Trajectory head = rollout(first, first.start, first.start_velocity, dt,
                                    static_cast<double>(out.junction_index) * dt);
    out.leader = rollout(second, leader_y0, leader_ydot0, dt,
                         static_cast<double>(leader_samples - 1) * dt);
    out.merged = make_trajectory(n, first.dofs(), dt, first.dof_names);
    const Index h = out.junction_index;
    out.merged.y << head.y.topRows(h), out.leader.y;
    out.merged.ydot << head.ydot.topRows(h), out.leader.ydot;
    out.merged.yddot << head.yddot.topRows(h), out.leader.yddot;
  }
  if (out.junction_index >= 1) out.jump = junction_jump(out.merged, out.junction_index);
  return out;
}

ContractionReport<double> one_way_certificate(const PrimitiveParams& leader,
                                              const CouplingSpec& spec,
                                              const CoupledRollout& rollout, double margin) {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  if (rollout.activation_index < 0) return summarize<double>({}, margin);
  const double dt = rollout.follower.dt;
  const double kappa = spec.gain * coupling_stiffness(leader);
  const auto trace = phase_trace(leader, dt, rollout.leader.samples());

  std::vector<TransformState> leader_states;
  for (Index k : sample_indices(rollout.activation_index, rollout.follower.samples(), 2000)) {
    const Eigen::VectorXd f = forcing_vector(leader, trace[static_cast<size_t>(k)]);
    const Eigen::VectorXd yl = rollout.leader.y.row(k).transpose();
    const Eigen::VectorXd yf = rollout.follower.y.row(k).transpose();
    const TransformState sl{yl, leader.tau * rollout.leader.ydot.row(k).transpose() - f};
    const Eigen::VectorXd zf =
        leader.tau * (rollout.follower.ydot.row(k).transpose() - kappa * (yl - yf)) - f;
    times.push_back(static_cast<double>(k) * dt);
    states.push_back(stack({yf, zf}));
    leader_states.push_back(sl);
  }
  const VectorField<double> field = [&](const Eigen::VectorXd& x, double t) {
    const Index k = std::min<Index>(static_cast<Index>(std::llround(t / dt)),
                                    static_cast<Index>(trace.size()) - 1);
    const size_t idx = static_cast<size_t>(
        std::lower_bound(times.begin(), times.end(), t - 0.5 * dt) - times.begin());
    const TransformState s = unstack(x);
    TransformState rate = transform_derivative(leader, s, trace[static_cast<size_t>(k)]);
    add_to(&rate, scaled_difference(kappa, leader_states[idx], s));
    return stack(rate);
  };
  const Metric<double> metric = lyapunov_metric(transform_linear_part(leader));
  return check_trajectory(field, metric, times, states, margin);
}

ContractionReport<double> two_way_certificate(const PrimitiveParams& p1,
                                              const CouplingSpec& spec,
                                              const CoupledRollout& rollout, double margin) {
  const double dt = rollout.leader.dt;
  const double kappa = spec.gain * coupling_stiffness(p1);
  const auto trace = phase_trace(p1, dt, rollout.leader.samples());
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  for (Index k : sample_indices(0, rollout.leader.samples(), 2000)) {
    const Eigen::VectorXd f = forcing_vector(p1, trace[static_cast<size_t>(k)]);
    const Eigen::VectorXd y1 = rollout.leader.y.row(k).transpose();
    const Eigen::VectorXd y2 = rollout.follower.y.row(k).transpose();
    const Eigen::VectorXd z1 =
        p1.tau * (rollout.leader.ydot.row(k).transpose() - kappa * (y2 - y1)) - f;
    times.push_back(static_cast<double>(k) * dt);
    states.push_back(stack({y1, z1}));
  }
  const VectorField<double> field = [&](const Eigen::VectorXd& x, double t) {
    const Index k = std::min<Index>(static_cast<Index>(std::llround(t / dt)),
                                    static_cast<Index>(trace.size()) - 1);
    const Eigen::VectorXd rate =
        stack(transform_derivative(p1, unstack(x), trace[static_cast<size_t>(k)]));
    return Eigen::VectorXd(rate - 2.0 * kappa * x);
  };
  return check_trajectory(field, Metric<double>::identity(2 * p1.dofs()), times, states,
                          margin);
}

HierarchyReport<double> check_primitive_hierarchy(const PrimitiveParams& params, double dt,
                                                  double duration, double margin) {
  validate(params);
  require(params.kind != SystemKind::kRhythmic, ErrorCode::kInvalidArgument,
          "hierarchy check needs a discrete or filtered primitive");
  const Trajectory traj = rollout(params, dt, duration);
  const auto trace = phase_trace(params, dt, traj.samples());

  auto to_phase = [](const Eigen::VectorXd& x1) { return Phase{DiscretePhase{x1(0), x1(1)}}; };
  const VectorField<double> top = [&](const Eigen::VectorXd& x1, double) {
    const auto d = std::get<DiscretePhase>(phase_derivative(params, to_phase(x1)));
    return Eigen::Vector2d(d.x, d.v).eval();
  };
  const DrivenField<double> bottom = [&](const Eigen::VectorXd& x2, const Eigen::VectorXd& x1,
                                         double) {
    return stack(transform_derivative(params, unstack(x2), to_phase(x1)));
  };

  std::vector<double> times;
  std::vector<Eigen::VectorXd> top_states, bottom_states;
  for (Index k : sample_indices(0, traj.samples(), 2000)) {
    const auto& ph = std::get<DiscretePhase>(trace[static_cast<size_t>(k)]);
    const Eigen::VectorXd y = traj.y.row(k).transpose();
    const Eigen::VectorXd ydot = traj.ydot.row(k).transpose();
    const Eigen::VectorXd z = params.kind == SystemKind::kFiltered
                                  ? Eigen::VectorXd(params.tau * ydot + params.a1 * y)
                                  : Eigen::VectorXd(params.tau * ydot -
                                                    forcing_vector(params, trace[static_cast<size_t>(k)]));
    times.push_back(static_cast<double>(k) * dt);
    top_states.push_back(Eigen::Vector2d(ph.x, ph.v));
    bottom_states.push_back(stack({y, z}));
  }
  const Metric<double> top_metric =
      lyapunov_metric(numeric_jacobian(top, top_states.front(), 0.0));
  const VectorField<double> lower = [&](const Eigen::VectorXd& x2, double t) {
    return bottom(x2, top_states.front(), t);
  };
  const Metric<double> bottom_metric =
      lyapunov_metric(numeric_jacobian(lower, bottom_states.front(), 0.0));
  return check_hierarchy(top, bottom, top_metric, bottom_metric, times, top_states,
                         bottom_states, margin);
}

double log_gap_slope(const Eigen::VectorXd& gap, double dt, Index first, Index last) {
  require(first >= 0 && last <= gap.size() && last - first >= 2, ErrorCode::kInvalidArgument,
          "need at least two gap samples");
  const double floor = 1e-14 * gap.segment(first, last - first).maxCoeff();
  double st = 0, sl = 0, stt = 0, stl = 0, count = 0;
  for (Index k = first; k < last; ++k) {
    if (!(gap(k) > floor)) continue;
    const double t = static_cast<double>(k) * dt;
    const double l = std::log(gap(k));
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    count += 1;
  }
  require(count >= 2, ErrorCode::kInvalidArgument, "gap vanished before regression");
  return (count * stl - st * sl) / (count * stt - st * st);
}

}  // namespace dmpflight
