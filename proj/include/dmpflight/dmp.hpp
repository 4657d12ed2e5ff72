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

#ifndef DMPFLIGHT_DMP_HPP_
#define DMPFLIGHT_DMP_HPP_

#include <array>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dmpflight/trajectory.hpp"

namespace dmpflight {

enum class SystemKind { kDiscrete, kRhythmic, kFiltered };

const char* to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

/// Gaussian basis over the canonical phase. Discrete centers live on the
/// normalized phase x/g in [0, 1]; rhythmic centers are angles in [0, 2pi).
struct BasisSet {
  Eigen::VectorXd centers;
  Eigen::VectorXd widths;

  Index size() const { return centers.size(); }
  bool operator==(const BasisSet& other) const {
    return centers == other.centers && widths == other.widths;
  }
};

/// Learned (or hand-built) movement primitive. Every per-DOF vector has one
/// entry per DOF; `weights` has one row per DOF and basis.size() *
/// components() columns, with rhythmic weights interleaved as
/// (cos, sin) pairs per basis.
struct PrimitiveParams {
  SystemKind kind = SystemKind::kDiscrete;
  double alpha_z = 25.0;
  double beta_z = 6.25;
  double alpha_v = 25.0;
  double beta_v = 6.25;
  double tau = 1.0;
  double mu = 1.0;
  double r0 = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  Eigen::VectorXd goal;
  Eigen::VectorXd baseline;
  Eigen::VectorXd start;
  Eigen::VectorXd start_velocity;
  BasisSet basis;
  Eigen::MatrixXd weights;
  std::vector<std::string> dof_names;

  Index dofs() const { return weights.rows(); }
  Index components() const { return kind == SystemKind::kRhythmic ? 2 : 1; }
  bool operator==(const PrimitiveParams& other) const;
};

/// Canonical state of the discrete (and filtered) systems, normalized to a
/// unit goal. The unnormalized phase of DOF d is (g_d * x, g_d * v), so every
/// DOF sees the same x/g and one canonical system drives all DOFs.
struct DiscretePhase {
  double x = 0.0;
  double v = 0.0;
};

struct RhythmicPhase {
  double phi = 0.0;
  double r = 1.0;
};

using Phase = std::variant<DiscretePhase, RhythmicPhase>;

/// Output system state. For the filtered kind `z` carries the inner filter
/// state instead of the scaled velocity.
struct TransformState {
  Eigen::VectorXd y;
  Eigen::VectorXd z;
};

struct ForcingSample {
  Eigen::VectorXd f;
  Eigen::VectorXd fdot;
};

constexpr double kNormalizerFloor = 1e-10;

/// Equally spaced rhythmic centers with widths making neighbours cross at
/// 0.5; discrete centers at the canonical phase reached at equally spaced
/// times over one tau, the last one pinned at the phase goal.
BasisSet make_basis(SystemKind kind, Index count, double alpha_v = 25.0,
                    double beta_v = 6.25);

/// Default-gain primitive with zero weights, zero goals and baselines.
PrimitiveParams make_params(SystemKind kind, Index dofs, Index basis_count);

void validate(const PrimitiveParams& params);

/// Maps an unnormalized discrete phase x (DOF units) to x/g.
DiscretePhase normalize_phase(const DiscretePhase& raw, double goal);

Phase initial_phase(const PrimitiveParams& params);
Phase phase_derivative(const PrimitiveParams& params, const Phase& phase);

Eigen::VectorXd basis_activation(const PrimitiveParams& params, const Phase& phase);

double forcing_term(const PrimitiveParams& params, const Phase& phase, Index dof);
Eigen::VectorXd forcing_vector(const PrimitiveParams& params, const Phase& phase);
/// Forcing values and their time derivatives along the canonical flow.
ForcingSample forcing_with_rate(const PrimitiveParams& params, const Phase& phase);

TransformState transform_derivative(const PrimitiveParams& params,
                                    const TransformState& state,
                                    const Eigen::VectorXd& forcing);
TransformState transform_derivative(const PrimitiveParams& params,
                                    const TransformState& state, const Phase& phase);

/// Output acceleration given the (possibly externally augmented) transform
/// derivative and the forcing rate.
Eigen::VectorXd output_acceleration(const PrimitiveParams& params,
                                    const TransformState& rate,
                                    const Eigen::VectorXd& forcing_rate);

/// Transform state reproducing position y0 and velocity ydot0 at `phase`.
TransformState initial_transform(const PrimitiveParams& params,
                                 const Eigen::VectorXd& y0,
                                 const Eigen::VectorXd& ydot0, const Phase& phase);

/// Output velocity implied by a transform state.
Eigen::VectorXd output_velocity(const PrimitiveParams& params,
                                const TransformState& state, const Phase& phase);

/// The four Runge-Kutta stage phases of one canonical step and the result.
struct PhaseStages {
  std::array<Phase, 4> stage;
  Phase next;
};

PhaseStages canonical_stages(const PrimitiveParams& params, const Phase& phase,
                             double dt);

/// Extra derivative injected at RK stage `stage` (0..3) of a transform step.
using TransformInjection =
    std::function<TransformState(int stage, const TransformState& stage_state)>;

struct TransformStages {
  std::array<TransformState, 4> state;
  std::array<TransformState, 4> rate;
  TransformState next;
};

/// One RK4 step of the transform system driven by precomputed canonical
/// stages of `driver` (the primitive whose field is integrated).
TransformStages advance_transform(const PrimitiveParams& driver,
                                  const TransformState& state,
                                  const PhaseStages& phases, double dt,
                                  const TransformInjection& inject = {});

struct StepResult {
  TransformState transform;
  Phase phase;
};

/// Advances canonical and transform systems by one RK4 step. The canonical
/// system is integrated on its own, so its trace does not depend on the
/// transform state.
StepResult step(const PrimitiveParams& params, const TransformState& transform,
                const Phase& phase, double dt);

struct FilterState {
  Eigen::VectorXd y;
  Eigen::VectorXd x;
};

/// Filtered-kind step over the cascade tau*ydot + a1*y = x,
/// tau*xdot + a2*x = g + f.
std::pair<FilterState, DiscretePhase> step_filtered(const PrimitiveParams& params,
                                                    const FilterState& state,
                                                    const DiscretePhase& phase,
                                                    double dt);

void check_step_size(const PrimitiveParams& params, double dt);

/// floor(duration / dt) + 1, tolerant to representation error in the ratio.
Index sample_count(double duration, double dt);

/// Canonical states at k * dt for k = 0..samples-1.
std::vector<Phase> phase_trace(const PrimitiveParams& params, double dt, Index samples);

Trajectory rollout(const PrimitiveParams& params, const Eigen::VectorXd& y0,
                   const Eigen::VectorXd& ydot0, double dt, double duration);
/// Rollout from the stored start position and velocity.
Trajectory rollout(const PrimitiveParams& params, double dt, double duration);

}  // namespace dmpflight

#endif  // DMPFLIGHT_DMP_HPP_
