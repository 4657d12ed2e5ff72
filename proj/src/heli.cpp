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

#include "dmpflight/heli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmpflight/error.hpp"

namespace dmpflight {
namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;

Vector6d derivative(const Vector6d& x, const ControlInput& u, const HeliParams& p) {
  return dynamics(HeliState::from_vector(x), u, p).vector();
}

void check_finite_bounded(const HeliState& s, double t) {
  const Vector6d v = s.vector();
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > 1e3) {
    std::ostringstream msg;
    msg << "simulation diverged at t = " << t;
    throw Error(ErrorCode::kDivergence, msg.str());
  }
}

AxisReference interpolate(const Trajectory& ref, Index dof, Index k, double frac) {
  const Index k1 = std::min(k + 1, ref.samples() - 1);
  auto lerp = [&](const Eigen::MatrixXd& m) {
    return (1.0 - frac) * m(k, dof) + frac * m(k1, dof);
  };
  return {lerp(ref.y), lerp(ref.ydot), lerp(ref.yddot)};
}

}  // namespace

void validate(const HeliParams& p) {
  const bool positive = p.j_xx > 0 && p.j_yy > 0 && p.j_zz > 0 && p.mass > 0 &&
                        p.rotor_mass > 0 && p.beam_length > 0 && p.rotor_arm > 0 &&
                        p.l_theta > 0 && p.l_phi > 0 && p.rho > 0 && p.g_grav > 0 &&
                        p.t_max > 0;
  require(positive, ErrorCode::kInvalidArgument,
          "helicopter inertias, masses, lengths, rho and T_max must be positive");
  require(p.s0 >= 0 && p.s0_roll >= 0, ErrorCode::kInvalidArgument,
          "drag coefficients must be non-negative");
}

Vector6d HeliState::vector() const {
  Vector6d v;
  v << psi, theta, phi, psi_dot, theta_dot, phi_dot;
  return v;
}

HeliState HeliState::from_vector(const Vector6d& v) {
  return {v(0), v(1), v(2), v(3), v(4), v(5)};
}

double drag(const HeliState& s, const HeliParams& p) {
  const double speed = s.psi_dot * p.beam_length;
  return 0.5 * p.rho * speed * std::abs(speed) * (p.s0 + p.s0_roll * std::sin(s.phi)) *
         p.beam_length;
}

HeliState dynamics(const HeliState& s, const ControlInput& u, const HeliParams& p) {
  const double sin_phi = std::sin(s.phi);
  const double psi_ddot = (u.t_col * p.beam_length * std::cos(s.theta) * sin_phi -
                           u.t_cyc * p.rotor_arm * std::sin(s.theta) * sin_phi - drag(s, p)) /
                          p.j_zz;
  const double theta_ddot = (-p.mass * p.g_grav * p.l_theta * std::sin(s.theta + p.theta_0) +
                             u.t_col * p.beam_length * std::cos(s.phi)) /
                            p.j_yy;
  const double phi_ddot =
      (-p.rotor_mass * p.g_grav * p.l_phi * sin_phi + u.t_cyc * p.rotor_arm) / p.j_xx;
  return {s.psi_dot, s.theta_dot, s.phi_dot, psi_ddot, theta_ddot, phi_ddot};
}

double mechanical_energy(const HeliState& s, const HeliParams& p) {
  return 0.5 * (p.j_zz * s.psi_dot * s.psi_dot + p.j_yy * s.theta_dot * s.theta_dot +
                p.j_xx * s.phi_dot * s.phi_dot) +
         p.mass * p.g_grav * p.l_theta * (1.0 - std::cos(s.theta + p.theta_0)) +
         p.rotor_mass * p.g_grav * p.l_phi * (1.0 - std::cos(s.phi));
}

ControlInput saturate(const ControlInput& u, const HeliParams& p) {
  return {std::clamp(u.t_col, -p.t_max, p.t_max), std::clamp(u.t_cyc, -p.t_max, p.t_max)};
}

double hover_thrust(double theta, const HeliParams& p) {
  return p.mass * p.g_grav * p.l_theta * std::sin(theta + p.theta_0) / p.beam_length;
}

ControlInput controller(const HeliState& s, const HeliReference& ref, const HeliParams& p,
                        const ControllerGains& g) {
  if (!(std::abs(s.phi) < kPi / 2 - g.roll_guard)) {
    std::ostringstream msg;
    msg << "roll " << s.phi << " rad reached the guard band";
    throw Error(ErrorCode::kRollGuard, msg.str());
  }
  ControlInput u;
  const double theta_acc = ref.theta.acc + g.k_d * (ref.theta.vel - s.theta_dot) +
                           g.k_p * (ref.theta.pos - s.theta);
  u.t_col = (p.j_yy * theta_acc + p.mass * p.g_grav * p.l_theta * std::sin(s.theta + p.theta_0)) /
            (p.beam_length * std::cos(s.phi));
  u.t_col = std::clamp(u.t_col, -p.t_max, p.t_max);

  // Travel is steered through roll: pick the roll whose thrust component
  // produces the commanded travel acceleration.
  const double psi_acc =
      ref.psi.acc + g.k_d * (ref.psi.vel - s.psi_dot) + g.k_p * (ref.psi.pos - s.psi);
  const double authority = u.t_col * p.beam_length * std::cos(s.theta);
  double phi_d = 0.0;
  if (std::abs(authority) > 1e-9) {
    const double sin_phi_d = (p.j_zz * psi_acc + drag(s, p)) / authority;
    phi_d = std::asin(std::clamp(sin_phi_d, -std::sin(g.roll_limit), std::sin(g.roll_limit)));
  }
  u.t_cyc = (p.j_xx * (g.k_d_roll * (0.0 - s.phi_dot) + g.k_p_roll * (phi_d - s.phi)) +
             p.rotor_mass * p.g_grav * p.l_phi * std::sin(s.phi)) /
            p.rotor_arm;
  return saturate(u, p);
}

HeliState rk4_step(const HeliState& state, const ControlInput& u, const HeliParams& p,
                   double dt) {
  const Vector6d x = state.vector();
  const Vector6d k1 = derivative(x, u, p);
  const Vector6d k2 = derivative(x + dt / 2 * k1, u, p);
  const Vector6d k3 = derivative(x + dt / 2 * k2, u, p);
  const Vector6d k4 = derivative(x + dt * k3, u, p);
  return HeliState::from_vector(x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
}

TrackingResult simulate_tracking(const Trajectory& reference, const HeliParams& params,
                                 const ControllerGains& gains, double dt) {
  validate(params);
  validate(reference);
  const Index psi = reference.dof_index("psi");
  const Index theta = reference.dof_index("theta");
  require(psi >= 0 && theta >= 0, ErrorCode::kInvalidArgument,
          "reference needs DOFs named psi and theta");
  require(dt > 0.0, ErrorCode::kStepSize, "simulation step must be positive");
  const double ratio = reference.dt / dt;
  const Index sub = static_cast<Index>(std::llround(ratio));
  require(sub >= 1 && std::abs(ratio - static_cast<double>(sub)) < 1e-9 * ratio,
          ErrorCode::kStepSize, "simulation step must divide the reference step");

  const Index n = (reference.samples() - 1) * sub + 1;
  TrackingResult out;
  out.actual = make_trajectory(n, 3, dt, {"psi", "theta", "phi"});
  out.controls.resize(n, 2);

  HeliState s;
  s.psi = reference.y(0, psi);
  s.theta = reference.y(0, theta);
  s.psi_dot = reference.ydot(0, psi);
  s.theta_dot = reference.ydot(0, theta);

  double sq_psi = 0.0, sq_theta = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index k = i / sub;
    const double frac = static_cast<double>(i % sub) / static_cast<double>(sub);
    const HeliReference ref{interpolate(reference, psi, k, frac),
                            interpolate(reference, theta, k, frac)};
    const ControlInput u = controller(s, ref, params, gains);
    const HeliState rate = dynamics(s, u, params);
    out.actual.y.row(i) << s.psi, s.theta, s.phi;
    out.actual.ydot.row(i) << s.psi_dot, s.theta_dot, s.phi_dot;
    out.actual.yddot.row(i) << rate.psi_dot, rate.theta_dot, rate.phi_dot;
    out.controls.row(i) << u.t_col, u.t_cyc;
    sq_psi += std::pow(s.psi - ref.psi.pos, 2);
    sq_theta += std::pow(s.theta - ref.theta.pos, 2);
    if (i + 1 < n) {
      s = rk4_step(s, u, params, dt);
      check_finite_bounded(s, static_cast<double>(i + 1) * dt);
    }
  }
  out.rms_psi = std::sqrt(sq_psi / static_cast<double>(n));
  out.rms_theta = std::sqrt(sq_theta / static_cast<double>(n));
  return out;
}

}  // namespace dmpflight
