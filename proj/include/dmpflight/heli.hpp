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

#ifndef DMPFLIGHT_HELI_HPP_
#define DMPFLIGHT_HELI_HPP_

#include <Eigen/Dense>

#include "dmpflight/trajectory.hpp"

namespace dmpflight {

/// Bench helicopter with travel (psi), pitch (theta) and roll (phi) axes.
/// SI units throughout.
struct HeliParams {
  double j_xx = 0.0364;
  double j_yy = 0.91;
  double j_zz = 0.91;
  double mass = 3.57;        // M, whole assembly.
  double rotor_mass = 1.15;  // m, rotor assembly.
  double beam_length = 0.66;     // L
  double rotor_arm = 0.177;      // l_h
  double l_theta = 0.15;
  double l_phi = 0.002;
  double theta_0 = 0.3;
  double s0 = 0.01;
  double s0_roll = 0.005;  // S0'
  double rho = 1.225;
  double g_grav = 9.81;
  double t_max = 20.0;
};

void validate(const HeliParams& params);

struct HeliState {
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double psi_dot = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;

  Eigen::Matrix<double, 6, 1> vector() const;
  static HeliState from_vector(const Eigen::Matrix<double, 6, 1>& v);
};

struct ControlInput {
  double t_col = 0.0;  // T_L + T_R
  double t_cyc = 0.0;  // T_L - T_R
};

/// Travel-axis aerodynamic drag torque, odd in psi_dot.
double drag(const HeliState& state, const HeliParams& params);

/// Time derivative in the same layout as HeliState (rates in the angle slots).
HeliState dynamics(const HeliState& state, const ControlInput& u, const HeliParams& params);

/// Conservative part of the energy: kinetic plus gravity potentials.
double mechanical_energy(const HeliState& state, const HeliParams& params);

struct ControllerGains {
  double k_p = 16.0;   // pitch and travel loops
  double k_d = 8.0;
  double k_p_roll = 400.0;
  double k_d_roll = 40.0;
  double roll_limit = 0.6;   // rad, bound on the commanded roll
  double roll_guard = 0.1;   // rad, margin below pi/2 that triggers an error
};

struct AxisReference {
  double pos = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

struct HeliReference {
  AxisReference psi;
  AxisReference theta;
};

ControlInput saturate(const ControlInput& u, const HeliParams& params);

/// Thrust that holds pitch theta at level roll with zero rates.
double hover_thrust(double theta, const HeliParams& params);

ControlInput controller(const HeliState& state, const HeliReference& ref,
                        const HeliParams& params, const ControllerGains& gains);

HeliState rk4_step(const HeliState& state, const ControlInput& u, const HeliParams& params,
                   double dt);

struct TrackingResult {
  Trajectory actual;            // DOFs psi, theta, phi.
  Eigen::MatrixXd controls;     // Columns T_col, T_cyc; one row per sample.
  double rms_psi = 0.0;
  double rms_theta = 0.0;
};

/// Closed-loop simulation against a reference with DOFs named "psi" and
/// "theta". `dt` must divide the reference step; the reference is linearly
/// interpolated between its samples and the control is held over each step.
/// The helicopter starts on the reference at level roll.
TrackingResult simulate_tracking(const Trajectory& reference, const HeliParams& params,
                                 const ControllerGains& gains, double dt);

}  // namespace dmpflight

#endif  // DMPFLIGHT_HELI_HPP_
