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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dmpflight/error.hpp"
#include "test_util.hpp"

namespace dmpflight {
namespace {

HeliParams conservative() {
  HeliParams p;
  p.s0 = 0.0;
  p.s0_roll = 0.0;
  return p;
}

TEST(Dynamics, EquilibriumAtOffsetPitch) {
  const HeliParams p;
  HeliState s;
  s.theta = -p.theta_0;
  const HeliState d = dynamics(s, {}, p);
  EXPECT_EQ(d.psi_dot, 0.0);
  EXPECT_NEAR(d.theta_dot, 0.0, 1e-15);
  EXPECT_EQ(d.phi_dot, 0.0);
}

TEST(Dynamics, HoverThrustHoldsLevelPitch) {
  const HeliParams p;
  const double thrust = p.mass * p.g_grav * p.l_theta * std::sin(p.theta_0) / p.beam_length;
  EXPECT_DOUBLE_EQ(hover_thrust(0.0, p), thrust);
  EXPECT_NEAR(dynamics(HeliState{}, {thrust, 0.0}, p).theta_dot, 0.0, 1e-14);
}

TEST(Dynamics, DragByHand) {
  HeliParams p;
  p.s0 = 0.01;
  p.rho = 1.225;
  p.beam_length = 0.66;
  HeliState s;
  s.psi_dot = 1.0;
  EXPECT_DOUBLE_EQ(drag(s, p), 0.5 * 1.225 * 0.66 * 0.66 * 0.01 * 0.66);
  s.psi_dot = -1.0;
  EXPECT_DOUBLE_EQ(drag(s, p), -0.5 * 1.225 * 0.66 * 0.66 * 0.01 * 0.66);
}

TEST(Dynamics, AffineInControls) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const HeliParams p;
  for (int trial = 0; trial < 100; ++trial) {
    const HeliState s{3 * u(rng), u(rng), 1.2 * u(rng), 2 * u(rng), u(rng), u(rng)};
    const Eigen::Matrix<double, 6, 1> base = dynamics(s, {}, p).vector();
    Eigen::Matrix<double, 6, 2> reference_gain;
    for (int probe = 0; probe < 3; ++probe) {
      const ControlInput c{5 * u(rng), 5 * u(rng)};
      Eigen::Matrix<double, 6, 2> gain;
      gain.col(0) = (dynamics(s, {c.t_col + 1.0, c.t_cyc}, p).vector() -
                     dynamics(s, c, p).vector());
      gain.col(1) = (dynamics(s, {c.t_col, c.t_cyc + 1.0}, p).vector() -
                     dynamics(s, c, p).vector());
      if (probe == 0) reference_gain = gain;
      EXPECT_LT((gain - reference_gain).cwiseAbs().maxCoeff(), 1e-9);
      const Eigen::Matrix<double, 6, 1> predicted =
          base + gain * Eigen::Vector2d(c.t_col, c.t_cyc);
      EXPECT_LT((dynamics(s, c, p).vector() - predicted).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Dynamics, EnergyConservedWithoutDragOrThrust) {
  const HeliParams p = conservative();
  for (double theta0 : {-0.5, 0.2, 1.0}) {
    for (double phi0 : {-0.4, 0.0, 0.3}) {
      HeliState s{0.0, theta0, phi0, 0.7, -0.3, 0.5};
      const double e0 = mechanical_energy(s, p);
      double worst = 0.0;
      for (int k = 0; k < 10000; ++k) {
        s = rk4_step(s, {}, p, 1e-3);
        worst = std::max(worst, std::abs(mechanical_energy(s, p) - e0) / e0);
      }
      EXPECT_LT(worst, 1e-6) << theta0 << " " << phi0;
    }
  }
}

TEST(Dynamics, DragDissipatesTravelEnergy) {
  const HeliParams p;
  for (double rate : {-3.0, -1.0, -0.1, 0.1, 0.5, 2.0, 5.0}) {
    for (double phi : {-1.2, -0.5, 0.0, 0.5, 1.2}) {
      HeliState s{0.0, 0.0, phi, rate, 0.0, 0.0};
      double ke = 0.5 * p.j_zz * rate * rate;
      for (int k = 0; k < 200; ++k) {
        s = rk4_step(s, {}, p, 1e-3);
        const double next = 0.5 * p.j_zz * s.psi_dot * s.psi_dot;
        ASSERT_LE(next, ke + 1e-15) << rate << " " << phi;
        ke = next;
      }
    }
  }
}

TEST(Controller, HoverHoldsWithoutCyclic) {
  const HeliParams p;
  const ControlInput u = controller(HeliState{}, HeliReference{}, p, ControllerGains{});
  EXPECT_NEAR(u.t_col, hover_thrust(0.0, p), 1e-12);
  EXPECT_NEAR(u.t_cyc, 0.0, 1e-15);
}

TEST(Controller, RollGuard) {
  HeliState s;
  s.phi = kPi / 2 - 0.1;
  try {
    controller(s, HeliReference{}, HeliParams{}, ControllerGains{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRollGuard);
  }
}

TEST(Controller, SaturationHonored) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const HeliParams p;
  for (int trial = 0; trial < 500; ++trial) {
    const HeliState s{5 * u(rng), 2 * u(rng), 1.3 * u(rng), 10 * u(rng), 10 * u(rng), 10 * u(rng)};
    HeliReference ref;
    ref.psi = {20 * u(rng), 10 * u(rng), 50 * u(rng)};
    ref.theta = {3 * u(rng), 10 * u(rng), 50 * u(rng)};
    const ControlInput c = controller(s, ref, p, ControllerGains{});
    EXPECT_LE(std::abs(c.t_col), p.t_max);
    EXPECT_LE(std::abs(c.t_cyc), p.t_max);
  }
}

Trajectory reference_from(const Trajectory& psi, const Trajectory& theta) {
  Trajectory r = make_trajectory(psi.samples(), 2, psi.dt, {"psi", "theta"});
  r.y << psi.y, theta.y;
  r.ydot << psi.ydot, theta.ydot;
  r.yddot << psi.yddot, theta.yddot;
  return r;
}

TEST(SimulateTracking, HoverReferenceHasNoError) {
  Trajectory r = make_trajectory(3001, 2, 1e-3, {"psi", "theta"});
  const TrackingResult res = simulate_tracking(r, HeliParams{}, ControllerGains{}, 1e-3);
  EXPECT_LT(res.rms_psi, 1e-6);
  EXPECT_LT(res.rms_theta, 1e-6);
}

TEST(SimulateTracking, PitchStepFromRest) {
  Trajectory r = make_trajectory(5001, 2, 1e-3, {"psi", "theta"});
  r.y.col(1).setConstant(0.1);
  r.y(0, 1) = 0.0;
  const ControllerGains g;
  const TrackingResult res = simulate_tracking(r, HeliParams{}, g, 1e-3);
  const Eigen::VectorXd theta = res.actual.y.col(1);
  Index settled = theta.size();
  for (Index k = theta.size() - 1; k >= 0 && std::abs(theta(k) - 0.1) <= 0.002; --k) settled = k;
  // Critically damped at sqrt(k_p) rad/s: 2% settling in about 5.8 / sqrt(k_p) s.
  EXPECT_LT(static_cast<double>(settled) * 1e-3, 2.5);
  EXPECT_LT(std::abs(theta(theta.size() - 1) - 0.1), 1e-6);
}

TEST(SimulateTracking, TravelManeuverTracked) {
  const Trajectory psi = testing::minimum_jerk(0.0, deg2rad(220.0), 8.0, 1e-3);
  const Trajectory theta = testing::minimum_jerk(0.0, deg2rad(60.0), 8.0, 1e-3);
  const TrackingResult res =
      simulate_tracking(reference_from(psi, theta), HeliParams{}, ControllerGains{}, 1e-3);
  EXPECT_LT(rad2deg(res.rms_psi), 2.0);
  EXPECT_LT(rad2deg(res.rms_theta), 2.0);
  EXPECT_GT(res.actual.y.col(2).cwiseAbs().maxCoeff(), 0.01);
}

TEST(SimulateTracking, SubsampledStep) {
  const Trajectory psi = testing::minimum_jerk(0.0, 1.0, 4.0, 2e-3);
  const Trajectory theta = testing::minimum_jerk(0.0, 0.5, 4.0, 2e-3);
  const TrackingResult res =
      simulate_tracking(reference_from(psi, theta), HeliParams{}, ControllerGains{}, 1e-3);
  EXPECT_EQ(res.actual.samples(), 2 * (psi.samples() - 1) + 1);
  EXPECT_THROW(simulate_tracking(reference_from(psi, theta), HeliParams{}, ControllerGains{},
                                 3e-3),
               Error);
}

TEST(SimulateTracking, DivergenceDetected) {
  const Trajectory psi = testing::minimum_jerk(0.0, 1.0, 2.0, 1e-3);
  Trajectory theta = testing::minimum_jerk(0.0, 0.5, 2.0, 1e-3);
  theta.y.bottomRows(theta.samples() - 1).array() += 0.5;
  HeliParams p;
  p.t_max = 1e9;
  ControllerGains g;
  g.k_p = -50.0;
  try {
    simulate_tracking(reference_from(psi, theta), p, g, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kDivergence || e.code() == ErrorCode::kRollGuard);
  }
}

TEST(HeliParams, Validation) {
  HeliParams p;
  p.j_xx = 0.0;
  EXPECT_THROW(validate(p), Error);
  p = HeliParams{};
  p.s0 = -1.0;
  EXPECT_THROW(validate(p), Error);
}

}  // namespace
}  // namespace dmpflight
