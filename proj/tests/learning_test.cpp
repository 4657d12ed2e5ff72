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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dmpflight/error.hpp"
#include "test_util.hpp"

namespace dmpflight {
namespace {

Demonstration positions_only(const Eigen::VectorXd& y, double dt) {
  Demonstration d;
  d.dt = dt;
  d.dof_names = {"y"};
  d.y = y;
  return d;
}

TEST(Differentiate, ConstantHasZeroDerivatives) {
  const Demonstration d = differentiate(positions_only(Eigen::VectorXd::Constant(20, 3.0), 0.1));
  EXPECT_EQ(d.ydot.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(d.yddot.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Differentiate, LinearRampHasUnitSlope) {
  Eigen::VectorXd y(20);
  for (Index k = 0; k < 20; ++k) y(k) = 0.1 * static_cast<double>(k);
  const Demonstration d = differentiate(positions_only(y, 0.1));
  for (Index k = 0; k < 20; ++k) EXPECT_NEAR(d.ydot(k, 0), 1.0, 1e-12);
}

TEST(Differentiate, QuadraticHasSecondDerivativeTwo) {
  Eigen::VectorXd y(20);
  for (Index k = 0; k < 20; ++k) y(k) = std::pow(0.1 * static_cast<double>(k), 2);
  const Demonstration d = differentiate(positions_only(y, 0.1));
  for (Index k = 0; k < 20; ++k) {
    EXPECT_NEAR(d.yddot(k, 0), 2.0, 1e-9);
    EXPECT_NEAR(d.ydot(k, 0), 0.2 * static_cast<double>(k), 1e-12);
  }
}

TEST(Differentiate, IdempotentWhenDerivativesPresent) {
  const Trajectory mj = testing::minimum_jerk(0.0, 1.0, 1.0, 1e-2);
  const Demonstration once = differentiate(mj);
  EXPECT_EQ(once.ydot, mj.ydot);
  EXPECT_EQ(differentiate(once).yddot, once.yddot);
}

TEST(Differentiate, TooFewSamples) {
  try {
    differentiate(positions_only(Eigen::VectorXd::Zero(3), 0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSamples);
  }
}

PrimitiveParams random_primitive(std::mt19937& rng, Index basis = 50) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, basis);
  p.goal << 1.0;
  p.weights.row(0) = testing::smooth_weights(rng, basis, 10.0);
  return p;
}

TEST(ComputeFTarget, UnforcedDemoInvertsToZero) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 20);
  p.goal << 1.0;
  const Trajectory demo = rollout(p, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1e-3, 1.0);
  EXPECT_LT(compute_f_target(demo, p).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(ComputeFTarget, ConstantDemoAtGoal) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 20);
  p.goal << 2.0;
  Trajectory demo = make_trajectory(100, 1, 1e-2, {"y"});
  demo.y.setConstant(2.0);
  EXPECT_EQ(compute_f_target(demo, p).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ComputeFTarget, RoundTripMatchesRolloutForcing) {
  std::mt19937 rng(31);
  const PrimitiveParams p = random_primitive(rng);
  const Trajectory demo = rollout(p, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1e-3, 1.0);
  const Eigen::MatrixXd f = compute_f_target(demo, p);
  const auto trace = phase_trace(p, 1e-3, demo.samples());
  double sq = 0.0;
  for (Index k = 0; k < demo.samples(); ++k) {
    sq += std::pow(f(k, 0) - forcing_term(p, trace[static_cast<size_t>(k)], 0), 2);
  }
  EXPECT_LT(std::sqrt(sq / static_cast<double>(demo.samples())), 1e-4);
}

TEST(ComputeFTarget, LengthMismatch) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 2, 10);
  const Trajectory demo = testing::minimum_jerk(0.0, 1.0, 1.0, 1e-2);
  EXPECT_THROW(compute_f_target(demo, p), Error);
}

TEST(FitWeights, ZeroTargetGivesZeroWeights) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 20);
  p.goal << 1.0;
  const auto trace = phase_trace(p, 1e-3, 1001);
  EXPECT_EQ(fit_weights(Eigen::MatrixXd::Zero(1001, 1), trace, p).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FitWeights, RecoversKnownWeights) {
  std::mt19937 rng(41);
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 50);
  p.goal << 1.0;
  Eigen::RowVectorXd truth(50);
  for (Index i = 0; i < 50; ++i) truth(i) = 6.0 + 3.0 * std::sin(0.03 * static_cast<double>(i));
  p.weights.row(0) = truth;
  const auto trace = phase_trace(p, 1e-3, 1001);
  Eigen::MatrixXd f(1001, 1);
  for (Index k = 0; k < 1001; ++k) f(k, 0) = forcing_term(p, trace[static_cast<size_t>(k)], 0);
  const Eigen::MatrixXd w = fit_weights(f, trace, p);
  for (Index i = 0; i < 50; ++i) {
    double peak = 0.0;
    for (const Phase& ph : trace) peak = std::max(peak, basis_activation(p, ph)(i));
    if (peak > 0.5) EXPECT_NEAR(w(0, i), truth(i), 0.05 * std::abs(truth(i))) << i;
  }
}

TEST(FitWeights, SingleBasisClosedForm) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 2);
  p.goal << 1.0;
  const auto trace = phase_trace(p, 1e-3, 1001);
  Eigen::MatrixXd f(1001, 1);
  for (Index k = 0; k < 1001; ++k) f(k, 0) = 2.0 * std::get<DiscretePhase>(trace[k]).v;
  const Eigen::MatrixXd w = fit_weights(f, trace, p);
  EXPECT_NEAR(w(0, 0), 2.0, 1e-7);
  EXPECT_NEAR(w(0, 1), 2.0, 1e-7);
}

TEST(FitWeights, EachWeightMinimizesItsWeightedResidual) {
  std::mt19937 rng(43);
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 30);
  p.goal << 1.3;
  const auto trace = phase_trace(p, 1e-3, 1001);
  Eigen::MatrixXd f(1001, 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Index k = 0; k < 1001; ++k) f(k, 0) = std::sin(0.01 * k) * 4.0 + 0.1 * noise(rng);
  const Eigen::MatrixXd w = fit_weights(f, trace, p);
  for (Index i = 0; i < 30; ++i) {
    auto residual = [&](double wi) {
      double r = 0.0, spread = 0.0;
      for (Index k = 0; k < 1001; ++k) {
        const double v = p.goal(0) * std::get<DiscretePhase>(trace[k]).v;
        const double psi = basis_activation(p, trace[k])(i);
        r += psi * std::pow(f(k, 0) - wi * v, 2);
        spread += psi * v * v;
      }
      return r + 1e-8 * spread * wi * wi;
    };
    const double best = residual(w(0, i));
    EXPECT_LE(best, residual(w(0, i) + 1e-3));
    EXPECT_LE(best, residual(w(0, i) - 1e-3));
  }
}

TEST(Learn, MinimumJerkReproduction) {
  const Trajectory demo = testing::minimum_jerk(0.0, 1.0, 1.0, 1e-3);
  const PrimitiveParams p = learn(demo, 50, SystemKind::kDiscrete);
  EXPECT_DOUBLE_EQ(p.tau, 1.0);
  EXPECT_DOUBLE_EQ(p.goal(0), 1.0);
  EXPECT_LT(relative_reproduction_error(p, demo), 0.02);
}

TEST(Learn, SineReproductionRhythmic) {
  const Index n = 6284;
  const double dt = 2.0 * kPi / static_cast<double>(n - 1);
  Trajectory demo = make_trajectory(n, 1, dt, {"y"});
  for (Index k = 0; k < n; ++k) {
    demo.y(k, 0) = std::sin(demo.time(k));
    demo.ydot(k, 0) = std::cos(demo.time(k));
    demo.yddot(k, 0) = -std::sin(demo.time(k));
  }
  const PrimitiveParams p = learn(demo, 50, SystemKind::kRhythmic);
  EXPECT_NEAR(p.tau, 1.0, 1e-12);
  EXPECT_LT(relative_reproduction_error(p, demo), 0.02);
}

TEST(Learn, StraightLineReproduction) {
  Eigen::VectorXd y(1001);
  for (Index k = 0; k < 1001; ++k) y(k) = 0.5 + 2.0 * 1e-3 * static_cast<double>(k);
  const Demonstration demo = positions_only(y, 1e-3);
  const PrimitiveParams p = learn(demo, 50, SystemKind::kDiscrete);
  EXPECT_LT(relative_reproduction_error(p, demo), 0.01);
}

TEST(Learn, FilteredKindReproduces) {
  const Trajectory demo = testing::minimum_jerk(0.2, 1.4, 1.0, 1e-3);
  const PrimitiveParams p = learn(demo, 50, SystemKind::kFiltered);
  EXPECT_LT(relative_reproduction_error(p, demo), 0.02);
}

TEST(Learn, RoundTripOverRandomFamily) {
  std::mt19937 rng(51);
  for (int trial = 0; trial < 8; ++trial) {
    PrimitiveParams truth = random_primitive(rng);
    truth.goal << 0.5 + trial * 0.3;
    const Trajectory demo =
        rollout(truth, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1e-3, 1.0);
    const PrimitiveParams p = learn(demo, 50, SystemKind::kDiscrete);
    EXPECT_LT(relative_reproduction_error(p, demo), 0.01) << trial;
  }
}

TEST(Learn, RetargetingAfterLearningScalesOutput) {
  const Trajectory demo = testing::minimum_jerk(0.0, 1.0, 1.0, 1e-3);
  PrimitiveParams p = learn(demo, 50, SystemKind::kDiscrete);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Trajectory base = rollout(p, zero, zero, 1e-3, 1.0);
  p.goal << 3.7;
  const Trajectory scaled = rollout(p, zero, zero, 1e-3, 1.0);
  EXPECT_LT((scaled.y - 3.7 * base.y).cwiseAbs().maxCoeff(), 1e-6 * 3.7);
}

TEST(Learn, GoalZeroDemoRejected) {
  const Trajectory demo = testing::minimum_jerk(1.0, 0.0, 1.0, 1e-2);
  try {
    learn(demo, 10, SystemKind::kDiscrete);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGoalZero);
  }
}

TEST(SegmentAtPeak, SymmetricBumpSplitsInMiddle) {
  Eigen::VectorXd y(101);
  for (Index k = 0; k <= 100; ++k) y(k) = std::sin(kPi * static_cast<double>(k) / 100.0);
  const SegmentationResult r = segment_at_peak(positions_only(y, 0.01), 0);
  EXPECT_EQ(r.split_index, 50);
  EXPECT_EQ(r.first.samples(), 51);
  EXPECT_EQ(r.second.samples(), 51);
}

TEST(SegmentAtPeak, MonotoneIsBoundaryPeak) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
  try {
    segment_at_peak(positions_only(y, 0.01), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundaryPeak);
  }
}

TEST(SegmentAtPeak, TiesBreakTowardEarliest) {
  Eigen::VectorXd y(30);
  for (Index k = 0; k < 30; ++k) y(k) = std::abs(std::sin(kPi * static_cast<double>(k) / 14.0));
  y(7) = 2.0;
  y(21) = 2.0;
  // Scan oracle.
  Index expected = 0;
  for (Index k = 0; k < 30; ++k) {
    if (y(k) > y(expected)) expected = k;
  }
  EXPECT_EQ(segment_at_peak(positions_only(y, 0.01), 0).split_index, expected);
  EXPECT_EQ(expected, 7);
}

TEST(SegmentAtPeak, ConcatenationReproducesDemo) {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd y(40, 2);
    for (Index k = 0; k < 40; ++k) {
      y(k, 0) = u(rng);
      y(k, 1) = std::sin(0.1 * k) + 0.1 * u(rng);
    }
    y(0, 1) = -5.0;
    y(39, 1) = -5.0;
    Demonstration d;
    d.dt = 0.1;
    d.dof_names = {"a", "b"};
    d.y = y;
    const SegmentationResult r = segment_at_peak(d, 1);
    Eigen::MatrixXd joined(40, 2);
    joined << r.first.y, r.second.y.bottomRows(r.second.samples() - 1);
    EXPECT_EQ(joined, y);
  }
}

}  // namespace
}  // namespace dmpflight
