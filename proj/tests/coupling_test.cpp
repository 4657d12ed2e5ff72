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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dmpflight/error.hpp"
#include "dmpflight/learning.hpp"
#include "test_util.hpp"

namespace dmpflight {
namespace {

PrimitiveParams discrete(double goal, std::mt19937& rng) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 1, 30);
  p.goal << goal;
  p.weights.row(0) = testing::smooth_weights(rng, 30, 10.0);
  return p;
}

const PrimitiveParams& sine() {
  static const PrimitiveParams p = learn(testing::unit_wave(false), 50, SystemKind::kRhythmic);
  return p;
}

const PrimitiveParams& cosine() {
  static const PrimitiveParams p = learn(testing::unit_wave(true), 50, SystemKind::kRhythmic);
  return p;
}

TEST(CouplingSpec, Validation) {
  EXPECT_THROW(validate(CouplingSpec{CouplingMode::kTwoWay, 0.0, 0.5}), Error);
  EXPECT_THROW(validate(CouplingSpec{CouplingMode::kOneWay, 0.0, 1.5}), Error);
  EXPECT_NO_THROW(validate(CouplingSpec{CouplingMode::kOneWay, -1.0, 0.5}));
  EXPECT_EQ(coupling_mode_from_string(to_string(CouplingMode::kTwoWay)), CouplingMode::kTwoWay);
}

TEST(OneWay, IdenticalPrimitivesHaveZeroGap) {
  std::mt19937 rng(1);
  const PrimitiveParams p = discrete(1.0, rng);
  const CoupledRollout r = one_way_rollout(p, p, {CouplingMode::kOneWay, 2.0, 0.3}, 1e-3, 2.0);
  EXPECT_EQ(r.gap.maxCoeff(), 0.0);
}

TEST(OneWay, ImmediateActivationClosesGap) {
  std::mt19937 rng(2);
  const PrimitiveParams leader = discrete(1.0, rng);
  PrimitiveParams follower = discrete(2.5, rng);
  follower.start << 0.7;
  const CoupledRollout r =
      one_way_rollout(leader, follower, {CouplingMode::kOneWay, 0.0, 0.0}, 1e-3, 10.0);
  EXPECT_EQ(r.activation_index, 0);
  EXPECT_LT(r.gap(r.gap.size() - 1) / r.gap.maxCoeff(), 1e-2);
}

TEST(OneWay, FullPhaseActivationIsUncoupled) {
  std::mt19937 rng(3);
  const PrimitiveParams leader = discrete(1.0, rng);
  const PrimitiveParams follower = discrete(-2.0, rng);
  const CoupledRollout r =
      one_way_rollout(leader, follower, {CouplingMode::kOneWay, 3.0, 1.0}, 1e-3, 2.0);
  const Trajectory alone = rollout(follower, 1e-3, 2.0);
  EXPECT_EQ(r.activation_index, -1);
  EXPECT_EQ(r.follower.y, alone.y);
  EXPECT_EQ(r.follower.ydot, alone.ydot);
}

TEST(OneWay, ContinuousAcrossActivation) {
  std::mt19937 rng(4);
  const PrimitiveParams leader = discrete(1.0, rng);
  PrimitiveParams follower = discrete(3.0, rng);
  follower.tau = 1.5;
  const CoupledRollout r =
      one_way_rollout(leader, follower, {CouplingMode::kOneWay, 0.5, 0.4}, 1e-3, 3.0);
  const Index k = r.activation_index;
  ASSERT_EQ(k, 600);
  const JunctionJump j = junction_jump(r.follower, k);
  // Only the O(dt^2) Taylor remainder of the last uncoupled step remains.
  const double dt2 = 1e-6;
  EXPECT_LT(j.position, 0.6 * dt2 * std::abs(r.follower.yddot(k - 1, 0)) + 1e-9);
  EXPECT_LT(j.velocity, 1e-3);
}

TEST(OneWay, GapDecaysExponentiallyAndCertifies) {
  std::mt19937 rng(5);
  const PrimitiveParams leader = discrete(1.0, rng);
  const PrimitiveParams follower = discrete(2.0, rng);
  for (double gain : {0.0, 1.0}) {
    const CouplingSpec spec{CouplingMode::kOneWay, gain, 0.5};
    const CoupledRollout r = one_way_rollout(leader, follower, spec, 1e-3, 4.0);
    const ContractionReport<double> cert = one_way_certificate(leader, spec, r);
    EXPECT_TRUE(cert.contracting) << gain;
    const double slope = log_gap_slope(r.gap, 1e-3, r.activation_index, r.gap.size());
    EXPECT_LE(slope, -0.5 / leader.tau) << gain;
    EXPECT_LE(slope, -cert.rate * 0.95) << gain;
  }
}

TEST(OneWay, NegativeGainBreaksCertificate) {
  std::mt19937 rng(6);
  const PrimitiveParams leader = discrete(1.0, rng);
  const PrimitiveParams follower = discrete(2.0, rng);
  const CouplingSpec spec{CouplingMode::kOneWay, -0.2, 0.5};
  const CoupledRollout r = one_way_rollout(leader, follower, spec, 1e-3, 2.0);
  EXPECT_FALSE(one_way_certificate(leader, spec, r).contracting);
}

TEST(TwoWay, IdenticalSystemsStayIdentical) {
  std::mt19937 rng(7);
  const PrimitiveParams p = discrete(1.0, rng);
  const CoupledRollout r = two_way_rollout(p, p, {CouplingMode::kTwoWay, 5.0, 0.0}, 1e-3, 2.0);
  EXPECT_EQ(r.leader.y, r.follower.y);
}

TEST(TwoWay, NegligibleGainMatchesIndependentRollouts) {
  const CoupledRollout r =
      two_way_rollout(sine(), cosine(), {CouplingMode::kTwoWay, 1e-300, 0.0}, 1e-3, 3.0);
  EXPECT_EQ(r.leader.y, rollout(sine(), 1e-3, 3.0).y);
  EXPECT_EQ(r.follower.y, rollout(cosine(), 1e-3, 3.0).y);
}

double tail_sync_error(const CoupledRollout& r, Index tail) {
  const Eigen::VectorXd y = r.leader.y.col(0).tail(tail);
  const double amplitude = 0.5 * (y.maxCoeff() - y.minCoeff());
  return r.gap.tail(tail).maxCoeff() / amplitude;
}

TEST(TwoWay, SineCosineSynchronize) {
  const CouplingSpec spec{CouplingMode::kTwoWay, 5.0, 0.0};
  const CoupledRollout r = two_way_rollout(sine(), cosine(), spec, 1e-3, 20.0);
  EXPECT_LT(tail_sync_error(r, 6284), 0.01);
  EXPECT_TRUE(two_way_certificate(sine(), spec, r).contracting);
  // The difference overshoots zero before settling.
  const Eigen::VectorXd diff = (r.leader.y - r.follower.y).col(0).head(1000);
  int sign_changes = 0;
  for (Index k = 1; k < diff.size(); ++k) sign_changes += (diff(k) > 0) != (diff(k - 1) > 0);
  EXPECT_GE(sign_changes, 1);
}

TEST(TwoWay, LargerGainConvergesFaster) {
  double previous = 1e9;
  for (double gain : {0.5, 1.0, 2.0, 5.0}) {
    const CoupledRollout r =
        two_way_rollout(sine(), cosine(), {CouplingMode::kTwoWay, gain, 0.0}, 1e-3, 10.0);
    const double err = tail_sync_error(r, 3000);
    EXPECT_LT(err, previous) << gain;
    previous = err;
  }
}

TEST(TwoWay, HalvingGainLocatesCertificateThreshold) {
  double gain = 5.0;
  CouplingSpec spec{CouplingMode::kTwoWay, gain, 0.0};
  CoupledRollout r;
  for (;;) {
    spec.gain = gain;
    r = two_way_rollout(sine(), cosine(), spec, 1e-3, 20.0);
    if (!two_way_certificate(sine(), spec, r).contracting) break;
    gain /= 2.0;
  }
  // Identity-metric threshold: 2 K alpha_z beta_z > lambda_max of the symmetric part.
  const double a = sine().alpha_z, b = sine().beta_z;
  const double lambda = -a / 2.0 + std::sqrt(a * a / 4.0 + std::pow((1.0 - a * b) / 2.0, 2));
  const double threshold = lambda / (2.0 * a * b);
  EXPECT_LT(gain, threshold);
  EXPECT_GT(2.0 * gain, threshold);
  EXPECT_GT(tail_sync_error(r, 6284), 0.01);
}

TEST(Blend, Examples) {
  std::mt19937 rng(8);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(2, 10);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(2, 10);
  EXPECT_EQ(blend_weights(a, b, 1.0, 0.0), a);
  EXPECT_EQ(blend_weights(a, b, 0.0, 0.0), Eigen::MatrixXd::Zero(2, 10));
  try {
    blend_weights(a, Eigen::MatrixXd::Zero(2, 9), 0.5, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBasisMismatch);
  }
}

TEST(Blend, RhythmicSuperposition) {
  const PrimitiveParams mixed = blend(sine(), cosine(), 0.5, 0.5);
  const Trajectory m = rollout(mixed, 1e-3, 2.0 * kPi);
  const Trajectory s = rollout(sine(), 1e-3, 2.0 * kPi);
  const Trajectory c = rollout(cosine(), 1e-3, 2.0 * kPi);
  EXPECT_LT((m.y - 0.5 * (s.y + c.y)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Blend, ZeroWeightsGiveUnforcedRollout) {
  PrimitiveParams p = sine();
  p.weights = blend_weights(sine().weights, cosine().weights, 0.0, 0.0);
  PrimitiveParams unforced = p;
  unforced.weights.setZero();
  EXPECT_EQ(rollout(p, 1e-3, 1.0).y, rollout(unforced, 1e-3, 1.0).y);
}

TEST(Blend, DiscreteDistinctGoalsBreakSuperposition) {
  std::mt19937 rng(9);
  const PrimitiveParams a = discrete(1.0, rng);
  const PrimitiveParams b = discrete(3.0, rng);
  PrimitiveParams mixed = a;
  mixed.weights = blend_weights(a.weights, b.weights, 0.5, 0.5);
  const Trajectory m = rollout(mixed, 1e-3, 1.0);
  const Eigen::MatrixXd avg = 0.5 * (rollout(a, 1e-3, 1.0).y + rollout(b, 1e-3, 1.0).y);
  EXPECT_GT((m.y - avg).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Blend, MismatchedBasisRejected) {
  PrimitiveParams a = make_params(SystemKind::kDiscrete, 1, 10);
  PrimitiveParams b = make_params(SystemKind::kDiscrete, 1, 12);
  a.goal << 1.0;
  b.goal << 1.0;
  EXPECT_THROW(blend(a, b, 0.5, 0.5), Error);
}

class ConcatenateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    first = learn(testing::minimum_jerk(0.0, 1.0, 1.0, 1e-3), 50, SystemKind::kDiscrete);
    second = learn(testing::minimum_jerk(1.0, 2.0, 1.0, 1e-3), 50, SystemKind::kDiscrete);
  }
  PrimitiveParams first;
  PrimitiveParams second;
};

TEST_F(ConcatenateTest, MatchedStartHasNoJunctionTransient) {
  PrimitiveParams unforced = first;
  unforced.weights.setZero();
  // A second primitive equal to the first's dynamics continues it seamlessly.
  const Concatenation c =
      concatenate(unforced, unforced, {CouplingMode::kOneWay, 0.0, 0.85}, 1e-3);
  const Index k = c.junction_index;
  EXPECT_LT(c.jump.position, 1e-6);
  EXPECT_LT(c.jump.velocity, 1e-4);
  EXPECT_LT(std::abs(c.merged.y(k, 0) - c.merged.y(k - 1, 0) - 1e-3 * c.merged.ydot(k - 1, 0)),
            1e-6);
}

TEST_F(ConcatenateTest, RetargetedMergeIsContinuous) {
  first.goal << 0.8;
  const Concatenation c = concatenate(first, second, {CouplingMode::kOneWay, 0.0, 0.85}, 1e-3);
  EXPECT_TRUE(c.coupled);
  EXPECT_EQ(c.junction_index, 850);
  EXPECT_LT(c.jump.position, 1e-3);
  EXPECT_LT(c.jump.velocity, 1e-2);
  EXPECT_NEAR(c.merged.y(c.merged.samples() - 1, 0), second.goal(0), 1e-2);
  EXPECT_EQ(c.merged.samples(), 850 + sample_count(1.25, 1e-3));
}

TEST_F(ConcatenateTest, EarlierActivationHasSmallerPeakAcceleration) {
  first.goal << 0.8;
  auto peak = [&](double s_on) {
    const Concatenation c = concatenate(first, second, {CouplingMode::kOneWay, 0.0, s_on}, 1e-3);
    const Index k = c.junction_index;
    return c.merged.yddot.bottomRows(c.merged.samples() - k).cwiseAbs().maxCoeff();
  };
  EXPECT_LT(peak(0.8), peak(0.9));
}

TEST_F(ConcatenateTest, DisabledCouplingSwitchesAbruptly) {
  first.goal << 0.8;
  const Concatenation c = concatenate(first, second, {CouplingMode::kOneWay, 0.0, 1.0}, 1e-3);
  EXPECT_FALSE(c.coupled);
  EXPECT_EQ(c.junction_index, 1000);
  EXPECT_GT(c.jump.velocity, 1e-2);
}

TEST(Hierarchy, DiscretePrimitiveCertifies) {
  const PrimitiveParams p =
      learn(testing::minimum_jerk(0.0, 1.0, 1.0, 1e-3), 50, SystemKind::kDiscrete);
  const HierarchyReport<double> h = check_primitive_hierarchy(p, 1e-3, 1.5);
  EXPECT_TRUE(h.top.contracting);
  EXPECT_TRUE(h.bottom.contracting);
  EXPECT_TRUE(std::isfinite(h.interconnection_bound));
  EXPECT_GT(h.interconnection_bound, 0.0);
}

TEST(Hierarchy, UnforcedPrimitiveHasNoInterconnection) {
  PrimitiveParams p = make_params(SystemKind::kDiscrete, 2, 20);
  p.goal << 1.0, -2.0;
  const HierarchyReport<double> h = check_primitive_hierarchy(p, 1e-3, 1.0);
  EXPECT_EQ(h.interconnection_bound, 0.0);
  EXPECT_TRUE(h.bottom.contracting);
}

TEST(Hierarchy, FilteredPrimitiveCertifies) {
  const PrimitiveParams p =
      learn(testing::minimum_jerk(0.2, 1.0, 1.0, 1e-3), 30, SystemKind::kFiltered);
  const HierarchyReport<double> h = check_primitive_hierarchy(p, 1e-3, 1.0);
  EXPECT_TRUE(h.top.contracting);
  EXPECT_TRUE(h.bottom.contracting);
}

TEST(LogGapSlope, RecoversExponentialRate) {
  Eigen::VectorXd gap(1000);
  for (Index k = 0; k < 1000; ++k) gap(k) = 3.0 * std::exp(-2.5 * 1e-3 * static_cast<double>(k));
  EXPECT_NEAR(log_gap_slope(gap, 1e-3, 0, 1000), -2.5, 1e-9);
}

}  // namespace
}  // namespace dmpflight
