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

#ifndef DMPFLIGHT_TESTS_TEST_UTIL_HPP_
#define DMPFLIGHT_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dmpflight/dmp.hpp"
#include "dmpflight/trajectory.hpp"

namespace dmpflight::testing {

// Smooth random weight profile: low-frequency sinusoid plus offset, bounded
// by `amplitude` in absolute value.
inline Eigen::RowVectorXd smooth_weights(std::mt19937& rng, Index count, double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double offset = 0.5 * amplitude * unit(rng);
  const double swing = 0.5 * amplitude * unit(rng);
  const double freq = 0.05 + 0.1 * std::abs(unit(rng));
  const double shift = 3.0 * unit(rng);
  Eigen::RowVectorXd w(count);
  for (Index i = 0; i < count; ++i) {
    w(i) = offset + swing * std::sin(freq * static_cast<double>(i) + shift);
  }
  return w;
}

// Minimum-jerk profile from a to b over [0, duration], sampled at dt.
inline Trajectory minimum_jerk(double a, double b, double duration, double dt) {
  const Index n = static_cast<Index>(std::floor(duration / dt + 1e-9)) + 1;
  Trajectory traj = make_trajectory(n, 1, dt, {"y"});
  for (Index k = 0; k < n; ++k) {
    const double s = traj.time(k) / duration;
    const double s3 = s * s * s;
    traj.y(k, 0) = a + (b - a) * (10 * s3 - 15 * s3 * s + 6 * s3 * s * s);
    traj.ydot(k, 0) = (b - a) * (30 * s * s - 60 * s3 + 30 * s3 * s) / duration;
    traj.yddot(k, 0) = (b - a) * (60 * s - 180 * s * s + 120 * s3) / (duration * duration);
  }
  return traj;
}

// One period of sin(t) or cos(t), sampled densely enough for learning.
inline Trajectory unit_wave(bool cosine) {
  const Index n = 6284;
  const double dt = 2.0 * kPi / static_cast<double>(n - 1);
  Trajectory traj = make_trajectory(n, 1, dt, {"y"});
  for (Index k = 0; k < n; ++k) {
    const double t = traj.time(k);
    traj.y(k, 0) = cosine ? std::cos(t) : std::sin(t);
    traj.ydot(k, 0) = cosine ? -std::sin(t) : std::cos(t);
    traj.yddot(k, 0) = -traj.y(k, 0);
  }
  return traj;
}

}  // namespace dmpflight::testing

#endif  // DMPFLIGHT_TESTS_TEST_UTIL_HPP_
