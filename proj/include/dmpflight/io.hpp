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

#ifndef DMPFLIGHT_IO_HPP_
#define DMPFLIGHT_IO_HPP_

#include <string>

#include "dmpflight/dmp.hpp"
#include "dmpflight/trajectory.hpp"

namespace dmpflight {

enum class AngleUnit { kDegrees, kRadians };

AngleUnit angle_unit_from_string(const std::string& name);

/// CSV layout: header `t,<dof>,<dof>_dot,<dof>_ddot,...`, 12 significant
/// digits, LF line endings. Values are converted from radians to `unit`.
std::string format_trajectory_csv(const Trajectory& traj, AngleUnit unit);

/// Accepts the layout above or plain `t,<dof>,...` position columns.
/// Derivatives are kept only when every DOF has both rate columns and the
/// time column is uniform; non-uniform times are resampled to their median
/// spacing. Errors carry the 1-based line number.
Trajectory parse_trajectory_csv(const std::string& text, AngleUnit unit);

void save_trajectory_csv(const std::string& path, const Trajectory& traj, AngleUnit unit);
Trajectory load_trajectory_csv(const std::string& path, AngleUnit unit);

/// Primitive parameters as JSON with `format_version: 1`; angles in radians.
std::string format_params_json(const PrimitiveParams& params);
PrimitiveParams parse_params_json(const std::string& text);

void save_params(const std::string& path, const PrimitiveParams& params);
PrimitiveParams load_params(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace dmpflight

#endif  // DMPFLIGHT_IO_HPP_
