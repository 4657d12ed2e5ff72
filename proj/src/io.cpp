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

#include "dmpflight/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dmpflight/error.hpp"

namespace dmpflight {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

[[noreturn]] void parse_error(size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw Error(ErrorCode::kParse, msg.str());
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double to_number(const std::string& field, size_t line) {
  if (field.empty()) parse_error(line, "empty field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) parse_error(line, "not a number: '" + field + "'");
  if (!std::isfinite(v)) parse_error(line, "non-finite value: '" + field + "'");
  return v;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j, const char* key) {
  const auto values = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

AngleUnit angle_unit_from_string(const std::string& name) {
  if (name == "deg") return AngleUnit::kDegrees;
  if (name == "rad") return AngleUnit::kRadians;
  throw Error(ErrorCode::kInvalidArgument, "unknown angle unit '" + name + "' (deg or rad)");
}

std::string format_trajectory_csv(const Trajectory& traj, AngleUnit unit) {
  validate(traj);
  const double scale = unit == AngleUnit::kDegrees ? 180.0 / kPi : 1.0;
  std::string out = "t";
  for (const auto& name : traj.dof_names) out += "," + name + "," + name + "_dot," + name + "_ddot";
  out += "\n";
  for (Index k = 0; k < traj.samples(); ++k) {
    out += format_number(traj.time(k));
    for (Index d = 0; d < traj.dofs(); ++d) {
      out += "," + format_number(scale * traj.y(k, d));
      out += "," + format_number(scale * traj.ydot(k, d));
      out += "," + format_number(scale * traj.yddot(k, d));
    }
    out += "\n";
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& text, AngleUnit unit) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    header = split_fields(line);
  }
  if (header.empty()) parse_error(std::max<size_t>(line_no, 1), "empty file, expected a header");
  if (header[0] != "t") parse_error(line_no, "first column must be 't'");

  std::vector<std::string> names;
  std::vector<int> pos_col, dot_col, ddot_col;
  for (size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.empty()) parse_error(line_no, "empty column name");
    if (std::count(header.begin(), header.end(), h) > 1) {
      parse_error(line_no, "duplicate column '" + h + "'");
    }
    if (ends_with(h, "_ddot") || ends_with(h, "_dot")) continue;
    names.push_back(h);
    pos_col.push_back(static_cast<int>(c));
  }
  if (names.empty()) parse_error(line_no, "no position columns");
  bool derivatives = true;
  for (const auto& name : names) {
    const auto d1 = std::find(header.begin(), header.end(), name + "_dot");
    const auto d2 = std::find(header.begin(), header.end(), name + "_ddot");
    derivatives = derivatives && d1 != header.end() && d2 != header.end();
    dot_col.push_back(d1 == header.end() ? -1 : static_cast<int>(d1 - header.begin()));
    ddot_col.push_back(d2 == header.end() ? -1 : static_cast<int>(d2 - header.begin()));
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "expected " << header.size() << " fields, found " << fields.size();
      parse_error(line_no, msg.str());
    }
    std::vector<double> row(fields.size());
    for (size_t c = 0; c < fields.size(); ++c) row[c] = to_number(fields[c], line_no);
    if (!times.empty() && !(row[0] > times.back())) {
      parse_error(line_no, "time column must be strictly increasing");
    }
    times.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) parse_error(line_no, "need at least two data rows");

  const double scale = unit == AngleUnit::kDegrees ? kPi / 180.0 : 1.0;
  const Index n = static_cast<Index>(rows.size());
  const Index dofs = static_cast<Index>(names.size());
  std::vector<double> gaps(times.size() - 1);
  for (size_t k = 0; k + 1 < times.size(); ++k) gaps[k] = times[k + 1] - times[k];
  std::vector<double> sorted = gaps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const bool uniform = std::all_of(gaps.begin(), gaps.end(), [&](double g) {
    return std::abs(g - median) <= 1e-6 * median;
  });

  Eigen::MatrixXd pos(n, dofs);
  for (Index k = 0; k < n; ++k) {
    for (Index d = 0; d < dofs; ++d) pos(k, d) = scale * rows[static_cast<size_t>(k)][static_cast<size_t>(pos_col[static_cast<size_t>(d)])];
  }
  if (!uniform) {
    std::vector<double> shifted(times);
    for (double& t : shifted) t -= times.front();
    return resample_uniform(shifted, pos, median, names);
  }
  Trajectory traj;
  traj.dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  traj.dof_names = names;
  traj.y = pos;
  if (derivatives) {
    traj.ydot.resize(n, dofs);
    traj.yddot.resize(n, dofs);
    for (Index k = 0; k < n; ++k) {
      const auto& row = rows[static_cast<size_t>(k)];
      for (Index d = 0; d < dofs; ++d) {
        traj.ydot(k, d) = scale * row[static_cast<size_t>(dot_col[static_cast<size_t>(d)])];
        traj.yddot(k, d) = scale * row[static_cast<size_t>(ddot_col[static_cast<size_t>(d)])];
      }
    }
  }
  return traj;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kInvalidArgument, "failed writing '" + path + "'");
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj, AngleUnit unit) {
  write_text_file(path, format_trajectory_csv(traj, unit));
}

Trajectory load_trajectory_csv(const std::string& path, AngleUnit unit) {
  try {
    return parse_trajectory_csv(read_text_file(path), unit);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

std::string format_params_json(const PrimitiveParams& p) {
  validate(p);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = to_string(p.kind);
  j["gains"] = {{"alpha_z", p.alpha_z}, {"beta_z", p.beta_z}, {"alpha_v", p.alpha_v},
                {"beta_v", p.beta_v},   {"mu", p.mu},         {"r0", p.r0},
                {"a1", p.a1},           {"a2", p.a2}};
  j["tau"] = p.tau;
  j["dof_names"] = p.dof_names;
  j["goal"] = vector_json(p.goal);
  j["baseline"] = vector_json(p.baseline);
  j["start"] = vector_json(p.start);
  j["start_velocity"] = vector_json(p.start_velocity);
  j["basis"] = {{"centers", vector_json(p.basis.centers)}, {"widths", vector_json(p.basis.widths)}};
  json rows = json::array();
  for (Index d = 0; d < p.weights.rows(); ++d) rows.push_back(vector_json(p.weights.row(d).transpose()));
  j["weights"] = rows;
  return j.dump(2) + "\n";
}

PrimitiveParams parse_params_json(const std::string& text) {
  PrimitiveParams p;
  try {
    const json j = json::parse(text, nullptr, true, true);
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw Error(ErrorCode::kParse,
                  "unsupported format_version " + std::to_string(version));
    }
    p.kind = system_kind_from_string(j.at("kind").get<std::string>());
    const json& g = j.at("gains");
    p.alpha_z = g.at("alpha_z").get<double>();
    p.beta_z = g.at("beta_z").get<double>();
    p.alpha_v = g.at("alpha_v").get<double>();
    p.beta_v = g.at("beta_v").get<double>();
    p.mu = g.at("mu").get<double>();
    p.r0 = g.at("r0").get<double>();
    p.a1 = g.at("a1").get<double>();
    p.a2 = g.at("a2").get<double>();
    p.tau = j.at("tau").get<double>();
    p.dof_names = j.at("dof_names").get<std::vector<std::string>>();
    p.goal = vector_from(j, "goal");
    p.baseline = vector_from(j, "baseline");
    p.start = vector_from(j, "start");
    p.start_velocity = vector_from(j, "start_velocity");
    p.basis.centers = vector_from(j.at("basis"), "centers");
    p.basis.widths = vector_from(j.at("basis"), "widths");
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    const Index cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
    p.weights.resize(static_cast<Index>(rows.size()), cols);
    for (size_t d = 0; d < rows.size(); ++d) {
      if (static_cast<Index>(rows[d].size()) != cols) {
        throw Error(ErrorCode::kParse, "weight rows differ in length");
      }
      for (Index i = 0; i < cols; ++i) p.weights(static_cast<Index>(d), i) = rows[d][static_cast<size_t>(i)];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("params: ") + e.what());
  }
  try {
    validate(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("params: ") + e.what());
  }
  return p;
}

void save_params(const std::string& path, const PrimitiveParams& params) {
  write_text_file(path, format_params_json(params));
}

PrimitiveParams load_params(const std::string& path) {
  return parse_params_json(read_text_file(path));
}

}  // namespace dmpflight
