// Copyright 2026 The dloc Authors
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

#include "dloc/solution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace dloc {

std::string to_string(Method method) {
  switch (method) {
    case Method::analytic_sweep:
      return "sweep";
    case Method::augmented:
      return "augmented";
    case Method::transcription:
      return "transcription";
  }
  return "sweep";
}

namespace {

void append_number(std::string& out, double value) {
  char buffer[32];
  const auto result =
      std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  out.append(buffer, result.ptr);
}

void append_header(std::string& out, const char* prefix, Eigen::Index dim) {
  for (Eigen::Index i = 1; i <= dim; ++i) out += "," + std::string(prefix) + std::to_string(i);
}

}  // namespace

ComparisonReport compare(const Solution& a, const Solution& b, const TimeHorizon& horizon) {
  if (a.control.dim() != b.control.dim() || a.state.dim() != b.state.dim()) {
    throw DimensionMismatch("solutions have different dimensions");
  }
  const Trajectory& coarse = a.control.size() <= b.control.size() ? a.control : b.control;
  ComparisonReport report;
  report.cost_a = a.cost;
  report.cost_b = b.cost;
  report.cost_gap = std::abs(a.cost - b.cost);
  for (double t : coarse.grid()) {
    if (t < horizon.a - time_tolerance(horizon.a) || t > horizon.b + time_tolerance(horizon.b)) {
      continue;
    }
    const double tt = std::clamp(t, horizon.a, horizon.b);
    const Side side = tt >= horizon.b ? Side::left : Side::right;
    report.grid.push_back(tt);
    report.control_a.push_back(a.control.eval(tt, side));
    report.control_b.push_back(b.control.eval(tt, side));
    report.state_a.push_back(a.state.eval(tt, side));
    report.state_b.push_back(b.state.eval(tt, side));
    report.control_gap = std::max(
        report.control_gap, (report.control_a.back() - report.control_b.back()).cwiseAbs().maxCoeff());
    report.state_gap = std::max(
        report.state_gap, (report.state_a.back() - report.state_b.back()).cwiseAbs().maxCoeff());
  }
  return report;
}

std::string ComparisonReport::summary() const {
  std::ostringstream out;
  out.precision(12);
  out << "cost_a=" << cost_a << "\n"
      << "cost_b=" << cost_b << "\n"
      << "cost_gap=" << cost_gap << "\n"
      << "relative_cost_gap=" << cost_gap / std::max(std::abs(cost_a), 1e-300) << "\n"
      << "control_gap=" << control_gap << "\n"
      << "state_gap=" << state_gap << "\n"
      << "samples=" << grid.size() << "\n";
  return out.str();
}

std::string ComparisonReport::table() const {
  std::string out = "t";
  const Eigen::Index m = control_a.empty() ? 0 : control_a.front().size();
  const Eigen::Index n = state_a.empty() ? 0 : state_a.front().size();
  append_header(out, "u_a", m);
  append_header(out, "u_b", m);
  append_header(out, "x_a", n);
  append_header(out, "x_b", n);
  out += '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    append_number(out, grid[i]);
    for (const Vector* v : {&control_a[i], &control_b[i], &state_a[i], &state_b[i]}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) {
        out += ',';
        append_number(out, (*v)[j]);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace dloc
