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

#pragma once

#include <string>
#include <vector>

#include "dloc/errors.hpp"
#include "dloc/integrator.hpp"
#include "dloc/trajectory.hpp"

namespace dloc {

enum class Method { analytic_sweep, augmented, transcription };

std::string to_string(Method method);

struct Diagnostics {
  int iterations = 0;
  bool converged = false;
  bool single_pass = false;  // adjoint independent of the state, controls decoupled
  double relaxation = 1.0;
  std::vector<double> control_change;  // sup-norm change per iteration
  std::vector<double> cost_history;    // cost of each iterate
  std::vector<std::string> warnings;
  IntegratorConfig integrator;  // resolution used for the trajectories
  long subintervals = 0;        // transcription only
};

struct Solution {
  Trajectory state;
  Trajectory control;
  Trajectory adjoint;
  double cost = 0.0;
  Method method = Method::analytic_sweep;
  Diagnostics diagnostics;
};

/// Raised when an iterative solver hits its iteration cap. Carries the last
/// iterate and the residual history.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& message, Solution last)
      : Error(message), last_(std::move(last)) {}

  const Solution& last_iterate() const { return last_; }

 private:
  Solution last_;
};

/// Gaps between two solutions of the same problem on a common grid: the
/// nodes of the coarser control grid inside [a, b].
struct ComparisonReport {
  double cost_a = 0.0;
  double cost_b = 0.0;
  double cost_gap = 0.0;
  double control_gap = 0.0;
  double state_gap = 0.0;
  std::vector<double> grid;
  std::vector<Vector> control_a, control_b, state_a, state_b;

  /// "key=value" lines.
  std::string summary() const;
  /// "t,u_a1..,u_b1..,x_a1..,x_b1.." rows, 17 significant digits.
  std::string table() const;
};

ComparisonReport compare(const Solution& a, const Solution& b, const TimeHorizon& horizon);

}  // namespace dloc
