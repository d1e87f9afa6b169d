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

#include <vector>

#include "dloc/problem.hpp"
#include "dloc/solution.hpp"

namespace dloc {

/// Forward-Euler transcription on M equal subintervals of [a, b]:
///
///   x_{j+1} = x_j + dt (A x_j + A_D x_{j-dr} + g(u_j) + g_D(u_{j-ds})),
///   J = dt sum_{j<M} f0(t_j, x_j, x_{j-dr}) + g0(t_j, u_j, u_{j-ds}),
///
/// with history samples of phi and psi for negative indices. Controls are
/// stacked as one vector, u_j in entries [j m, (j + 1) m).
class Transcription {
 public:
  /// Throws IndivisibleStep unless r / dt and s / dt are integers.
  Transcription(const DelayedProblem& problem, long subintervals);

  const DelayedProblem& problem() const { return problem_; }
  long subintervals() const { return M_; }
  double step() const { return dt_; }
  long state_lag() const { return dr_; }
  long control_lag() const { return ds_; }
  double time(long j) const;
  int variables() const { return static_cast<int>(problem_.m * M_); }

  /// x_{-dr}, ..., x_M.
  std::vector<Vector> states(const Vector& controls) const;
  double cost(const Vector& controls) const;
  /// Exact gradient of cost() through the discrete adjoint.
  Vector gradient(const Vector& controls) const;
  /// Discrete multipliers lambda_0, ..., lambda_M (lambda_M = 0).
  std::vector<Vector> multipliers(const Vector& controls, const std::vector<Vector>& x) const;

  Vector project(const Vector& controls) const;

 private:
  Vector control(const Vector& controls, long j) const;
  double cost(const Vector& controls, const std::vector<Vector>& x) const;

  DelayedProblem problem_;
  long M_ = 0;
  double dt_ = 0.0;
  long dr_ = 0;
  long ds_ = 0;
};

struct DescentOptions {
  int max_iters = 20000;
  /// Stationarity target on sup |u - P(u - grad / dt)|, relative to
  /// 1 + its value at the starting point.
  double tol = 1e-7;
};

/// Projected gradient descent with Barzilai-Borwein steps and Armijo
/// backtracking, from u = P(0). The returned adjoint is -lambda, the
/// multipliers in the sign convention of the continuous adjoint.
/// Throws NoConvergence with the last iterate when max_iters is reached or
/// the residual stops halving for 200 iterations.
Solution solve_transcription(const DelayedProblem& problem, long subintervals,
                             const DescentOptions& options = {});

}  // namespace dloc
