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

#include <cstdint>
#include <functional>

#include "dloc/problem.hpp"
#include "dloc/spec_file.hpp"

namespace dloc {

/// Known optimum of a library problem, as functions of t.
struct ReferenceSolution {
  std::function<Vector(double)> control;
  std::function<Vector(double)> state;  // includes the history on [a - r, a]
  std::function<Vector(double)> adjoint;
  double cost = 0.0;
};

/// Scalar example with r = 2, s = 1 on [0, 4]:
///   minimize int_0^4 x(t) + 100 u(t)^2 dt
///   x'(t) = x(t) + x(t - 2) - 10 u(t - 1),  x = 1 on [-2, 0],  u = 0 on [-1, 0).
DelayedProblem example_p();
ReferenceSolution example_p_reference();
/// The same problem in declarative form.
ProblemSpec example_p_spec();

/// Randomized linear-quadratic problem with inert delays: stable A, A_D = 0,
/// g_D = 0, r = s = (b - a) / 10, f0 = x'Qx / 2 + c.x, g0 = u'Ru / 2, phi
/// constant, psi = 0. No closed-form reference is provided.
ProblemSpec lq_no_delay_spec(int n, int m, TimeHorizon horizon, std::uint64_t seed = 1);
DelayedProblem lq_no_delay(int n, int m, TimeHorizon horizon, std::uint64_t seed = 1);

}  // namespace dloc
