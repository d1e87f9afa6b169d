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

#include "dloc/problem.hpp"

namespace dloc {

/// Polynomial in t with ascending coefficients.
struct Polynomial {
  std::vector<double> coeffs;

  double operator()(double t) const;
  bool operator==(const Polynomial&) const = default;
};

/// Matrix of polynomial entries, row-major.
struct PolyMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Polynomial> entries;

  static PolyMatrix zero(int rows, int cols);
  static PolyMatrix constant(const Matrix& value);
  Polynomial& at(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
  const Polynomial& at(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }
  Matrix operator()(double t) const;
  bool operator==(const PolyMatrix&) const = default;
};

/// Declarative problem description: affine forcing, quadratic-plus-linear
/// costs and polynomial coefficients.
///
///   g(t, u)   = g_B(t) u + g_c(t)             g_D(t, v) = gD_B(t) v + gD_c(t)
///   f0(t,x,y) = f0_x . x + f0_xr . y + z' f0_quad z,   z = (x, y)
///   g0(t,u,v) = g0_u . u + g0_us . v + w' g0_quad w,   w = (u, v)
///
/// Vectors are stored as single-column PolyMatrix values.
struct ProblemSpec {
  std::string name = "problem";
  int n = 1;
  int m = 1;
  double a = 0.0;
  double b = 1.0;
  double r = 0.0;
  double s = 0.0;

  PolyMatrix A, A_D;
  PolyMatrix g_B, g_c, gD_B, gD_c;
  PolyMatrix f0_x, f0_xr, f0_quad;
  PolyMatrix g0_u, g0_us, g0_quad;
  PolyMatrix phi, psi;

  bool box = false;
  Vector lower, upper;

  /// A spec of the given sizes with every coefficient zero.
  static ProblemSpec zeros(int n, int m);
  bool operator==(const ProblemSpec&) const = default;
};

/// Throws ParseError (with line and column) on syntax errors, unknown
/// sections or keys, duplicates and inconsistent dimensions.
ProblemSpec parse_spec(const std::string& text);
/// Text form accepted by parse_spec; numbers use 17 significant digits.
std::string format_spec(const ProblemSpec& spec);

DelayedProblem to_problem(const ProblemSpec& spec);

}  // namespace dloc
