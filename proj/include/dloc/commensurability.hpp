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

#include "dloc/problem.hpp"

namespace dloc {

/// Common step h with r = h k and s = h l.
struct DelayReduction {
  double h = 0.0;
  long k = 0;
  long l = 0;
};

inline constexpr double kDefaultRatioTolerance = 1e-9;
inline constexpr long kMaxRatioDenominator = 1000000;

/// Recovers (h, k, l) from the delays. Both delays positive: k/l is the first
/// continued-fraction convergent of r/s within `tol`, so gcd(k, l) = 1. One
/// delay zero: the other one is the step and its integer is 1.
/// Throws NonCommensurable when no convergent with l <= 10^6 meets `tol`,
/// and std::invalid_argument when the delays are negative or both zero.
DelayReduction reduce_delays(const DelayPair& delays, double tol = kDefaultRatioTolerance);

/// Block partition of [a, b_tilde] into N blocks of width h.
struct CommensurableGrid {
  double a = 0.0;
  double b = 0.0;        // original end of the horizon
  double h = 0.0;
  long k = 0;            // r = h k
  long l = 0;            // s = h l
  long N = 0;
  double b_tilde = 0.0;  // a + h N, the smallest block multiple >= b
  bool strict_ok = false;  // N > 2k + 1

  double block_start(long i) const { return a + h * static_cast<double>(i); }
  bool extended() const { return b_tilde > b; }
};

/// N is the smallest integer with a + h N >= b (ratios within 1e-9 of an
/// integer are snapped). Never fails on N <= 2k + 1; see strict_ok.
CommensurableGrid build_grid(const TimeHorizon& horizon, double h, long k, long l);

/// reduce_delays followed by build_grid.
CommensurableGrid make_grid(const DelayedProblem& problem, double tol = kDefaultRatioTolerance);

/// Throws StrictGridViolation when the grid does not satisfy N > 2k + 1.
void require_strict(const CommensurableGrid& grid);

}  // namespace dloc
