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

#include "dloc/commensurability.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dloc/errors.hpp"

namespace dloc {

DelayReduction reduce_delays(const DelayPair& delays, double tol) {
  const double r = delays.r;
  const double s = delays.s;
  if (!(r >= 0.0) || !(s >= 0.0) || !std::isfinite(r) || !std::isfinite(s)) {
    throw std::invalid_argument("delays must be finite and nonnegative");
  }
  if (r == 0.0 && s == 0.0) throw std::invalid_argument("delays simultaneously zero");
  if (s == 0.0) return {r, 1, 0};
  if (r == 0.0) return {s, 0, 1};

  // Convergents p/q of r/s: p_j = a_j p_{j-1} + p_{j-2}, likewise q.
  const double ratio = r / s;
  double rest = ratio;
  long p_prev = 1, p = static_cast<long>(std::floor(rest));
  long q_prev = 0, q = 1;
  for (int iter = 0; iter < 64; ++iter) {
    if (p > 0 && std::abs(ratio - static_cast<double>(p) / static_cast<double>(q)) <= tol) {
      return {r / static_cast<double>(p), p, q};
    }
    const double frac = rest - std::floor(rest);
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
    const long term = static_cast<long>(std::floor(rest));
    const long p_next = term * p + p_prev;
    const long q_next = term * q + q_prev;
    if (q_next > kMaxRatioDenominator) break;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "delay ratio r/s = " << ratio << " has no rational approximation with denominator <= "
      << kMaxRatioDenominator << " within " << tol;
  throw NonCommensurable(msg.str());
}

CommensurableGrid build_grid(const TimeHorizon& horizon, double h, long k, long l) {
  if (!(h > 0.0)) throw std::invalid_argument("grid step h must be positive");
  CommensurableGrid grid;
  grid.a = horizon.a;
  grid.b = horizon.b;
  grid.h = h;
  grid.k = k;
  grid.l = l;
  const double blocks = (horizon.b - horizon.a) / h;
  const double nearest = std::round(blocks);
  const bool on_multiple = std::abs(blocks - nearest) <= 1e-9 * std::max(1.0, blocks);
  grid.N = std::max(1L, static_cast<long>(on_multiple ? nearest : std::ceil(blocks)));
  grid.b_tilde = on_multiple ? horizon.b : horizon.a + h * static_cast<double>(grid.N);
  if (grid.b_tilde < horizon.b) grid.b_tilde = horizon.b;
  grid.strict_ok = grid.N > 2 * k + 1;
  return grid;
}

CommensurableGrid make_grid(const DelayedProblem& problem, double tol) {
  const DelayReduction red = reduce_delays(problem.delays, tol);
  return build_grid(problem.horizon, red.h, red.k, red.l);
}

void require_strict(const CommensurableGrid& grid) {
  if (!grid.strict_ok) {
    std::ostringstream msg;
    msg << "grid violates N > 2k+1 (N=" << grid.N << ", k=" << grid.k << ")";
    throw StrictGridViolation(msg.str());
  }
}

}  // namespace dloc
