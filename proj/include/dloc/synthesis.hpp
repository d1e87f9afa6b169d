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
#include <optional>
#include <string>

#include "dloc/integrator.hpp"
#include "dloc/problem.hpp"
#include "dloc/solution.hpp"

namespace dloc {

/// Maximality-condition Hamiltonian at a single time:
///   total = H_D^1(t, x(t), x(t-r), u, u*(t-s), eta(t))
///         + H_D^0(t+s, x(t+s), x(t+s-r), u*(t+s), u, eta(t+s)) chi[a,b-s](t)
/// with H_D^p = -[f0 + g0] + eta [A x + A_D y + p g(t,u) + (1-p) g_D(t,v)].
struct HamiltonianParts {
  double hd1 = 0.0;
  std::optional<double> hd0_shifted;  // present only when t <= b - s
  double total = 0.0;
};

enum class Maximizer { closed_form_quadratic, golden_section, projected_ascent };

std::string to_string(Maximizer maximizer);
Maximizer parse_maximizer(const std::string& text);

/// Evaluates the Hamiltonian for trial control `u` at t. `u_hist` supplies
/// the fixed u*(t-s) and u*(t+s). With `side` set, indicators and lookups are
/// one-sided limits (used when sampling controls at seams); otherwise the
/// closed-interval convention applies. Throws CoverageError on missing data.
HamiltonianParts hamiltonian(double t, const Vector& u, const Trajectory& x,
                             const Trajectory& u_hist, const Trajectory& eta,
                             const DelayedProblem& problem,
                             std::optional<Side> side = std::nullopt);

/// Maximizes `objective` over `region`.
///
/// closed_form_quadratic: exact quadratic model from unit-step differences,
/// stationary point projected onto the box (refined by projected ascent when
/// a non-diagonal curvature meets an active box). golden_section: m = 1 with
/// a box. projected_ascent: finite-difference gradient, backtracking, at
/// most 200 iterations. Throws MaximizerFailure when the search fails or the
/// objective does not fit the requested mode.
Vector maximize(const std::function<double(const Vector&)>& objective, const ControlRegion& region,
                Maximizer maximizer, const Vector& start);

/// Pointwise maximizer of hamiltonian(t, ., ...) over the control region.
Vector maximize_pointwise(double t, const Trajectory& x, const Trajectory& u_hist,
                          const Trajectory& eta, const DelayedProblem& problem,
                          Maximizer maximizer = Maximizer::closed_form_quadratic,
                          std::optional<Side> side = std::nullopt);

struct SweepConfig {
  int max_iters = 200;
  double control_tol = 1e-9;
  /// Relaxation in (0, 1]; 0 selects 1 for single-pass problems, 0.5 otherwise.
  double relaxation = 0.0;
  Maximizer maximizer = Maximizer::closed_form_quadratic;
  /// Starting control; defaults to the projection of zero onto the region.
  std::optional<Trajectory> initial_control;
};

/// True when sampled gradients of f0 do not depend on (x, x_r), so the
/// adjoint does not depend on the state.
bool adjoint_independent_of_state(const DelayedProblem& problem);
/// True when g0(t, u, v) separates into a u part plus a v part at samples.
bool control_cost_separable(const DelayedProblem& problem);

/// Forward-backward sweep: state forward, adjoint backward, control from the
/// maximality condition with u*(t +- s) lagged to the previous iterate, and
/// relaxation u <- (1 - lambda) u + lambda u_new. When the adjoint is state
/// independent and g0 separable a single pass is exact and is taken.
/// Throws NoConvergence with the last iterate after max_iters.
Solution sweep(const DelayedProblem& problem, const SweepConfig& cfg,
               const IntegratorConfig& integrator);

struct CertifyOptions {
  double convexity_slack = 1e-8;
  double maximality_tol = 1e-8;
  double adjoint_factor = 10.0;
  double transversality_tol = 1e-10;
  Maximizer maximizer = Maximizer::closed_form_quadratic;
  std::uint64_t seed = 0x5eed2019;
};

/// Sampled evidence for the sufficient-optimality hypotheses.
struct Certificate {
  int samples = 0;
  bool convexity_pass = false;
  double worst_eigenvalue = 0.0;
  bool maximality_pass = false;
  double worst_maximality_residual = 0.0;
  bool adjoint_pass = false;
  double worst_adjoint_residual = 0.0;  // relative to 1 + max |adjoint rhs|
  double adjoint_threshold = 0.0;
  bool transversality_pass = false;
  double terminal_adjoint = 0.0;
  bool overall = false;

  /// "key=value" lines, one metric per line.
  std::string to_text() const;
};

/// Checks convexity of f0 in (x, x_r) (finite-difference Hessians), the
/// maximality condition against the pointwise maximizer and random controls,
/// the adjoint ODE residual (fourth-order differences at nodes away from
/// breakpoints, against adjoint_factor times the candidate's integrator
/// tolerance) and |eta(b_tilde)|. Throws std::invalid_argument if samples < 1.
Certificate certify(const DelayedProblem& problem, const Solution& candidate, int samples,
                    const CertifyOptions& options = {});

}  // namespace dloc
