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

#include "dloc/commensurability.hpp"
#include "dloc/integrator.hpp"
#include "dloc/problem.hpp"
#include "dloc/solution.hpp"
#include "dloc/synthesis.hpp"

namespace dloc {

/// Non-delayed problem on the window [a, a + h] obtained by stacking the
/// block shifts xi_i(t) = x(t + h i), theta_i(t) = u(t + h i), i = 0..N-1:
///
///   xi' = A~(t) xi + G~(t, theta),   A~ = M + M_D,
///
/// with M = diag(A(t + h i)) and M_D carrying A_D(t + h i) in block (i, i - k).
/// G~ collects g, g_D and the history contributions of phi and psi for the
/// blocks whose delayed arguments fall before a. Blocks are linked by
/// xi_i(a) = xi_{i-1}(a + h) and xi_0(a) = phi(a).
class AugmentedProblem {
 public:
  AugmentedProblem(const DelayedProblem& problem, const CommensurableGrid& grid);

  const DelayedProblem& base() const { return base_; }
  const CommensurableGrid& grid() const { return grid_; }
  long blocks() const { return grid_.N; }
  int state_dim() const { return static_cast<int>(base_.n * grid_.N); }
  int control_dim() const { return static_cast<int>(base_.m * grid_.N); }
  double window_start() const { return grid_.a; }
  double window_end() const { return grid_.a + grid_.h; }

  /// Block (i, j) of A~(t). Throws OutOfWindow unless t is in [a, a + h].
  Matrix block_A(long i, long j, double t) const;
  Matrix A_tilde(double t) const;
  Vector apply_A(double t, const Vector& xi) const;
  Vector apply_A_transpose(double t, const Vector& lambda) const;

  /// Known history blocks: phi(t + h (i - k)) for i = 0..k-1, and
  /// psi(t + h (i - l)) for i = 0..l-1.
  Vector xi_minus(double t) const;
  Vector theta_minus(double t) const;

  Vector G_tilde(double t, const Vector& theta) const;
  /// Sum of f0 over the blocks, each masked to t + h i <= b.
  double F0(double t, const Vector& xi, Side side = Side::right) const;
  Vector F0_gradient(double t, const Vector& xi, Side side = Side::right) const;
  /// Sum of g0 over the blocks, each masked to t + h i <= b.
  double G0(double t, const Vector& theta, Side side = Side::right) const;

  /// H~ = -(F0 + G0) + lambda . (A~ xi + G~).
  double hamiltonian(double t, const Vector& xi, const Vector& theta, const Vector& lambda,
                     Side side = Side::right) const;
  /// Maximizes H~ over theta in U^N by block-coordinate ascent.
  Vector maximize_control(double t, const Vector& xi, const Vector& lambda, const Vector& start,
                          Maximizer maximizer, Side side = Side::right) const;

  /// theta(t) read from a control on [a, b_tilde].
  Vector lift_control(const Trajectory& control, double t, Side side = Side::right) const;

 private:
  void check_window(double t) const;
  Vector state_block(const Vector& xi, long i, double t) const;
  Vector control_block(const Vector& theta, long i, double t) const;

  DelayedProblem base_;
  CommensurableGrid grid_;
  bool separable_ = true;
};

/// Throws DimensionMismatch if n or m disagree with the callables.
AugmentedProblem augment(const DelayedProblem& problem, double ratio_tol = kDefaultRatioTolerance);

/// Augmented state on the window for a control given on [a, b_tilde]. Blocks
/// are integrated in order, each starting from the end of the previous one.
Trajectory integrate_augmented_state(const AugmentedProblem& aug, const Trajectory& control,
                                     const IntegratorConfig& cfg);
/// Augmented adjoint Lambda^j(t) = eta(t + h j), from Lambda^{N-1}(a + h) = 0
/// and Lambda^i(a + h) = Lambda^{i+1}(a).
Trajectory integrate_augmented_adjoint(const AugmentedProblem& aug, const Trajectory& xi,
                                       const IntegratorConfig& cfg);
/// Integral of F0 + G0 over the window.
double augmented_cost(const AugmentedProblem& aug, const Trajectory& xi,
                      const Trajectory& control, const IntegratorConfig& cfg);

/// Window trajectory of the stacked shifts of `trajectory`, which must cover
/// [a, b_tilde] (CoverageError otherwise).
Trajectory lift_trajectory(const AugmentedProblem& aug, const Trajectory& trajectory);

/// Unstacks a window trajectory onto [a, b_tilde]. State seams must agree to
/// `seam_tol` (relative) or SeamMismatch is thrown. With `prepend_history`
/// the phi samples on [a - r, a) are added.
Trajectory flatten_trajectory(const AugmentedProblem& aug, const Trajectory& stacked,
                              bool prepend_history, double seam_tol = 1e-8);

/// eta(t) = Lambda^j(t - h j) on [a, b_tilde].
Trajectory map_adjoint(const AugmentedProblem& aug, const Trajectory& lambda,
                       double seam_tol = 1e-8);

/// Solves the augmented problem by a forward-backward sweep and maps the
/// result back to the delayed variables. Throws NoConvergence.
Solution solve_augmented(const DelayedProblem& problem, const SweepConfig& cfg,
                         const IntegratorConfig& integrator);

/// Row-major text dump, one row per line, entries separated by spaces.
std::string format_matrix(const Matrix& matrix);

}  // namespace dloc
