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

#include <functional>
#include <string>
#include <vector>

#include "dloc/commensurability.hpp"
#include "dloc/problem.hpp"
#include "dloc/trajectory.hpp"

namespace dloc {

enum class Scheme { euler, rk4 };
enum class Quadrature { left_riemann, trapezoid, simpson };

struct IntegratorConfig {
  Scheme scheme = Scheme::rk4;
  double step = 1e-3;
  Quadrature quadrature = Quadrature::simpson;

  int order() const { return scheme == Scheme::rk4 ? 4 : 1; }
  /// Nominal accuracy step^order.
  double tolerance() const;
  /// Interpolation matching the scheme order.
  Interp interp() const { return scheme == Scheme::rk4 ? Interp::cubic : Interp::linear; }
  /// Control samples per integration step (RK4 needs the half steps).
  int control_refinement() const { return scheme == Scheme::rk4 ? 2 : 1; }
};

std::string to_string(Scheme scheme);
std::string to_string(Quadrature quadrature);
Scheme parse_scheme(const std::string& text);
Quadrature parse_quadrature(const std::string& text);

/// Number of steps per block, h / step. Throws IndivisibleStep unless the
/// ratio is an integer within 1e-9 relative tolerance.
long steps_per_block(const IntegratorConfig& cfg, const CommensurableGrid& grid);

/// Indicator of [lo, hi] at t, closed at both ends.
bool indicator(double t, double lo, double hi);
/// Indicator of [lo, hi] as a one-sided limit at t: the left limit at hi is
/// inside, the right limit at hi is outside (and symmetrically at lo).
bool indicator(double t, double lo, double hi, Side side);

/// x(t), reading phi on [a - r, a] and the trajectory after a.
Vector state_at(const DelayedProblem& problem, const Trajectory& x, double t,
                Side side = Side::right);
/// u(t), reading psi before a (psi(a) serves as the left limit at a).
Vector control_at(const DelayedProblem& problem, const Trajectory& u, double t,
                  Side side = Side::right);

/// Samples `fn(t, side)` on the control nodes of [a, b_tilde] (every step for
/// Euler, every half step for RK4). Left limits are stored at block seams
/// where they differ from the right value.
Trajectory sample_control(const DelayedProblem& problem, const CommensurableGrid& grid,
                          const IntegratorConfig& cfg,
                          const std::function<Vector(double t, Side side)>& fn);

/// Forward method-of-steps integrator for the delayed state equation.
/// Delayed lookups x(t - r) and u(t - s) land on completed steps only;
/// RK4 midpoints read the Hermite dense output of earlier steps.
class StateIntegrator {
 public:
  StateIntegrator(const DelayedProblem& problem, const Trajectory& control,
                  const IntegratorConfig& cfg, const CommensurableGrid& grid);
  StateIntegrator(const DelayedProblem& problem, const Trajectory& control,
                  const IntegratorConfig& cfg);

  /// Continue from a trajectory previously returned by trajectory().
  void resume(const Trajectory& partial);
  /// Integrate up to the end of block `block` (exclusive count; N = all).
  void advance_to_block(long block);
  void advance_all() { advance_to_block(grid_.N); }

  long completed_steps() const { return done_; }
  const CommensurableGrid& grid() const { return grid_; }
  double step() const { return step_; }

  /// Samples on [a - r, a + completed_steps * step].
  Trajectory trajectory() const;

 private:
  double node_time(long j) const;
  Vector rhs(double t, const Vector& x, const Vector& x_delayed, Side side) const;
  Vector delayed_state(long j, int stage, const Vector& stage_state) const;
  void take_step();

  const DelayedProblem& problem_;
  const Trajectory& control_;
  IntegratorConfig cfg_;
  CommensurableGrid grid_;
  long per_block_ = 0;
  double step_ = 0.0;
  long history_ = 0;  // history nodes before a: k * per_block
  long lag_ = 0;      // r / step
  long total_ = 0;    // steps over [a, b_tilde]
  long done_ = 0;
  std::vector<Vector> nodes_;  // index j + history_
  std::vector<Vector> slopes_right_;
  std::vector<Vector> slopes_left_;
};

/// Delayed state response to `control` over [a - r, b_tilde].
/// Throws NonFinite if the integration blows up.
Trajectory integrate_state(const DelayedProblem& problem, const Trajectory& control,
                           const IntegratorConfig& cfg);

/// Backward method of steps for the adjoint with advanced arguments,
///   eta' = d2f0(t) + d3f0(t + r) chi[a,b-r](t) - eta(t) A(t) - eta(t + r) A_D(t + r) chi[a,b-r](t),
/// from eta(b_tilde) = 0. Cost sources are masked to [a, b]. eta is stored as
/// a column vector (the transpose of the row costate). Covers [a, b_tilde].
Trajectory integrate_adjoint(const DelayedProblem& problem, const Trajectory& state,
                             const IntegratorConfig& cfg);

/// Quadrature of f0 + g0 over [a, b] on the integration step grid.
double evaluate_cost(const DelayedProblem& problem, const Trajectory& state,
                     const Trajectory& control, const IntegratorConfig& cfg);

/// Right-hand side of the adjoint equation at t (pointwise indicators).
Vector adjoint_rhs(const DelayedProblem& problem, const Trajectory& state,
                   const Trajectory& adjoint, double t);

/// Trajectory export: "t,<name>1,...,<name>n" header then one row per
/// sample, 17 significant digits, '.' decimal, LF line endings. Nodes that
/// carry a left limit are written as two rows (left limit first).
std::string to_csv(const Trajectory& trajectory, const std::string& name);
/// Parses to_csv output. Repeated times become left limits.
Trajectory from_csv(const std::string& text, Interp interp);

}  // namespace dloc
