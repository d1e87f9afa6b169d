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

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace dloc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed time interval [a, b] on which the cost is accumulated.
struct TimeHorizon {
  double a = 0.0;
  double b = 1.0;

  double length() const { return b - a; }
};

/// Constant state delay r and control delay s.
struct DelayPair {
  double r = 0.0;
  double s = 0.0;
};

/// Admissible control set: either all of R^m or an axis-aligned box.
class ControlRegion {
 public:
  enum class Kind { whole_space, box };

  static ControlRegion whole_space(int m);
  /// Throws std::invalid_argument when lower > upper in some component.
  static ControlRegion box(Vector lower, Vector upper);

  Kind kind() const { return kind_; }
  bool is_box() const { return kind_ == Kind::box; }
  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Vector project(const Vector& u) const;
  bool contains(const Vector& u, double tol = 0.0) const;

 private:
  ControlRegion(Kind kind, Vector lower, Vector upper)
      : kind_(kind), lower_(std::move(lower)), upper_(std::move(upper)) {}

  Kind kind_;
  Vector lower_;
  Vector upper_;
};

using MatrixFn = std::function<Matrix(double t)>;
using ForcingFn = std::function<Vector(double t, const Vector& u)>;
using ForcingJacobianFn = std::function<Matrix(double t, const Vector& u)>;
using PairCostFn = std::function<double(double t, const Vector& z, const Vector& z_delayed)>;
using PairCostGradFn = std::function<Vector(double t, const Vector& z, const Vector& z_delayed)>;
using HistoryFn = std::function<Vector(double t)>;

/// State-linear optimal control problem with a constant state delay r and
/// control delay s:
///
///   minimize   int_a^b f0(t, x(t), x(t-r)) + g0(t, u(t), u(t-s)) dt
///   subject to x'(t) = A(t) x(t) + A_D(t) x(t-r) + g(t, u(t)) + g_D(t, u(t-s))
///              x = phi on [a-r, a],  u = psi on [a-s, a),  u(t) in region.
///
/// The optional derivative callables are used when present; otherwise the
/// accessor methods fall back to central finite differences.
struct DelayedProblem {
  std::string name;
  int n = 1;
  int m = 1;

  MatrixFn A;
  MatrixFn A_D;
  ForcingFn g;
  ForcingFn g_D;

  PairCostFn f0;
  PairCostGradFn d2_f0;  // gradient of f0 in x
  PairCostGradFn d3_f0;  // gradient of f0 in x(t-r)

  PairCostFn g0;
  PairCostGradFn d2_g0;  // gradient of g0 in u
  PairCostGradFn d3_g0;  // gradient of g0 in u(t-s)
  ForcingJacobianFn dg_du;
  ForcingJacobianFn dgD_dv;

  HistoryFn phi;  // on [a-r, a]; phi(a) is the initial state
  HistoryFn psi;  // on [a-s, a); psi(a) is read as the left limit at a

  TimeHorizon horizon;
  DelayPair delays;
  ControlRegion region = ControlRegion::whole_space(1);

  Vector state_cost_dx(double t, const Vector& x, const Vector& y) const;
  Vector state_cost_dy(double t, const Vector& x, const Vector& y) const;
  Vector control_cost_du(double t, const Vector& u, const Vector& v) const;
  Vector control_cost_dv(double t, const Vector& u, const Vector& v) const;
  Matrix forcing_du(double t, const Vector& u) const;
  Matrix delayed_forcing_dv(double t, const Vector& v) const;
};

/// Central finite-difference gradient with per-component step 1e-6 (1 + |z_i|).
Vector finite_difference_gradient(const std::function<double(const Vector&)>& fn, const Vector& z);
/// Central finite-difference Jacobian with the same step rule.
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& z,
                                  int rows);

struct Violation {
  std::string field;
  double time = 0.0;
  std::string message;

  std::string to_string() const;
  bool operator==(const Violation&) const = default;
};

struct ValidateOptions {
  int samples_per_interval = 101;
  /// Jump threshold is jump_factor * machine epsilon * scale.
  double jump_factor = 1e6;
};

/// Sampled well-posedness check. Finiteness, dimensions and continuity in t
/// are probed on a deterministic grid; passing is evidence, not proof.
std::vector<Violation> validate(const DelayedProblem& problem, const ValidateOptions& options = {});

}  // namespace dloc
