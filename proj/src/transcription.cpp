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

#include "dloc/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dloc/errors.hpp"

namespace dloc {

namespace {

long integer_ratio(double num, double den, const char* what) {
  const double ratio = num / den;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << what << " is not a multiple of the subinterval length (ratio " << ratio << ")";
    throw IndivisibleStep(msg.str());
  }
  return static_cast<long>(nearest);
}

}  // namespace

Transcription::Transcription(const DelayedProblem& problem, long subintervals)
    : problem_(problem), M_(subintervals) {
  if (subintervals < 1) throw std::invalid_argument("subintervals must be positive");
  dt_ = problem.horizon.length() / static_cast<double>(M_);
  dr_ = integer_ratio(problem.delays.r, dt_, "state delay");
  ds_ = integer_ratio(problem.delays.s, dt_, "control delay");
}

double Transcription::time(long j) const {
  return j == M_ ? problem_.horizon.b : problem_.horizon.a + static_cast<double>(j) * dt_;
}

Vector Transcription::control(const Vector& controls, long j) const {
  if (j < 0) return problem_.psi(time(j));
  return controls.segment(j * problem_.m, problem_.m);
}

Vector Transcription::project(const Vector& controls) const {
  Vector out(controls.size());
  for (long j = 0; j < M_; ++j) {
    out.segment(j * problem_.m, problem_.m) =
        problem_.region.project(controls.segment(j * problem_.m, problem_.m));
  }
  return out;
}

std::vector<Vector> Transcription::states(const Vector& controls) const {
  if (controls.size() != variables()) throw DimensionMismatch("control vector has the wrong size");
  const DelayedProblem& p = problem_;
  std::vector<Vector> x(dr_ + M_ + 1);
  for (long j = -dr_; j <= 0; ++j) x[j + dr_] = p.phi(time(j));
  for (long j = 0; j < M_; ++j) {
    const double t = time(j);
    const Vector& xj = x[j + dr_];
    x[j + 1 + dr_] = xj + dt_ * (p.A(t) * xj + p.A_D(t) * x[j] + p.g(t, control(controls, j)) +
                                 p.g_D(t, control(controls, j - ds_)));
    if (!x[j + 1 + dr_].allFinite()) throw NonFinite("discrete state is not finite");
  }
  return x;
}

double Transcription::cost(const Vector& controls, const std::vector<Vector>& x) const {
  double total = 0.0;
  for (long j = 0; j < M_; ++j) {
    const double t = time(j);
    total += problem_.f0(t, x[j + dr_], x[j]) +
             problem_.g0(t, control(controls, j), control(controls, j - ds_));
  }
  return dt_ * total;
}

double Transcription::cost(const Vector& controls) const {
  return cost(controls, states(controls));
}

std::vector<Vector> Transcription::multipliers(const Vector& controls,
                                               const std::vector<Vector>& x) const {
  const DelayedProblem& p = problem_;
  std::vector<Vector> lambda(M_ + 1, Vector::Zero(p.n));
  for (long j = M_ - 1; j >= 0; --j) {
    const double t = time(j);
    Vector next = lambda[j + 1] + dt_ * (p.A(t).transpose() * lambda[j + 1] +
                                         p.state_cost_dx(t, x[j + dr_], x[j]));
    const long lead = j + dr_;
    if (lead <= M_ - 1) {
      const double tl = time(lead);
      next += dt_ * (p.A_D(tl).transpose() * lambda[lead + 1] +
                     p.state_cost_dy(tl, x[lead + dr_], x[lead]));
    }
    lambda[j] = std::move(next);
  }
  (void)controls;
  return lambda;
}

Vector Transcription::gradient(const Vector& controls) const {
  const DelayedProblem& p = problem_;
  const int m = p.m;
  const std::vector<Vector> x = states(controls);
  const std::vector<Vector> lambda = multipliers(controls, x);
  Vector grad(variables());
  for (long j = 0; j < M_; ++j) {
    const double t = time(j);
    const Vector u = control(controls, j);
    Vector gj = p.control_cost_du(t, u, control(controls, j - ds_)) +
                p.forcing_du(t, u).transpose() * lambda[j + 1];
    const long lead = j + ds_;
    if (lead <= M_ - 1) {
      const double tl = time(lead);
      gj += p.control_cost_dv(tl, control(controls, lead), u) +
            p.delayed_forcing_dv(tl, u).transpose() * lambda[lead + 1];
    }
    grad.segment(j * m, m) = dt_ * gj;
  }
  return grad;
}

Solution solve_transcription(const DelayedProblem& problem, long subintervals,
                             const DescentOptions& options) {
  const Transcription tr(problem, subintervals);
  const double dt = tr.step();
  const int m = problem.m;
  const long M = tr.subintervals();

  Diagnostics diag;
  diag.integrator = {Scheme::euler, dt, Quadrature::left_riemann};
  diag.subintervals = M;

  Vector u = tr.project(Vector::Zero(tr.variables()));
  double value = tr.cost(u);
  Vector grad = tr.gradient(u) / dt;
  double alpha = 1.0;
  auto stationarity = [&](const Vector& point, const Vector& g) {
    return (point - tr.project(point - g)).cwiseAbs().maxCoeff();
  };
  const double target = options.tol * (1.0 + stationarity(u, grad));
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    diag.iterations = iter;
    diag.cost_history.push_back(value);
    const double residual = stationarity(u, grad);
    diag.control_change.push_back(residual);
    if (residual <= target) {
      diag.converged = true;
      break;
    }
    if (residual < 0.5 * best) {
      best = residual;
      stalled = 0;
    } else if (++stalled >= 200) {
      break;
    }
    Vector next;
    double next_value = 0.0;
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      next = tr.project(u - alpha * grad);
      next_value = tr.cost(next);
      if (next_value <= value + 1e-4 * dt * grad.dot(next - u)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    Vector next_grad = tr.gradient(next) / dt;
    const Vector ds = next - u;
    const Vector dy = next_grad - grad;
    const double curvature = ds.dot(dy);
    alpha = curvature > 0.0 ? ds.squaredNorm() / curvature : 2.0 * alpha;
    u = std::move(next);
    grad = std::move(next_grad);
    value = next_value;
  }

  const std::vector<Vector> x = tr.states(u);
  const std::vector<Vector> lambda = tr.multipliers(u, x);
  Trajectory::Parts state;
  state.interp = Interp::linear;
  for (long j = -tr.state_lag(); j <= M; ++j) {
    state.grid.push_back(tr.time(j));
    state.values.push_back(x[j + tr.state_lag()]);
  }
  Trajectory::Parts control;
  control.interp = Interp::linear;
  Trajectory::Parts adjoint;
  adjoint.interp = Interp::linear;
  for (long j = 0; j <= M; ++j) {
    control.grid.push_back(tr.time(j));
    control.values.push_back(u.segment(std::min(j, M - 1) * m, m));
    adjoint.grid.push_back(tr.time(j));
    adjoint.values.push_back(-lambda[j]);
  }

  Solution solution{Trajectory(std::move(state)), Trajectory(std::move(control)),
                    Trajectory(std::move(adjoint)), value, Method::transcription, std::move(diag)};
  if (!solution.diagnostics.converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "projected gradient descent stopped after " << solution.diagnostics.iterations
        << " iterations (stationarity " << solution.diagnostics.control_change.back() << ")";
    throw NoConvergence(msg.str(), std::move(solution));
  }
  return solution;
}

}  // namespace dloc
