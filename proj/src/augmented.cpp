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

#include "dloc/augmented.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dloc/errors.hpp"

namespace dloc {

AugmentedProblem::AugmentedProblem(const DelayedProblem& problem, const CommensurableGrid& grid)
    : base_(problem), grid_(grid), separable_(control_cost_separable(problem)) {}

void AugmentedProblem::check_window(double t) const {
  const double lo = window_start();
  const double hi = window_end();
  if (t < lo - time_tolerance(lo) || t > hi + time_tolerance(hi)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "t=" << t << " is outside the window [" << lo << ", " << hi << "]";
    throw OutOfWindow(msg.str());
  }
}

Matrix AugmentedProblem::block_A(long i, long j, double t) const {
  check_window(t);
  if (i < 0 || j < 0 || i >= grid_.N || j >= grid_.N) {
    throw std::invalid_argument("block index outside 0..N-1");
  }
  const double ti = t + grid_.h * static_cast<double>(i);
  Matrix block = Matrix::Zero(base_.n, base_.n);
  if (i == j) block += base_.A(ti);
  if (j == i - grid_.k) block += base_.A_D(ti);
  return block;
}

Matrix AugmentedProblem::A_tilde(double t) const {
  check_window(t);
  const int n = base_.n;
  Matrix out = Matrix::Zero(state_dim(), state_dim());
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    out.block(i * n, i * n, n, n) += base_.A(ti);
    if (i >= grid_.k) out.block(i * n, (i - grid_.k) * n, n, n) += base_.A_D(ti);
  }
  return out;
}

Vector AugmentedProblem::apply_A(double t, const Vector& xi) const {
  const int n = base_.n;
  Vector out(state_dim());
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    Vector row = base_.A(ti) * xi.segment(i * n, n);
    if (i >= grid_.k) row += base_.A_D(ti) * xi.segment((i - grid_.k) * n, n);
    out.segment(i * n, n) = row;
  }
  return out;
}

Vector AugmentedProblem::apply_A_transpose(double t, const Vector& lambda) const {
  const int n = base_.n;
  Vector out(state_dim());
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    Vector row = base_.A(ti).transpose() * lambda.segment(i * n, n);
    const long lead = i + grid_.k;
    if (lead < grid_.N) {
      const double tl = t + grid_.h * static_cast<double>(lead);
      row += base_.A_D(tl).transpose() * lambda.segment(lead * n, n);
    }
    out.segment(i * n, n) = row;
  }
  return out;
}

Vector AugmentedProblem::state_block(const Vector& xi, long i, double t) const {
  if (i >= 0) return xi.segment(i * base_.n, base_.n);
  const double ti = t + grid_.h * static_cast<double>(i);
  return base_.phi(std::min(ti, grid_.a));
}

Vector AugmentedProblem::control_block(const Vector& theta, long i, double t) const {
  if (i >= 0) return theta.segment(i * base_.m, base_.m);
  return base_.psi(t + grid_.h * static_cast<double>(i));
}

Vector AugmentedProblem::xi_minus(double t) const {
  check_window(t);
  Vector out(base_.n * grid_.k);
  for (long i = 0; i < grid_.k; ++i) out.segment(i * base_.n, base_.n) = state_block(Vector(), i - grid_.k, t);
  return out;
}

Vector AugmentedProblem::theta_minus(double t) const {
  check_window(t);
  Vector out(base_.m * grid_.l);
  for (long i = 0; i < grid_.l; ++i) out.segment(i * base_.m, base_.m) = control_block(Vector(), i - grid_.l, t);
  return out;
}

Vector AugmentedProblem::G_tilde(double t, const Vector& theta) const {
  const int n = base_.n;
  Vector out(state_dim());
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    Vector row = base_.g(ti, control_block(theta, i, t)) +
                 base_.g_D(ti, control_block(theta, i - grid_.l, t));
    if (i < grid_.k) row += base_.A_D(ti) * state_block(Vector(), i - grid_.k, t);
    out.segment(i * n, n) = row;
  }
  return out;
}

double AugmentedProblem::F0(double t, const Vector& xi, Side side) const {
  double total = 0.0;
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    if (!indicator(ti, base_.horizon.a, base_.horizon.b, side)) continue;
    total += base_.f0(ti, state_block(xi, i, t), state_block(xi, i - grid_.k, t));
  }
  return total;
}

Vector AugmentedProblem::F0_gradient(double t, const Vector& xi, Side side) const {
  const int n = base_.n;
  Vector out = Vector::Zero(state_dim());
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    if (!indicator(ti, base_.horizon.a, base_.horizon.b, side)) continue;
    const Vector x = state_block(xi, i, t);
    const Vector y = state_block(xi, i - grid_.k, t);
    out.segment(i * n, n) += base_.state_cost_dx(ti, x, y);
    if (i >= grid_.k) out.segment((i - grid_.k) * n, n) += base_.state_cost_dy(ti, x, y);
  }
  return out;
}

double AugmentedProblem::G0(double t, const Vector& theta, Side side) const {
  double total = 0.0;
  for (long i = 0; i < grid_.N; ++i) {
    const double ti = t + grid_.h * static_cast<double>(i);
    if (!indicator(ti, base_.horizon.a, base_.horizon.b, side)) continue;
    total += base_.g0(ti, control_block(theta, i, t), control_block(theta, i - grid_.l, t));
  }
  return total;
}

double AugmentedProblem::hamiltonian(double t, const Vector& xi, const Vector& theta,
                                     const Vector& lambda, Side side) const {
  return -(F0(t, xi, side) + G0(t, theta, side)) +
         lambda.dot(apply_A(t, xi) + G_tilde(t, theta));
}

Vector AugmentedProblem::maximize_control(double t, const Vector& xi, const Vector& lambda,
                                          const Vector& start, Maximizer maximizer,
                                          Side side) const {
  (void)xi;
  const int n = base_.n;
  const int m = base_.m;
  Vector theta(control_dim());
  for (long j = 0; j < grid_.N; ++j) {
    theta.segment(j * m, m) = base_.region.project(start.segment(j * m, m));
  }
  // Terms of H~ that involve theta_j: blocks j and j + l.
  auto local = [&](long j, const Vector& trial) {
    double total = 0.0;
    for (long i : {j, j + grid_.l}) {
      if (i >= grid_.N || (i == j + grid_.l && grid_.l == 0)) continue;
      const double ti = t + grid_.h * static_cast<double>(i);
      const Vector ui = control_block(trial, i, t);
      const Vector vi = control_block(trial, i - grid_.l, t);
      if (indicator(ti, base_.horizon.a, base_.horizon.b, side)) total -= base_.g0(ti, ui, vi);
      total += lambda.segment(i * n, n).dot(base_.g(ti, ui) + base_.g_D(ti, vi));
    }
    return total;
  };
  const int passes = separable_ ? 1 : 100;
  for (int pass = 0; pass < passes; ++pass) {
    double change = 0.0;
    for (long j = 0; j < grid_.N; ++j) {
      Vector trial = theta;
      const Vector best = maximize(
          [&](const Vector& v) {
            trial.segment(j * m, m) = v;
            return local(j, trial);
          },
          base_.region, maximizer, theta.segment(j * m, m));
      change = std::max(change, (best - theta.segment(j * m, m)).cwiseAbs().maxCoeff());
      theta.segment(j * m, m) = best;
    }
    if (change <= 1e-13 * (1.0 + theta.cwiseAbs().maxCoeff())) break;
  }
  return theta;
}

Vector AugmentedProblem::lift_control(const Trajectory& control, double t, Side side) const {
  const int m = base_.m;
  Vector theta(control_dim());
  for (long i = 0; i < grid_.N; ++i) {
    theta.segment(i * m, m) =
        control_at(base_, control, t + grid_.h * static_cast<double>(i), side);
  }
  return theta;
}

AugmentedProblem augment(const DelayedProblem& problem, double ratio_tol) {
  const CommensurableGrid grid = make_grid(problem, ratio_tol);
  const double t = problem.horizon.a;
  const Vector x = Vector::Zero(problem.n);
  const Vector u = Vector::Zero(problem.m);
  auto check = [](bool ok, const char* what) {
    if (!ok) throw DimensionMismatch(what);
  };
  check(problem.A(t).rows() == problem.n && problem.A(t).cols() == problem.n, "A is not n x n");
  check(problem.A_D(t).rows() == problem.n && problem.A_D(t).cols() == problem.n,
        "A_D is not n x n");
  check(problem.g(t, u).size() == problem.n, "g does not return an n-vector");
  check(problem.g_D(t, u).size() == problem.n, "g_D does not return an n-vector");
  check(problem.phi(t).size() == problem.n, "phi does not return an n-vector");
  check(problem.psi(t).size() == problem.m, "psi does not return an m-vector");
  check(problem.region.dim() == problem.m, "control region dimension differs from m");
  return AugmentedProblem(problem, grid);
}

// ---------------------------------------------------------------------------
// Window integration

namespace {

struct WindowSteps {
  long count = 0;
  double dt = 0.0;
};

WindowSteps window_steps(const AugmentedProblem& aug, const IntegratorConfig& cfg) {
  const long count = steps_per_block(cfg, aug.grid());
  return {count, aug.grid().h / static_cast<double>(count)};
}

Trajectory assemble(std::vector<double> grid, std::vector<Vector> values,
                    std::vector<Vector> right, std::vector<Vector> left,
                    const IntegratorConfig& cfg) {
  Trajectory::Parts parts;
  parts.grid = std::move(grid);
  parts.values = std::move(values);
  parts.interp = cfg.interp();
  if (cfg.scheme == Scheme::rk4) {
    parts.slopes_right = std::move(right);
    parts.slopes_left = std::move(left);
  }
  return Trajectory(std::move(parts));
}

}  // namespace

Trajectory integrate_augmented_state(const AugmentedProblem& aug, const Trajectory& control,
                                     const IntegratorConfig& cfg) {
  const auto [steps, dt] = window_steps(aug, cfg);
  const DelayedProblem& p = aug.base();
  const int n = p.n;
  const long blocks = aug.blocks();
  const long k = aug.grid().k;
  const double h = aug.grid().h;
  const bool rk4 = cfg.scheme == Scheme::rk4;
  const int stage_count = rk4 ? 4 : 1;
  const double a = aug.window_start();
  auto time = [&](long q) { return q == steps ? aug.window_end() : a + static_cast<double>(q) * dt; };
  auto stage_time = [&](long q, int stage) {
    return stage == 0 ? time(q) : stage == 3 ? time(q + 1) : 0.5 * (time(q) + time(q + 1));
  };
  auto stage_side = [](int stage) { return stage == 3 ? Side::left : Side::right; };

  // Forcing G~ at every stage time, shared by all blocks.
  std::vector<std::array<Vector, 4>> forcing(steps);
  for (long q = 0; q < steps; ++q) {
    for (int st = 0; st < stage_count; ++st) {
      const double t = stage_time(q, st);
      forcing[q][st] = aug.G_tilde(t, aug.lift_control(control, t, stage_side(st)));
    }
  }

  // Blocks are chained: block i starts where block i - 1 ends, and reads the
  // stage values already computed for block i - k.
  std::vector<std::vector<std::array<Vector, 4>>> stages(blocks);
  std::vector<std::vector<Vector>> nodes(blocks);
  Vector start = p.phi(a);
  for (long i = 0; i < blocks; ++i) {
    stages[i].resize(steps);
    nodes[i].resize(steps + 1);
    nodes[i][0] = start;
    const long coupled = i - k;
    auto rhs = [&](long q, int st, const Vector& y) {
      const double ti = stage_time(q, st) + h * static_cast<double>(i);
      Vector out = p.A(ti) * y + forcing[q][st].segment(i * n, n);
      if (k == 0) {
        out += p.A_D(ti) * y;
      } else if (coupled >= 0) {
        out += p.A_D(ti) * stages[coupled][q][st];
      }
      return out;
    };
    for (long q = 0; q < steps; ++q) {
      const Vector& y0 = nodes[i][q];
      auto& st = stages[i][q];
      st[0] = y0;
      if (!rk4) {
        nodes[i][q + 1] = y0 + dt * rhs(q, 0, y0);
        continue;
      }
      const Vector k1 = rhs(q, 0, y0);
      st[1] = y0 + 0.5 * dt * k1;
      const Vector k2 = rhs(q, 1, st[1]);
      st[2] = y0 + 0.5 * dt * k2;
      const Vector k3 = rhs(q, 2, st[2]);
      st[3] = y0 + dt * k3;
      const Vector k4 = rhs(q, 3, st[3]);
      nodes[i][q + 1] = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!nodes[i][steps].allFinite()) throw NonFinite("augmented state is not finite");
    start = nodes[i][steps];
  }

  std::vector<double> grid(steps + 1);
  std::vector<Vector> values(steps + 1), right(steps + 1), left(steps + 1);
  for (long q = 0; q <= steps; ++q) {
    grid[q] = time(q);
    values[q].resize(aug.state_dim());
    for (long i = 0; i < blocks; ++i) values[q].segment(i * n, n) = nodes[i][q];
  }
  if (rk4) {
    for (long q = 0; q <= steps; ++q) {
      const double t = grid[q];
      const Vector drift = aug.apply_A(t, values[q]);
      right[q] = drift + aug.G_tilde(t, aug.lift_control(control, t, q == steps ? Side::left
                                                                                 : Side::right));
      left[q] = q == 0 ? right[q] : drift + aug.G_tilde(t, aug.lift_control(control, t, Side::left));
    }
  }
  return assemble(std::move(grid), std::move(values), std::move(right), std::move(left), cfg);
}

Trajectory integrate_augmented_adjoint(const AugmentedProblem& aug, const Trajectory& xi,
                                       const IntegratorConfig& cfg) {
  const auto [steps, dt] = window_steps(aug, cfg);
  const DelayedProblem& p = aug.base();
  const int n = p.n;
  const long blocks = aug.blocks();
  const long k = aug.grid().k;
  const double h = aug.grid().h;
  const bool rk4 = cfg.scheme == Scheme::rk4;
  const int stage_count = rk4 ? 4 : 1;
  const double a = aug.window_start();
  if (xi.dim() != aug.state_dim()) throw DimensionMismatch("augmented state has the wrong dimension");
  auto time = [&](long q) { return q == steps ? aug.window_end() : a + static_cast<double>(q) * dt; };
  // Backward stages on [t_q, t_{q+1}]: 0 at t_{q+1}, 1 and 2 at the midpoint, 3 at t_q.
  auto stage_time = [&](long q, int stage) {
    return stage == 0 ? time(q + 1) : stage == 3 ? time(q) : 0.5 * (time(q) + time(q + 1));
  };
  auto stage_side = [](int stage) { return stage == 0 ? Side::left : Side::right; };

  std::vector<std::array<Vector, 4>> sources(steps);
  for (long q = 0; q < steps; ++q) {
    for (int st = 0; st < stage_count; ++st) {
      const double t = stage_time(q, st);
      sources[q][st] = aug.F0_gradient(t, xi.eval(t, stage_side(st)), stage_side(st));
    }
  }

  // Chained from the last block: Lambda^{N-1}(a + h) = 0 and
  // Lambda^i(a + h) = Lambda^{i+1}(a); block i reads block i + k.
  std::vector<std::vector<std::array<Vector, 4>>> stages(blocks);
  std::vector<std::vector<Vector>> nodes(blocks);
  Vector terminal = Vector::Zero(n);
  for (long i = blocks - 1; i >= 0; --i) {
    stages[i].resize(steps);
    nodes[i].resize(steps + 1);
    nodes[i][steps] = terminal;
    const long coupled = i + k;
    auto rhs = [&](long q, int st, const Vector& y) {
      const double t = stage_time(q, st);
      const double ti = t + h * static_cast<double>(i);
      Vector out = sources[q][st].segment(i * n, n) - p.A(ti).transpose() * y;
      if (k == 0) {
        out -= p.A_D(ti).transpose() * y;
      } else if (coupled < blocks) {
        const double tc = t + h * static_cast<double>(coupled);
        out -= p.A_D(tc).transpose() * stages[coupled][q][st];
      }
      return out;
    };
    for (long q = steps - 1; q >= 0; --q) {
      const Vector& y1 = nodes[i][q + 1];
      auto& st = stages[i][q];
      st[0] = y1;
      if (!rk4) {
        nodes[i][q] = y1 - dt * rhs(q, 0, y1);
        continue;
      }
      const Vector k1 = rhs(q, 0, y1);
      st[1] = y1 - 0.5 * dt * k1;
      const Vector k2 = rhs(q, 1, st[1]);
      st[2] = y1 - 0.5 * dt * k2;
      const Vector k3 = rhs(q, 2, st[2]);
      st[3] = y1 - dt * k3;
      const Vector k4 = rhs(q, 3, st[3]);
      nodes[i][q] = y1 - dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!nodes[i][0].allFinite()) throw NonFinite("augmented adjoint is not finite");
    terminal = nodes[i][0];
  }

  std::vector<double> grid(steps + 1);
  std::vector<Vector> values(steps + 1), right(steps + 1), left(steps + 1);
  for (long q = 0; q <= steps; ++q) {
    grid[q] = time(q);
    values[q].resize(aug.state_dim());
    for (long i = 0; i < blocks; ++i) values[q].segment(i * n, n) = nodes[i][q];
  }
  if (rk4) {
    for (long q = 0; q <= steps; ++q) {
      const double t = grid[q];
      const Vector drift = -aug.apply_A_transpose(t, values[q]);
      const Side side_r = q == steps ? Side::left : Side::right;
      right[q] = drift + aug.F0_gradient(t, xi.eval(t, side_r), side_r);
      left[q] = q == 0 ? right[q] : drift + aug.F0_gradient(t, xi.eval(t, Side::left), Side::left);
    }
  }
  return assemble(std::move(grid), std::move(values), std::move(right), std::move(left), cfg);
}

double augmented_cost(const AugmentedProblem& aug, const Trajectory& xi, const Trajectory& control,
                      const IntegratorConfig& cfg) {
  const auto [steps, dt] = window_steps(aug, cfg);
  const double a = aug.window_start();
  auto time = [&](long q) { return q == steps ? aug.window_end() : a + static_cast<double>(q) * dt; };
  auto integrand = [&](double t, Side side) {
    return aug.F0(t, xi.eval(t, side), side) + aug.G0(t, aug.lift_control(control, t, side), side);
  };
  auto interval = [&](double t0, double t1) {
    switch (cfg.quadrature) {
      case Quadrature::left_riemann:
        return (t1 - t0) * integrand(t0, Side::right);
      case Quadrature::trapezoid:
        return 0.5 * (t1 - t0) * (integrand(t0, Side::right) + integrand(t1, Side::left));
      case Quadrature::simpson:
        return (t1 - t0) / 6.0 *
               (integrand(t0, Side::right) + 4.0 * integrand(0.5 * (t0 + t1), Side::right) +
                integrand(t1, Side::left));
    }
    return 0.0;
  };
  // The last block is masked from b - h (N - 1) on; that time is a quadrature node.
  const CommensurableGrid& grid = aug.grid();
  const double cut = grid.b - grid.h * static_cast<double>(grid.N - 1);
  double total = 0.0;
  for (long q = 0; q < steps; ++q) {
    const double t0 = time(q);
    const double t1 = time(q + 1);
    if (cut > t0 + time_tolerance(cut) && cut < t1 - time_tolerance(cut)) {
      total += interval(t0, cut) + interval(cut, t1);
    } else {
      total += interval(t0, t1);
    }
  }
  if (!std::isfinite(total)) throw NonFinite("augmented cost is not finite");
  return total;
}

// ---------------------------------------------------------------------------
// Lifting and flattening

Trajectory lift_trajectory(const AugmentedProblem& aug, const Trajectory& trajectory) {
  const CommensurableGrid& grid = aug.grid();
  if (!trajectory.covers(grid.a, grid.b_tilde)) {
    throw CoverageError("trajectory does not cover [a, b_tilde]");
  }
  const double lo = aug.window_start();
  const double hi = aug.window_end();
  std::vector<double> local;
  for (double t : trajectory.grid()) {
    for (long i = 0; i < grid.N; ++i) {
      const double tau = t - grid.h * static_cast<double>(i);
      if (tau >= lo - time_tolerance(lo) && tau <= hi + time_tolerance(hi)) {
        local.push_back(std::clamp(tau, lo, hi));
      }
    }
  }
  std::sort(local.begin(), local.end());
  std::vector<double> nodes;
  for (double tau : local) {
    if (nodes.empty() || tau - nodes.back() > time_tolerance(tau)) nodes.push_back(tau);
  }
  if (nodes.back() < hi) nodes.back() = hi;

  const int d = trajectory.dim();
  Trajectory::Parts parts;
  parts.interp = trajectory.interp();
  parts.grid = nodes;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    const Side side = q + 1 == nodes.size() ? Side::left : Side::right;
    Vector stacked(d * grid.N);
    for (long i = 0; i < grid.N; ++i) {
      stacked.segment(i * d, d) = trajectory.eval(nodes[q] + grid.h * static_cast<double>(i), side);
    }
    parts.values.push_back(std::move(stacked));
  }
  return Trajectory(std::move(parts));
}

Trajectory flatten_trajectory(const AugmentedProblem& aug, const Trajectory& stacked,
                              bool prepend_history, double seam_tol) {
  const CommensurableGrid& grid = aug.grid();
  const long blocks = grid.N;
  if (stacked.dim() % blocks != 0) throw DimensionMismatch("stacked dimension is not a multiple of N");
  const int d = stacked.dim() / static_cast<int>(blocks);
  const std::size_t count = stacked.size();
  const auto& local = stacked.grid();
  const bool slopes = stacked.has_slopes();
  const auto parts_in = stacked.parts();

  Trajectory::Parts parts;
  parts.interp = stacked.interp();
  if (prepend_history) {
    if (d != aug.base().n) throw DimensionMismatch("history needs a state trajectory");
    const double dt = local[1] - local[0];
    const long history = grid.k * static_cast<long>(std::llround(grid.h / dt));
    const double a = grid.a;
    const double r = aug.base().delays.r;
    for (long j = -history; j < 0; ++j) {
      const double t = a + static_cast<double>(j) * dt;
      parts.grid.push_back(t);
      parts.values.push_back(aug.base().phi(t));
      if (slopes) {
        const double probe = 1e-4 * dt;
        const double lo = std::max(t - probe, a - r);
        const double hi = std::min(t + probe, a);
        const Vector slope = (aug.base().phi(hi) - aug.base().phi(lo)) / (hi - lo);
        parts.slopes_right.push_back(slope);
        parts.slopes_left.push_back(slope);
      }
    }
  }
  for (long i = 0; i < blocks; ++i) {
    const double offset = grid.h * static_cast<double>(i);
    for (std::size_t q = (i == 0 ? 0 : 1); q < count; ++q) {
      parts.grid.push_back(local[q] + offset);
      Vector value = parts_in.values[q].segment(i * d, d);
      if (slopes) {
        parts.slopes_right.push_back(parts_in.slopes_right[q].segment(i * d, d));
        parts.slopes_left.push_back(parts_in.slopes_left[q].segment(i * d, d));
        if (prepend_history && i == 0 && q == 0 && !parts.slopes_left.empty() &&
            parts.slopes_left.size() > 1) {
          parts.slopes_left.back() = parts.slopes_left[parts.slopes_left.size() - 2];
        }
      }
      if (q + 1 == count && i + 1 < blocks) {
        const Vector next = parts_in.values[0].segment((i + 1) * d, d);
        const double scale = 1.0 + std::max(value.cwiseAbs().maxCoeff(), next.cwiseAbs().maxCoeff());
        if ((value - next).cwiseAbs().maxCoeff() > seam_tol * scale) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "blocks " << i << " and " << i + 1 << " disagree at t=" << local[q] + offset;
          throw SeamMismatch(msg.str());
        }
        if (slopes) parts.slopes_right.back() = parts_in.slopes_right[0].segment((i + 1) * d, d);
        value = next;
      }
      parts.values.push_back(std::move(value));
    }
  }
  return Trajectory(std::move(parts));
}

Trajectory map_adjoint(const AugmentedProblem& aug, const Trajectory& lambda, double seam_tol) {
  return flatten_trajectory(aug, lambda, false, seam_tol);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

Trajectory maximize_on_window(const AugmentedProblem& aug, const Trajectory& xi,
                              const Trajectory& lambda, const Trajectory& control,
                              const IntegratorConfig& cfg, Maximizer maximizer) {
  const CommensurableGrid& grid = aug.grid();
  const long per_block = steps_per_block(cfg, grid) * cfg.control_refinement();
  const double dt = grid.h / static_cast<double>(per_block);
  const int m = aug.base().m;
  auto solve_at = [&](long q, Side side) {
    const double t = q == per_block ? aug.window_end() : grid.a + static_cast<double>(q) * dt;
    return aug.maximize_control(t, xi.eval(t, side), lambda.eval(t, side),
                                aug.lift_control(control, t, side), maximizer, side);
  };
  std::vector<Vector> window(per_block + 1);
  for (long q = 0; q < per_block; ++q) window[q] = solve_at(q, Side::right);
  window[per_block] = solve_at(per_block, Side::left);

  Trajectory::Parts parts;
  parts.interp = cfg.interp();
  for (long i = 0; i < grid.N; ++i) {
    for (long q = (i == 0 ? 0 : 1); q <= per_block; ++q) {
      const long global = i * per_block + q;
      parts.grid.push_back(grid.a + static_cast<double>(global) * dt);
      if (q == per_block && i + 1 < grid.N) {
        Vector left = window[per_block].segment(i * m, m);
        Vector right = window[0].segment((i + 1) * m, m);
        if (left != right) parts.left_limits.emplace(parts.grid.size() - 1, std::move(left));
        parts.values.push_back(std::move(right));
      } else {
        parts.values.push_back(window[q].segment(i * m, m));
      }
    }
  }
  parts.grid.back() = grid.b_tilde;
  return Trajectory(std::move(parts));
}

}  // namespace

Solution solve_augmented(const DelayedProblem& problem, const SweepConfig& cfg,
                         const IntegratorConfig& integrator) {
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  const AugmentedProblem aug = augment(problem);
  const CommensurableGrid& grid = aug.grid();

  Diagnostics diag;
  diag.integrator = integrator;
  diag.single_pass = adjoint_independent_of_state(problem) && control_cost_separable(problem);
  diag.relaxation = cfg.relaxation > 0.0 ? cfg.relaxation : (diag.single_pass ? 1.0 : 0.5);
  if (!grid.strict_ok) diag.warnings.push_back("grid has N <= 2k+1 (strict_ok=false)");
  if (grid.extended()) diag.warnings.push_back("horizon extended to b_tilde for the block grid");

  const Vector zero = problem.region.project(Vector::Zero(problem.m));
  Trajectory control = cfg.initial_control
                           ? *cfg.initial_control
                           : sample_control(problem, grid, integrator,
                                            [&](double, Side) { return zero; });
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Trajectory xi = integrate_augmented_state(aug, control, integrator);
    const Trajectory lambda = integrate_augmented_adjoint(aug, xi, integrator);
    diag.cost_history.push_back(augmented_cost(aug, xi, control, integrator));
    const Trajectory proposal = maximize_on_window(aug, xi, lambda, control, integrator, cfg.maximizer);
    Trajectory next = blend(control, proposal, diag.relaxation);
    const double change = sup_distance(next, control);
    diag.control_change.push_back(change);
    diag.iterations = iter;
    control = std::move(next);
    if (diag.single_pass || change <= cfg.control_tol) {
      diag.converged = true;
      break;
    }
  }

  const Trajectory xi = integrate_augmented_state(aug, control, integrator);
  const Trajectory lambda = integrate_augmented_adjoint(aug, xi, integrator);
  const double cost = augmented_cost(aug, xi, control, integrator);
  Trajectory adjoint = map_adjoint(aug, lambda);
  double eta_max = 0.0;
  for (const Vector& v : adjoint.values()) eta_max = std::max(eta_max, v.cwiseAbs().maxCoeff());
  if (eta_max == 0.0) diag.warnings.push_back("adjoint is identically zero (trivial solution)");

  Solution solution{flatten_trajectory(aug, xi, true), std::move(control), std::move(adjoint), cost,
                    Method::augmented, std::move(diag)};
  if (!solution.diagnostics.converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "augmented sweep did not converge in " << cfg.max_iters
        << " iterations (last control change " << solution.diagnostics.control_change.back() << ")";
    throw NoConvergence(msg.str(), std::move(solution));
  }
  return solution;
}

std::string format_matrix(const Matrix& matrix) {
  std::string out;
  char buffer[32];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out += ' ';
      const auto result =
          std::to_chars(buffer, buffer + sizeof buffer, matrix(i, j), std::chars_format::general, 17);
      out.append(buffer, result.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dloc
