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

#include "dloc/integrator.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dloc/errors.hpp"

namespace dloc {

double IntegratorConfig::tolerance() const { return std::pow(step, order()); }

std::string to_string(Scheme scheme) { return scheme == Scheme::rk4 ? "rk4" : "euler"; }

std::string to_string(Quadrature quadrature) {
  switch (quadrature) {
    case Quadrature::left_riemann:
      return "left-riemann";
    case Quadrature::trapezoid:
      return "trapezoid";
    case Quadrature::simpson:
      return "simpson";
  }
  return "simpson";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "rk4") return Scheme::rk4;
  if (text == "euler") return Scheme::euler;
  throw std::invalid_argument("unknown scheme '" + text + "'");
}

Quadrature parse_quadrature(const std::string& text) {
  if (text == "left-riemann") return Quadrature::left_riemann;
  if (text == "trapezoid") return Quadrature::trapezoid;
  if (text == "simpson") return Quadrature::simpson;
  throw std::invalid_argument("unknown quadrature '" + text + "'");
}

long steps_per_block(const IntegratorConfig& cfg, const CommensurableGrid& grid) {
  if (!(cfg.step > 0.0)) throw std::invalid_argument("integration step must be positive");
  const double ratio = grid.h / cfg.step;
  const double nearest = std::round(ratio);
  if (nearest < 1.0 || std::abs(ratio - nearest) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "step " << cfg.step << " does not divide the block width h = " << grid.h;
    throw IndivisibleStep(msg.str());
  }
  return static_cast<long>(nearest);
}

bool indicator(double t, double lo, double hi) {
  return t >= lo - time_tolerance(lo) && t <= hi + time_tolerance(hi);
}

bool indicator(double t, double lo, double hi, Side side) {
  const double tol_lo = time_tolerance(lo);
  const double tol_hi = time_tolerance(hi);
  if (side == Side::left) return t > lo + tol_lo && t <= hi + tol_hi;
  return t >= lo - tol_lo && t < hi - tol_hi;
}

Vector state_at(const DelayedProblem& problem, const Trajectory& x, double t, Side side) {
  const double a = problem.horizon.a;
  if (std::abs(t - a) <= time_tolerance(a)) return problem.phi(a);
  if (t < a) {
    if (t < a - problem.delays.r - time_tolerance(a - problem.delays.r)) {
      throw CoverageError("state requested before the history window");
    }
    return problem.phi(t);
  }
  return x.eval(t, side);
}

Vector control_at(const DelayedProblem& problem, const Trajectory& u, double t, Side side) {
  const double a = problem.horizon.a;
  if (std::abs(t - a) <= time_tolerance(a)) {
    return side == Side::left ? problem.psi(a) : u.eval(a, Side::right);
  }
  if (t < a) {
    if (t < a - problem.delays.s - time_tolerance(a - problem.delays.s)) {
      throw CoverageError("control requested before the history window");
    }
    return problem.psi(t);
  }
  return u.eval(t, side);
}

Trajectory sample_control(const DelayedProblem& /*problem*/, const CommensurableGrid& grid,
                          const IntegratorConfig& cfg,
                          const std::function<Vector(double t, Side side)>& fn) {
  const long per_block = steps_per_block(cfg, grid) * cfg.control_refinement();
  const long total = grid.N * per_block;
  const double dt = grid.h / static_cast<double>(per_block);
  Trajectory::Parts parts;
  parts.interp = cfg.interp();
  parts.grid.reserve(total + 1);
  parts.values.reserve(total + 1);
  for (long i = 0; i <= total; ++i) {
    const double t = grid.a + static_cast<double>(i) * dt;
    parts.grid.push_back(t);
    parts.values.push_back(i == total ? fn(t, Side::left) : fn(t, Side::right));
    if (i > 0 && i < total && i % per_block == 0) {
      Vector left = fn(t, Side::left);
      if (left != parts.values.back()) parts.left_limits.emplace(i, std::move(left));
    }
  }
  return Trajectory(std::move(parts));
}

// ---------------------------------------------------------------------------
// Forward state integration

StateIntegrator::StateIntegrator(const DelayedProblem& problem, const Trajectory& control,
                                 const IntegratorConfig& cfg)
    : StateIntegrator(problem, control, cfg, make_grid(problem)) {}

StateIntegrator::StateIntegrator(const DelayedProblem& problem, const Trajectory& control,
                                 const IntegratorConfig& cfg, const CommensurableGrid& grid)
    : problem_(problem), control_(control), cfg_(cfg), grid_(grid) {
  per_block_ = steps_per_block(cfg, grid);
  step_ = grid.h / static_cast<double>(per_block_);
  history_ = grid.k * per_block_;
  lag_ = history_;
  total_ = grid.N * per_block_;
  if (control.dim() != problem.m) throw DimensionMismatch("control dimension differs from m");

  nodes_.assign(history_ + total_ + 1, Vector());
  const bool cubic = cfg_.scheme == Scheme::rk4;
  if (cubic) {
    slopes_right_.assign(nodes_.size(), Vector::Zero(problem.n));
    slopes_left_.assign(nodes_.size(), Vector::Zero(problem.n));
  }
  const double r = problem.delays.r;
  const double a = problem.horizon.a;
  const double probe = 1e-4 * step_;
  for (long j = -history_; j <= 0; ++j) {
    const double t = node_time(j);
    Vector value = problem.phi(j == 0 ? a : t);
    if (value.size() != problem.n) throw DimensionMismatch("phi returns wrong dimension");
    if (!value.allFinite()) throw NonFinite("phi is not finite on the history window");
    nodes_[j + history_] = std::move(value);
    if (cubic && history_ > 0) {
      const double lo = std::max(t - probe, a - r);
      const double hi = std::min(t + probe, a);
      const Vector slope = (problem.phi(hi) - problem.phi(lo)) / (hi - lo);
      slopes_right_[j + history_] = slope;
      slopes_left_[j + history_] = slope;
    }
  }
}

double StateIntegrator::node_time(long j) const {
  return grid_.a + static_cast<double>(j) * step_;
}

Vector StateIntegrator::rhs(double t, const Vector& x, const Vector& x_delayed, Side side) const {
  const Vector u = control_at(problem_, control_, t, side);
  const Vector u_delayed =
      problem_.delays.s > 0.0 ? control_at(problem_, control_, t - problem_.delays.s, side) : u;
  return problem_.A(t) * x + problem_.A_D(t) * x_delayed + problem_.g(t, u) +
         problem_.g_D(t, u_delayed);
}

// stage 0: start of step j, 1: midpoint, 2: end.
Vector StateIntegrator::delayed_state(long j, int stage, const Vector& stage_state) const {
  if (lag_ == 0) return stage_state;
  if (stage == 0) return nodes_[j - lag_ + history_];
  if (stage == 2) return nodes_[j + 1 - lag_ + history_];
  const long i = j - lag_;  // interval [i, i+1]
  if (i + 1 <= 0) {
    return problem_.phi(0.5 * (node_time(i) + node_time(i + 1)));
  }
  const Vector& p0 = nodes_[i + history_];
  const Vector& p1 = nodes_[i + 1 + history_];
  if (cfg_.scheme == Scheme::euler) return 0.5 * (p0 + p1);
  return 0.5 * (p0 + p1) +
         step_ / 8.0 * (slopes_right_[i + history_] - slopes_left_[i + 1 + history_]);
}

void StateIntegrator::take_step() {
  const long j = done_;
  const double t0 = node_time(j);
  const double t1 = node_time(j + 1);
  const double tm = 0.5 * (t0 + t1);
  const double dt = step_;
  const Vector& x0 = nodes_[j + history_];

  Vector x1;
  if (cfg_.scheme == Scheme::euler) {
    x1 = x0 + dt * rhs(t0, x0, delayed_state(j, 0, x0), Side::right);
  } else {
    const Vector k1 = rhs(t0, x0, delayed_state(j, 0, x0), Side::right);
    Vector stage = x0 + 0.5 * dt * k1;
    const Vector k2 = rhs(tm, stage, delayed_state(j, 1, stage), Side::right);
    stage = x0 + 0.5 * dt * k2;
    const Vector k3 = rhs(tm, stage, delayed_state(j, 1, stage), Side::right);
    stage = x0 + dt * k3;
    const Vector k4 = rhs(t1, stage, delayed_state(j, 2, stage), Side::left);
    x1 = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    slopes_right_[j + history_] = k1;
  }
  if (!x1.allFinite()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "state integration produced a non-finite value at t=" << t1;
    throw NonFinite(msg.str());
  }
  nodes_[j + 1 + history_] = std::move(x1);
  if (cfg_.scheme == Scheme::rk4) {
    const Vector& x_end = nodes_[j + 1 + history_];
    slopes_left_[j + 1 + history_] = rhs(t1, x_end, delayed_state(j, 2, x_end), Side::left);
  }
  ++done_;
}

void StateIntegrator::advance_to_block(long block) {
  const long target = std::min(block, grid_.N) * per_block_;
  while (done_ < target) take_step();
}

void StateIntegrator::resume(const Trajectory& partial) {
  const long count = static_cast<long>(partial.size()) - history_ - 1;
  if (count < 0 || count > total_ || partial.dim() != problem_.n) {
    throw DimensionMismatch("partial trajectory does not match the integration grid");
  }
  for (long idx = 0; idx < static_cast<long>(partial.size()); ++idx) {
    if (std::abs(partial.grid()[idx] - node_time(idx - history_)) >
        time_tolerance(node_time(idx - history_))) {
      throw DimensionMismatch("partial trajectory grid does not match the integration grid");
    }
    nodes_[idx] = partial.values()[idx];
  }
  if (cfg_.scheme == Scheme::rk4) {
    const auto parts = partial.parts();
    if (parts.slopes_right.empty()) throw DimensionMismatch("partial trajectory lacks slopes");
    for (long idx = 0; idx < static_cast<long>(partial.size()); ++idx) {
      slopes_right_[idx] = parts.slopes_right[idx];
      slopes_left_[idx] = parts.slopes_left[idx];
    }
  }
  done_ = count;
}

Trajectory StateIntegrator::trajectory() const {
  Trajectory::Parts parts;
  parts.interp = cfg_.interp();
  const long count = history_ + done_ + 1;
  parts.grid.reserve(count);
  for (long idx = 0; idx < count; ++idx) parts.grid.push_back(node_time(idx - history_));
  parts.values.assign(nodes_.begin(), nodes_.begin() + count);
  if (cfg_.scheme == Scheme::rk4) {
    parts.slopes_right.assign(slopes_right_.begin(), slopes_right_.begin() + count);
    parts.slopes_left.assign(slopes_left_.begin(), slopes_left_.begin() + count);
  }
  return Trajectory(std::move(parts));
}

Trajectory integrate_state(const DelayedProblem& problem, const Trajectory& control,
                           const IntegratorConfig& cfg) {
  StateIntegrator integrator(problem, control, cfg);
  integrator.advance_all();
  return integrator.trajectory();
}

// ---------------------------------------------------------------------------
// Backward adjoint integration

namespace {

// Adjoint right-hand side. `side` selects one-sided indicators and lookups;
// std::nullopt means the pointwise (closed-interval) convention.
Vector adjoint_rhs_impl(const DelayedProblem& p, const Trajectory& state, double t,
                        const Vector& eta, const std::function<Vector()>& eta_advanced,
                        std::optional<Side> side) {
  const double a = p.horizon.a;
  const double b = p.horizon.b;
  const double r = p.delays.r;
  const Side look = side.value_or(Side::right);
  auto inside = [&](double lo, double hi) {
    return side ? indicator(t, lo, hi, *side) : indicator(t, lo, hi);
  };

  Vector out = -p.A(t).transpose() * eta;
  const Vector x = state_at(p, state, t, look);
  if (inside(a, b)) out += p.state_cost_dx(t, x, state_at(p, state, t - r, look));
  if (inside(a, b - r)) {
    const Vector x_adv = r > 0.0 ? state_at(p, state, t + r, look) : x;
    out += p.state_cost_dy(t + r, x_adv, x);
    out -= p.A_D(t + r).transpose() * eta_advanced();
  }
  return out;
}

}  // namespace

Vector adjoint_rhs(const DelayedProblem& problem, const Trajectory& state,
                   const Trajectory& adjoint, double t) {
  const Vector eta = adjoint.eval(t);
  return adjoint_rhs_impl(
      problem, state, t, eta,
      [&]() -> Vector { return problem.delays.r > 0.0 ? adjoint.eval(t + problem.delays.r) : eta; },
      std::nullopt);
}

Trajectory integrate_adjoint(const DelayedProblem& problem, const Trajectory& state,
                             const IntegratorConfig& cfg) {
  const CommensurableGrid grid = make_grid(problem);
  const long per_block = steps_per_block(cfg, grid);
  const double dt = grid.h / static_cast<double>(per_block);
  const long total = grid.N * per_block;
  const long lead = grid.k * per_block;  // r / dt
  const int n = problem.n;
  const bool cubic = cfg.scheme == Scheme::rk4;
  auto node_time = [&](long j) { return grid.a + static_cast<double>(j) * dt; };
  if (!state.covers(grid.a, grid.b_tilde)) {
    throw CoverageError("state trajectory does not cover [a, b_tilde]");
  }

  std::vector<Vector> nodes(total + 1, Vector::Zero(n));
  std::vector<Vector> slopes_right, slopes_left;
  if (cubic) {
    slopes_right.assign(total + 1, Vector::Zero(n));
    slopes_left.assign(total + 1, Vector::Zero(n));
  }

  // Advanced value eta(t + r) for step j (interval [t_j, t_{j+1}]).
  auto advanced = [&](long j, int stage, const Vector& stage_eta) -> Vector {
    if (lead == 0) return stage_eta;
    if (stage == 0) return nodes[std::min(j + lead, total)];
    if (stage == 2) return nodes[std::min(j + 1 + lead, total)];
    const long i = j + lead;
    if (i + 1 > total) return Vector::Zero(n);
    if (!cubic) return 0.5 * (nodes[i] + nodes[i + 1]);
    return 0.5 * (nodes[i] + nodes[i + 1]) + dt / 8.0 * (slopes_right[i] - slopes_left[i + 1]);
  };
  auto rhs = [&](long j, int stage, double t, const Vector& eta, Side side) {
    return adjoint_rhs_impl(problem, state, t, eta,
                            [&]() { return advanced(j, stage, eta); }, side);
  };

  for (long j = total - 1; j >= 0; --j) {
    const double t0 = node_time(j);
    const double t1 = node_time(j + 1);
    const double tm = 0.5 * (t0 + t1);
    const Vector& e1 = nodes[j + 1];
    Vector e0;
    if (!cubic) {
      e0 = e1 - dt * rhs(j, 2, t1, e1, Side::left);
    } else {
      const Vector k1 = rhs(j, 2, t1, e1, Side::left);
      Vector stage = e1 - 0.5 * dt * k1;
      const Vector k2 = rhs(j, 1, tm, stage, Side::right);
      stage = e1 - 0.5 * dt * k2;
      const Vector k3 = rhs(j, 1, tm, stage, Side::right);
      stage = e1 - dt * k3;
      const Vector k4 = rhs(j, 0, t0, stage, Side::right);
      e0 = e1 - dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      slopes_left[j + 1] = k1;
    }
    if (!e0.allFinite()) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "adjoint integration produced a non-finite value at t=" << t0;
      throw NonFinite(msg.str());
    }
    nodes[j] = std::move(e0);
    if (cubic) slopes_right[j] = rhs(j, 0, t0, nodes[j], Side::right);
  }

  Trajectory::Parts parts;
  parts.interp = cfg.interp();
  for (long j = 0; j <= total; ++j) parts.grid.push_back(node_time(j));
  parts.values = std::move(nodes);
  parts.slopes_right = std::move(slopes_right);
  parts.slopes_left = std::move(slopes_left);
  return Trajectory(std::move(parts));
}

// ---------------------------------------------------------------------------
// Cost quadrature

double evaluate_cost(const DelayedProblem& problem, const Trajectory& state,
                     const Trajectory& control, const IntegratorConfig& cfg) {
  const CommensurableGrid grid = make_grid(problem);
  const long per_block = steps_per_block(cfg, grid);
  const double dt = grid.h / static_cast<double>(per_block);
  const double a = problem.horizon.a;
  const double b = problem.horizon.b;
  const double r = problem.delays.r;
  const double s = problem.delays.s;
  if (!state.covers(a, b) || !control.covers(a, b)) {
    throw CoverageError("trajectories do not cover the cost horizon [a, b]");
  }

  auto integrand = [&](double t, Side side) {
    const Vector x = state_at(problem, state, t, side);
    const Vector u = control_at(problem, control, t, side);
    return problem.f0(t, x, state_at(problem, state, t - r, side)) +
           problem.g0(t, u, control_at(problem, control, t - s, side));
  };
  auto interval = [&](double t0, double t1) {
    const double width = t1 - t0;
    switch (cfg.quadrature) {
      case Quadrature::left_riemann:
        return width * integrand(t0, Side::right);
      case Quadrature::trapezoid:
        return 0.5 * width * (integrand(t0, Side::right) + integrand(t1, Side::left));
      case Quadrature::simpson:
        return width / 6.0 *
               (integrand(t0, Side::right) + 4.0 * integrand(0.5 * (t0 + t1), Side::right) +
                integrand(t1, Side::left));
    }
    return 0.0;
  };

  const long full = static_cast<long>(std::floor((b - a) / dt * (1.0 + 1e-12)));
  double total = 0.0;
  for (long j = 0; j < full; ++j) {
    total += interval(a + static_cast<double>(j) * dt, a + static_cast<double>(j + 1) * dt);
  }
  const double tail_start = a + static_cast<double>(full) * dt;
  if (b - tail_start > time_tolerance(b)) total += interval(tail_start, b);
  if (!std::isfinite(total)) throw NonFinite("cost quadrature is not finite");
  return total;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void append_number(std::string& out, double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  out.append(buffer, result.ptr);
}

void append_row(std::string& out, double t, const Vector& v) {
  append_number(out, t);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(',');
    append_number(out, v[i]);
  }
  out.push_back('\n');
}

double parse_number(std::string_view text, int line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw ParseError("invalid number '" + std::string(text) + "'", line, 1);
  }
  return value;
}

}  // namespace

std::string to_csv(const Trajectory& trajectory, const std::string& name) {
  std::string out = "t";
  for (int i = 1; i <= trajectory.dim(); ++i) out += "," + name + std::to_string(i);
  out.push_back('\n');
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto jump = trajectory.left_limits().find(i);
    if (jump != trajectory.left_limits().end()) append_row(out, trajectory.grid()[i], jump->second);
    append_row(out, trajectory.grid()[i], trajectory.values()[i]);
  }
  return out;
}

Trajectory from_csv(const std::string& text, Interp interp) {
  Trajectory::Parts parts;
  parts.interp = interp;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_number == 1 && line[0] == 't') continue;
    std::vector<double> fields;
    std::string_view view(line);
    while (true) {
      const auto comma = view.find(',');
      fields.push_back(parse_number(view.substr(0, comma), line_number));
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (columns < 0) columns = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != columns || columns < 2) {
      throw ParseError("inconsistent column count", line_number, 1);
    }
    Vector value(columns - 1);
    for (int i = 1; i < columns; ++i) value[i - 1] = fields[i];
    const double t = fields[0];
    if (!parts.grid.empty() && t == parts.grid.back()) {
      parts.left_limits[parts.grid.size() - 1] = parts.values.back();
      parts.values.back() = std::move(value);
      continue;
    }
    parts.grid.push_back(t);
    parts.values.push_back(std::move(value));
  }
  if (parts.grid.empty()) throw ParseError("no samples", line_number, 1);
  return Trajectory(std::move(parts));
}

}  // namespace dloc
