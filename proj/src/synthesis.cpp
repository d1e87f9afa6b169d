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

#include "dloc/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dloc/commensurability.hpp"
#include "dloc/errors.hpp"

namespace dloc {

std::string to_string(Maximizer maximizer) {
  switch (maximizer) {
    case Maximizer::closed_form_quadratic:
      return "closed-form-quadratic";
    case Maximizer::golden_section:
      return "golden-section";
    case Maximizer::projected_ascent:
      return "projected-ascent";
  }
  return "closed-form-quadratic";
}

Maximizer parse_maximizer(const std::string& text) {
  if (text == "closed-form-quadratic") return Maximizer::closed_form_quadratic;
  if (text == "golden-section") return Maximizer::golden_section;
  if (text == "projected-ascent") return Maximizer::projected_ascent;
  throw std::invalid_argument("unknown maximizer '" + text + "'");
}

HamiltonianParts hamiltonian(double t, const Vector& u, const Trajectory& x,
                             const Trajectory& u_hist, const Trajectory& eta,
                             const DelayedProblem& p, std::optional<Side> side) {
  const double a = p.horizon.a;
  const double b = p.horizon.b;
  const double r = p.delays.r;
  const double s = p.delays.s;
  const Side look = side.value_or(Side::right);
  auto inside = [&](double lo, double hi) {
    return side ? indicator(t, lo, hi, *side) : indicator(t, lo, hi);
  };

  HamiltonianParts parts;
  const Vector xt = state_at(p, x, t, look);
  const Vector xr = state_at(p, x, t - r, look);
  const Vector v = control_at(p, u_hist, t - s, look);
  const Vector et = eta.eval(t, look);
  parts.hd1 = et.dot(p.A(t) * xt + p.A_D(t) * xr + p.g(t, u));
  if (inside(a, b)) parts.hd1 -= p.f0(t, xt, xr) + p.g0(t, u, v);

  if (inside(a, b - s)) {
    const double ts = t + s;
    const Vector xs = state_at(p, x, ts, look);
    const Vector xsr = state_at(p, x, ts - r, look);
    const Vector us = control_at(p, u_hist, ts, look);
    const Vector es = eta.eval(ts, look);
    parts.hd0_shifted = -(p.f0(ts, xs, xsr) + p.g0(ts, us, u)) +
                        es.dot(p.A(ts) * xs + p.A_D(ts) * xsr + p.g_D(ts, u));
  }
  parts.total = parts.hd1 + parts.hd0_shifted.value_or(0.0);
  return parts;
}

// ---------------------------------------------------------------------------
// Maximizers

namespace {

constexpr int kAscentIterations = 200;

Vector projected_ascent(const std::function<double(const Vector&)>& q, const ControlRegion& region,
                        const Vector& start) {
  Vector u = region.project(start);
  double value = q(u);
  double alpha = 1.0;
  for (int iter = 0; iter < kAscentIterations; ++iter) {
    const Vector grad = finite_difference_gradient(q, u);
    if (!grad.allFinite()) throw MaximizerFailure("non-finite gradient in projected ascent");
    const double scale = 1.0 + u.cwiseAbs().maxCoeff();
    if ((region.project(u + grad) - u).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + std::abs(value))) {
      return u;
    }
    alpha *= 2.0;
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      const Vector candidate = region.project(u + alpha * grad);
      const double next = q(candidate);
      if (next >= value + 1e-4 * grad.dot(candidate - u)) {
        const double moved = (candidate - u).cwiseAbs().maxCoeff();
        u = candidate;
        value = next;
        accepted = true;
        if (moved <= 1e-12 * scale) return u;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return u;  // no ascent direction left at working precision
  }
  throw MaximizerFailure("projected ascent did not converge in 200 iterations");
}

Vector golden_section(const std::function<double(const Vector&)>& q, const ControlRegion& region) {
  if (region.dim() != 1 || !region.is_box()) {
    throw MaximizerFailure("golden-section search needs a scalar control with a box region");
  }
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = region.lower()[0];
  double hi = region.upper()[0];
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw MaximizerFailure("golden-section search needs finite bounds");
  }
  auto at = [&](double v) { return q(Vector::Constant(1, v)); };
  const double width = hi - lo;
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double fc = at(c);
  double fd = at(d);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + width); ++iter) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = at(d);
    }
  }
  double best = 0.5 * (lo + hi);
  double best_value = at(best);
  for (double edge : {region.lower()[0], region.upper()[0]}) {
    const double value = at(edge);
    if (value > best_value) {
      best = edge;
      best_value = value;
    }
  }
  return Vector::Constant(1, best);
}

Vector closed_form_quadratic(const std::function<double(const Vector&)>& q,
                             const ControlRegion& region, const Vector& start) {
  const Eigen::Index m = start.size();
  const Vector base = Vector::Zero(m);
  const double q0 = q(base);
  Vector grad(m);
  Matrix hess(m, m);
  Vector probe = base;
  for (Eigen::Index i = 0; i < m; ++i) {
    probe[i] = 1.0;
    const double up = q(probe);
    probe[i] = -1.0;
    const double down = q(probe);
    probe[i] = 0.0;
    grad[i] = 0.5 * (up - down);
    hess(i, i) = up - 2.0 * q0 + down;
    for (Eigen::Index j = 0; j < i; ++j) {
      probe[i] = 1.0;
      probe[j] = 1.0;
      const double pp = q(probe);
      probe[j] = -1.0;
      const double pm = q(probe);
      probe[i] = -1.0;
      const double mm = q(probe);
      probe[j] = 1.0;
      const double mp = q(probe);
      probe[i] = 0.0;
      probe[j] = 0.0;
      hess(i, j) = hess(j, i) = 0.25 * (pp - pm - mp + mm);
    }
  }
  if (!grad.allFinite() || !hess.allFinite()) {
    throw MaximizerFailure("non-finite Hamiltonian in quadratic model");
  }

  const double scale = 1.0 + std::abs(q0) + grad.cwiseAbs().maxCoeff() + hess.cwiseAbs().maxCoeff();
  // The model must reproduce q at an off-axis point.
  Vector check(m);
  for (Eigen::Index i = 0; i < m; ++i) check[i] = (i % 2 == 0 ? 0.37 : -0.61) * (1.0 + 0.1 * i);
  const double predicted = q0 + grad.dot(check) + 0.5 * check.dot(hess * check);
  if (std::abs(q(check) - predicted) > 1e-8 * scale) {
    throw MaximizerFailure("Hamiltonian is not quadratic in the control");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(-hess);
  const Vector& curv = eig.eigenvalues();
  const Matrix& basis = eig.eigenvectors();
  const Vector grad_in_basis = basis.transpose() * grad;
  Vector step_in_basis = Vector::Zero(m);
  bool flat_with_slope = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (curv[i] < -1e-12 * scale) throw MaximizerFailure("Hamiltonian is not concave in the control");
    if (curv[i] <= 1e-12 * scale) {
      if (std::abs(grad_in_basis[i]) > 1e-10 * scale) flat_with_slope = true;
      continue;
    }
    step_in_basis[i] = grad_in_basis[i] / curv[i];
  }
  if (flat_with_slope) {
    if (!region.is_box()) throw MaximizerFailure("Hamiltonian is unbounded above in the control");
    return projected_ascent(q, region, region.project(start));
  }
  // Directions of zero curvature and zero slope keep the starting value.
  Vector stationary = basis * step_in_basis;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (curv[i] <= 1e-12 * scale) stationary += basis.col(i) * basis.col(i).dot(start);
  }
  const Vector projected = region.project(stationary);
  const bool diagonal = (hess - Matrix(hess.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <=
                        1e-12 * scale;
  if (m > 1 && !diagonal && projected != stationary) return projected_ascent(q, region, projected);
  return projected;
}

}  // namespace

Vector maximize(const std::function<double(const Vector&)>& objective, const ControlRegion& region,
                Maximizer maximizer, const Vector& start) {
  switch (maximizer) {
    case Maximizer::closed_form_quadratic:
      return closed_form_quadratic(objective, region, start);
    case Maximizer::golden_section:
      return golden_section(objective, region);
    case Maximizer::projected_ascent:
      return projected_ascent(objective, region, start);
  }
  throw MaximizerFailure("unknown maximizer");
}

Vector maximize_pointwise(double t, const Trajectory& x, const Trajectory& u_hist,
                          const Trajectory& eta, const DelayedProblem& problem,
                          Maximizer maximizer, std::optional<Side> side) {
  const Vector start = u_hist.eval(t, side.value_or(Side::right));
  return maximize(
      [&](const Vector& u) { return hamiltonian(t, u, x, u_hist, eta, problem, side).total; },
      problem.region, maximizer, start);
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

constexpr int kStructureSamples = 8;

Vector random_vector(std::mt19937_64& rng, int dim, double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

bool adjoint_independent_of_state(const DelayedProblem& p) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> time(p.horizon.a, p.horizon.b);
  for (int i = 0; i < kStructureSamples; ++i) {
    const double t = time(rng);
    const Vector x1 = random_vector(rng, p.n, 2.0), y1 = random_vector(rng, p.n, 2.0);
    const Vector x2 = random_vector(rng, p.n, 2.0), y2 = random_vector(rng, p.n, 2.0);
    const Vector dx1 = p.state_cost_dx(t, x1, y1), dx2 = p.state_cost_dx(t, x2, y2);
    const Vector dy1 = p.state_cost_dy(t, x1, y1), dy2 = p.state_cost_dy(t, x2, y2);
    const double scale = 1.0 + dx1.cwiseAbs().maxCoeff() + dy1.cwiseAbs().maxCoeff();
    if ((dx1 - dx2).cwiseAbs().maxCoeff() > 1e-9 * scale ||
        (dy1 - dy2).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      return false;
    }
  }
  return true;
}

bool control_cost_separable(const DelayedProblem& p) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> time(p.horizon.a, p.horizon.b);
  for (int i = 0; i < kStructureSamples; ++i) {
    const double t = time(rng);
    const Vector u1 = random_vector(rng, p.m, 2.0), u2 = random_vector(rng, p.m, 2.0);
    const Vector v1 = random_vector(rng, p.m, 2.0), v2 = random_vector(rng, p.m, 2.0);
    const double g11 = p.g0(t, u1, v1), g21 = p.g0(t, u2, v1);
    const double g12 = p.g0(t, u1, v2), g22 = p.g0(t, u2, v2);
    const double scale = 1.0 + std::abs(g11) + std::abs(g21) + std::abs(g12) + std::abs(g22);
    if (std::abs(g11 - g21 - g12 + g22) > 1e-12 * scale) return false;
  }
  return true;
}

Solution sweep(const DelayedProblem& problem, const SweepConfig& cfg,
               const IntegratorConfig& integrator) {
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(cfg.control_tol > 0.0)) throw std::invalid_argument("control_tol must be positive");
  if (cfg.relaxation < 0.0 || cfg.relaxation > 1.0) {
    throw std::invalid_argument("relaxation must lie in (0, 1]");
  }
  const CommensurableGrid grid = make_grid(problem);

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
    const Trajectory state = integrate_state(problem, control, integrator);
    const Trajectory adjoint = integrate_adjoint(problem, state, integrator);
    diag.cost_history.push_back(evaluate_cost(problem, state, control, integrator));

    const Trajectory proposal =
        sample_control(problem, grid, integrator, [&](double t, Side side) {
          return maximize_pointwise(t, state, control, adjoint, problem, cfg.maximizer, side);
        });
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

  Trajectory state = integrate_state(problem, control, integrator);
  Trajectory adjoint = integrate_adjoint(problem, state, integrator);
  const double cost = evaluate_cost(problem, state, control, integrator);
  double eta_max = 0.0;
  for (const Vector& v : adjoint.values()) eta_max = std::max(eta_max, v.cwiseAbs().maxCoeff());
  if (eta_max == 0.0) diag.warnings.push_back("adjoint is identically zero (trivial solution)");

  Solution solution{std::move(state), std::move(control), std::move(adjoint), cost,
                    Method::analytic_sweep, std::move(diag)};
  if (!solution.diagnostics.converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "sweep did not converge in " << cfg.max_iters << " iterations (last control change "
        << solution.diagnostics.control_change.back() << ")";
    throw NoConvergence(msg.str(), std::move(solution));
  }
  return solution;
}

// ---------------------------------------------------------------------------
// Certificate

std::string Certificate::to_text() const {
  std::ostringstream out;
  out.precision(12);
  out << "samples=" << samples << "\n"
      << "convexity_pass=" << (convexity_pass ? "true" : "false") << "\n"
      << "convexity_evidence=sampled\n"
      << "worst_eigenvalue=" << worst_eigenvalue << "\n"
      << "maximality_pass=" << (maximality_pass ? "true" : "false") << "\n"
      << "worst_maximality_residual=" << worst_maximality_residual << "\n"
      << "adjoint_pass=" << (adjoint_pass ? "true" : "false") << "\n"
      << "worst_adjoint_residual=" << worst_adjoint_residual << "\n"
      << "adjoint_threshold=" << adjoint_threshold << "\n"
      << "transversality_pass=" << (transversality_pass ? "true" : "false") << "\n"
      << "terminal_adjoint=" << terminal_adjoint << "\n"
      << "overall=" << (overall ? "true" : "false") << "\n";
  return out.str();
}

namespace {

double min_hessian_eigenvalue(const std::function<double(const Vector&)>& f, const Vector& z) {
  const Eigen::Index dim = z.size();
  Vector delta(dim);
  for (Eigen::Index i = 0; i < dim; ++i) delta[i] = 1e-2 * (1.0 + std::abs(z[i]));
  Matrix hess(dim, dim);
  Vector probe = z;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      auto at = [&](double si, double sj) {
        probe = z;
        probe[i] += si * delta[i];
        probe[j] += sj * delta[j];
        return f(probe);
      };
      const double value =
          (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * delta[i] * delta[j]);
      hess(i, j) = hess(j, i) = value;
    }
  }
  return Eigen::SelfAdjointEigenSolver<Matrix>(hess, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

std::vector<double> breakpoints(const DelayedProblem& p) {
  const CommensurableGrid grid = make_grid(p);
  std::vector<double> points;
  for (long i = 0; i <= grid.N; ++i) points.push_back(grid.block_start(i));
  points.push_back(p.horizon.b);
  points.push_back(p.horizon.b - p.delays.r);
  points.push_back(p.horizon.b - p.delays.s);
  return points;
}

}  // namespace

Certificate certify(const DelayedProblem& problem, const Solution& candidate, int samples,
                    const CertifyOptions& options) {
  if (samples < 1) throw std::invalid_argument("certificate needs at least one sample");
  const double a = problem.horizon.a;
  const double b = problem.horizon.b;
  const double r = problem.delays.r;
  const int n = problem.n;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> time(a, b);
  std::normal_distribution<double> normal(0.0, 1.0);

  Certificate cert;
  cert.samples = samples;

  // Convexity of f0 in (x, x_r).
  cert.worst_eigenvalue = std::numeric_limits<double>::infinity();
  cert.convexity_pass = true;
  for (int i = 0; i < samples; ++i) {
    const double t = time(rng);
    Vector z(2 * n);
    z.head(n) = state_at(problem, candidate.state, t);
    z.tail(n) = state_at(problem, candidate.state, t - r);
    for (Eigen::Index c = 0; c < z.size(); ++c) z[c] += normal(rng) * (1.0 + std::abs(z[c]));
    auto f = [&](const Vector& w) { return problem.f0(t, w.head(n), w.tail(n)); };
    const double eig = min_hessian_eigenvalue(f, z);
    cert.worst_eigenvalue = std::min(cert.worst_eigenvalue, eig);
    if (!(eig >= -options.convexity_slack * (1.0 + std::abs(f(z))))) cert.convexity_pass = false;
  }

  // Maximality against the pointwise maximizer and random trial controls.
  cert.worst_maximality_residual = -std::numeric_limits<double>::infinity();
  cert.maximality_pass = true;
  const ControlRegion& region = problem.region;
  for (int i = 0; i < samples; ++i) {
    const double t = time(rng);
    auto h = [&](const Vector& u) {
      return hamiltonian(t, u, candidate.state, candidate.control, candidate.adjoint, problem)
          .total;
    };
    const Vector current = candidate.control.eval(t);
    const double h_current = h(current);
    std::vector<Vector> trials;
    try {
      trials.push_back(maximize_pointwise(t, candidate.state, candidate.control, candidate.adjoint,
                                          problem, options.maximizer));
    } catch (const MaximizerFailure&) {
      trials.push_back(maximize(h, region, Maximizer::projected_ascent, current));
    }
    Vector trial(problem.m);
    for (int c = 0; c < problem.m; ++c) {
      if (region.is_box() && std::isfinite(region.lower()[c]) && std::isfinite(region.upper()[c])) {
        std::uniform_real_distribution<double> within(region.lower()[c], region.upper()[c]);
        trial[c] = within(rng);
      } else {
        trial[c] = current[c] + normal(rng) * (1.0 + std::abs(current[c]));
      }
    }
    trials.push_back(region.project(trial));
    for (const Vector& u : trials) {
      const double residual = h(u) - h_current;
      cert.worst_maximality_residual = std::max(cert.worst_maximality_residual, residual);
      if (!(residual <= options.maximality_tol * (1.0 + std::abs(h_current)))) {
        cert.maximality_pass = false;
      }
    }
  }

  // Adjoint ODE residual from fourth-order central differences at nodes.
  const Trajectory& eta = candidate.adjoint;
  const auto& nodes = eta.grid();
  const auto breaks = breakpoints(problem);
  std::vector<double> residuals;
  double rhs_scale = 1.0;
  if (nodes.size() >= 5) {
    std::uniform_int_distribution<std::size_t> pick(2, nodes.size() - 3);
    for (int draw = 0; draw < 20 * samples && static_cast<int>(residuals.size()) < samples;
         ++draw) {
      const std::size_t j = pick(rng);
      const double spacing = nodes[j + 1] - nodes[j];
      bool usable = true;
      for (std::size_t q = j - 2; q < j + 2; ++q) {
        if (std::abs(nodes[q + 1] - nodes[q] - spacing) > 1e-9 * spacing) usable = false;
      }
      for (double bp : breaks) {
        if (bp > nodes[j - 2] + time_tolerance(bp) && bp < nodes[j + 2] - time_tolerance(bp)) {
          usable = false;
        }
      }
      if (!usable || eta.left_limits().count(j)) continue;
      const auto& v = eta.values();
      const Vector derivative =
          (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) / (12.0 * spacing);
      const Vector rhs = adjoint_rhs(problem, candidate.state, eta, nodes[j]);
      rhs_scale = std::max(rhs_scale, 1.0 + rhs.cwiseAbs().maxCoeff());
      residuals.push_back((derivative - rhs).cwiseAbs().maxCoeff());
    }
  }
  cert.adjoint_threshold = options.adjoint_factor * candidate.diagnostics.integrator.tolerance();
  if (residuals.empty()) {
    cert.worst_adjoint_residual = std::numeric_limits<double>::infinity();
  } else {
    cert.worst_adjoint_residual = *std::max_element(residuals.begin(), residuals.end()) / rhs_scale;
  }
  cert.adjoint_pass = cert.worst_adjoint_residual <= cert.adjoint_threshold;

  cert.terminal_adjoint = eta.values().back().cwiseAbs().maxCoeff();
  cert.transversality_pass = cert.terminal_adjoint <= options.transversality_tol;

  cert.overall = cert.convexity_pass && cert.maximality_pass && cert.adjoint_pass &&
                 cert.transversality_pass;
  return cert;
}

}  // namespace dloc
