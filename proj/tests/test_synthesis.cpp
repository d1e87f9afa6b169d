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

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dloc/errors.hpp"
#include "dloc/library.hpp"
#include "dloc/spec_file.hpp"
#include "dloc/synthesis.hpp"
#include "dloc/transcription.hpp"
#include "support/generators.hpp"

using namespace dloc;
using dloc::testing::sup_error;
using dloc::testing::vec;

namespace {

const Solution& p_solution() {
  static const Solution sol = sweep(example_p(), {}, IntegratorConfig{});
  return sol;
}

Solution perturbed(const DelayedProblem& p, const Solution& base, double lo, double hi, double delta) {
  Solution out = base;
  Trajectory::Parts parts = base.control.parts();
  for (std::size_t i = 0; i < parts.grid.size(); ++i) {
    if (parts.grid[i] >= lo && parts.grid[i] <= hi) parts.values[i].array() += delta;
  }
  for (auto& [i, v] : parts.left_limits) {
    if (parts.grid[i] > lo && parts.grid[i] <= hi) v.array() += delta;
  }
  out.control = Trajectory(parts);
  const IntegratorConfig& cfg = base.diagnostics.integrator;
  out.state = integrate_state(p, out.control, cfg);
  out.adjoint = integrate_adjoint(p, out.state, cfg);
  out.cost = evaluate_cost(p, out.state, out.control, cfg);
  return out;
}

}  // namespace

TEST_CASE("Hamiltonian of P matches the hand formula") {
  const DelayedProblem p = example_p();
  const Solution& sol = p_solution();
  const ReferenceSolution ref = example_p_reference();
  const Vector u = vec({0.37});
  const double t = 0.5;
  const HamiltonianParts parts = hamiltonian(t, u, sol.state, sol.control, sol.adjoint, p);
  const double x = ref.state(t)[0], x1 = ref.state(t + 1.0)[0];
  const double hd1 = -(x + 100.0 * 0.37 * 0.37) +
                     ref.adjoint(t)[0] * (x + ref.state(t - 2.0)[0] - 10.0 * 0.0);
  const double us = ref.control(t + 1.0)[0];
  const double hd0 = -(x1 + 100.0 * us * us) +
                     ref.adjoint(t + 1.0)[0] * (x1 + ref.state(t - 1.0)[0] - 10.0 * 0.37);
  CHECK(parts.hd1 == doctest::Approx(hd1).epsilon(1e-9));
  REQUIRE(parts.hd0_shifted.has_value());
  CHECK(*parts.hd0_shifted == doctest::Approx(hd0).epsilon(1e-9));
  CHECK(parts.total == doctest::Approx(hd1 + hd0).epsilon(1e-9));

  const HamiltonianParts late = hamiltonian(3.5, u, sol.state, sol.control, sol.adjoint, p);
  CHECK_FALSE(late.hd0_shifted.has_value());
  CHECK(late.total == late.hd1);
}

TEST_CASE("pointwise maximizer of P is -eta(t + 1) / 20") {
  const DelayedProblem p = example_p();
  const Solution& sol = p_solution();
  const ReferenceSolution ref = example_p_reference();
  for (double t : {0.0, 0.4, 1.0, 2.3, 3.0}) {
    const Vector u = maximize_pointwise(t, sol.state, sol.control, sol.adjoint, p);
    CHECK(u[0] == doctest::Approx(-ref.adjoint(t + 1.0)[0] / 20.0).epsilon(1e-9));
  }
  CHECK(maximize_pointwise(3.5, sol.state, sol.control, sol.adjoint, p)[0] == doctest::Approx(0.0));
}

TEST_CASE("adding a constant to g0 leaves the maximizer unchanged") {
  DelayedProblem p = example_p();
  const Solution& sol = p_solution();
  DelayedProblem shifted = p;
  shifted.g0 = [](double, const Vector& u, const Vector&) { return 100.0 * u[0] * u[0] + 17.0; };
  for (double t : {0.2, 1.5, 2.9}) {
    const Vector u0 = maximize_pointwise(t, sol.state, sol.control, sol.adjoint, p);
    const Vector u1 = maximize_pointwise(t, sol.state, sol.control, sol.adjoint, shifted);
    CHECK(u0[0] == doctest::Approx(u1[0]).epsilon(1e-10));
  }
}

TEST_CASE("maximizer modes agree on a concave quadratic in a box") {
  const auto h = [](const Vector& u) { return -(u[0] - 0.3) * (u[0] - 0.3) - 2.0 * u[0]; };
  const ControlRegion box = ControlRegion::box(vec({-1.0}), vec({1.0}));
  const double exact = -0.7;
  CHECK(maximize(h, box, Maximizer::closed_form_quadratic, vec({0.0}))[0] == doctest::Approx(exact).epsilon(1e-10));
  CHECK(maximize(h, box, Maximizer::golden_section, vec({0.0}))[0] == doctest::Approx(exact).epsilon(1e-6));
  CHECK(maximize(h, box, Maximizer::projected_ascent, vec({0.0}))[0] == doctest::Approx(exact).epsilon(1e-6));
  const ControlRegion tight = ControlRegion::box(vec({-0.5}), vec({1.0}));
  for (Maximizer mode : {Maximizer::closed_form_quadratic, Maximizer::golden_section, Maximizer::projected_ascent}) {
    CHECK(maximize(h, tight, mode, vec({0.0}))[0] == doctest::Approx(-0.5).epsilon(1e-6));
  }
}

TEST_CASE("coupled quadratic with an active box") {
  const auto h = [](const Vector& u) {
    return -(u[0] * u[0] + u[0] * u[1] + u[1] * u[1]) + 3.0 * u[0];
  };
  const ControlRegion box = ControlRegion::box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
  // Unconstrained optimum (2, -1); on the box the maximizer is (1, -0.5).
  const Vector u = maximize(h, box, Maximizer::closed_form_quadratic, vec({0.0, 0.0}));
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(u[1] == doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("maximizer failures") {
  const ControlRegion whole = ControlRegion::whole_space(1);
  const auto convex = [](const Vector& u) { return u[0] * u[0]; };
  CHECK_THROWS_AS(maximize(convex, whole, Maximizer::closed_form_quadratic, vec({0.0})), MaximizerFailure);
  const auto linear = [](const Vector& u) { return u[0]; };
  CHECK_THROWS_AS(maximize(linear, whole, Maximizer::closed_form_quadratic, vec({0.0})), MaximizerFailure);
  const auto quartic = [](const Vector& u) { return -std::pow(u[0], 4) + u[0]; };
  CHECK_THROWS_AS(maximize(quartic, whole, Maximizer::closed_form_quadratic, vec({0.0})), MaximizerFailure);
  CHECK_THROWS_AS(maximize(linear, whole, Maximizer::golden_section, vec({0.0})), MaximizerFailure);
  const ControlRegion box2 = ControlRegion::box(vec({0.0, 0.0}), vec({1.0, 1.0}));
  const auto two = [](const Vector& u) { return -u.squaredNorm(); };
  CHECK_THROWS_AS(maximize(two, box2, Maximizer::golden_section, vec({0.0, 0.0})), MaximizerFailure);
  const ControlRegion box1 = ControlRegion::box(vec({-1.0}), vec({2.0}));
  CHECK(maximize(linear, box1, Maximizer::closed_form_quadratic, vec({0.0}))[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("maximizer names round trip") {
  for (Maximizer m : {Maximizer::closed_form_quadratic, Maximizer::golden_section, Maximizer::projected_ascent}) {
    CHECK(parse_maximizer(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_maximizer("newton"), std::invalid_argument);
}

TEST_CASE("structure probes") {
  CHECK(adjoint_independent_of_state(example_p()));
  CHECK(control_cost_separable(example_p()));
  const DelayedProblem lq = lq_no_delay(2, 2, {0.0, 1.0}, 3);
  CHECK_FALSE(adjoint_independent_of_state(lq));
  CHECK(control_cost_separable(lq));
  ProblemSpec coupled = ProblemSpec::zeros(1, 1);
  coupled.r = 0.5;
  coupled.s = 0.5;
  coupled.A = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  coupled.phi = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  coupled.g0_quad = PolyMatrix::constant((Matrix(2, 2) << 1.0, 0.3, 0.3, 1.0).finished());
  CHECK_FALSE(control_cost_separable(to_problem(coupled)));
}

TEST_CASE("sweep solves P in one pass") {
  const ReferenceSolution ref = example_p_reference();
  const auto start = std::chrono::steady_clock::now();
  const Solution sol = sweep(example_p(), {}, IntegratorConfig{});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);
  CHECK(std::abs(sol.cost - 67.491786) <= 1e-4);
  CHECK(sol.diagnostics.single_pass);
  CHECK(sol.diagnostics.converged);
  CHECK(sol.method == Method::analytic_sweep);
  CHECK(sup_error(sol.control, ref.control, 0.0, 4.0) <= 1e-3);
  CHECK(sup_error(sol.state, ref.state, 0.0, 4.0) <= 1e-2);
  CHECK(std::abs(sol.adjoint.eval(2.0)[0] - (1.0 - std::exp(2.0))) <= 1e-6);
  CHECK(std::abs(sol.adjoint.eval(4.0)[0]) <= 1e-10);
  bool strict_warning = false;
  for (const auto& w : sol.diagnostics.warnings) strict_warning |= w.find("strict_ok=false") != std::string::npos;
  CHECK(strict_warning);
}

TEST_CASE("sweep on LQ problems matches the exponential oracle") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ProblemSpec spec = lq_no_delay_spec(2, 2, {0.0, 1.0}, seed);
    const DelayedProblem p = to_problem(spec);
    const Solution sol = sweep(p, {}, IntegratorConfig{Scheme::rk4, 1e-3, Quadrature::simpson});
    const dloc::testing::LqOracle oracle(spec);
    CAPTURE(seed);
    CHECK(sol.diagnostics.converged);
    CHECK_FALSE(sol.diagnostics.single_pass);
    CHECK(sup_error(sol.state, [&](double t) { return oracle.state(t); }, 0.0, 1.0) < 1e-7);
    CHECK(sup_error(sol.adjoint, [&](double t) { return oracle.adjoint(t); }, 0.0, 1.0) < 1e-7);
    CHECK(sup_error(sol.control, [&](double t) { return oracle.control(t); }, 0.0, 1.0) < 1e-7);
  }
}

TEST_CASE("sweep respects box constraints") {
  DelayedProblem p = example_p();
  p.region = ControlRegion::box(vec({0.0}), vec({0.2}));
  const Solution sol = sweep(p, {}, IntegratorConfig{Scheme::rk4, 1e-2, Quadrature::simpson});
  const ReferenceSolution ref = example_p_reference();
  for (double t = 0.0; t <= 4.0; t += 0.05) {
    const double u = sol.control.eval(t)[0];
    CHECK(p.region.contains(Vector::Constant(1, u), 1e-12));
    CHECK(u == doctest::Approx(std::clamp(ref.control(t)[0], 0.0, 0.2)).epsilon(1e-6));
  }
  CHECK(sol.cost > ref.cost);
  CHECK(certify(p, sol, 100).overall);
}

TEST_CASE("sweep gives up after max_iters with the last iterate") {
  const DelayedProblem p = lq_no_delay(2, 1, {0.0, 2.0}, 2);
  SweepConfig cfg;
  cfg.max_iters = 2;
  try {
    sweep(p, cfg, IntegratorConfig{Scheme::rk4, 1e-2, Quadrature::simpson});
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.last_iterate().diagnostics.iterations == 2);
    CHECK_FALSE(e.last_iterate().diagnostics.converged);
    CHECK(e.last_iterate().diagnostics.control_change.size() == 2);
  }
}

TEST_CASE("sweep rejects bad configurations") {
  SweepConfig cfg;
  cfg.relaxation = 1.5;
  CHECK_THROWS_AS(sweep(example_p(), cfg, IntegratorConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(example_p(), {}, IntegratorConfig{Scheme::rk4, 0.3, Quadrature::simpson}),
                  IndivisibleStep);
}

TEST_CASE("trivial problem yields a zero adjoint and a warning") {
  ProblemSpec spec = ProblemSpec::zeros(1, 1);
  spec.b = 2.0;
  spec.r = 0.5;
  spec.s = 0.5;
  spec.g0_quad = PolyMatrix::constant((Matrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
  const Solution sol = sweep(to_problem(spec), {}, IntegratorConfig{Scheme::rk4, 0.01, Quadrature::simpson});
  CHECK(sol.cost == 0.0);
  bool warned = false;
  for (const auto& w : sol.diagnostics.warnings) warned |= w.find("identically zero") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("certificate accepts the P sweep") {
  const Certificate cert = certify(example_p(), p_solution(), 200);
  CHECK(cert.convexity_pass);
  CHECK(cert.maximality_pass);
  CHECK(cert.adjoint_pass);
  CHECK(cert.transversality_pass);
  CHECK(cert.overall);
  CHECK(cert.samples == 200);
  const std::string text = cert.to_text();
  CHECK(text.find("overall=true") != std::string::npos);
}

TEST_CASE("certificate rejects a perturbed control") {
  const DelayedProblem p = example_p();
  const Solution bad = perturbed(p, p_solution(), 1.0, 2.0, 0.1);
  const Certificate cert = certify(p, bad, 200);
  CHECK_FALSE(cert.maximality_pass);
  CHECK_FALSE(cert.overall);
  CHECK(cert.convexity_pass);
  CHECK(bad.cost > p_solution().cost);
  const Certificate worse = certify(p, perturbed(p, p_solution(), 1.0, 2.0, 0.3), 200);
  CHECK(worse.worst_maximality_residual > cert.worst_maximality_residual);
}

TEST_CASE("certificate rejects a concave state cost") {
  DelayedProblem p = example_p();
  p.f0 = [](double, const Vector& x, const Vector&) { return -x[0] * x[0]; };
  p.d2_f0 = [](double, const Vector& x, const Vector&) { return Vector(-2.0 * x); };
  const Certificate cert = certify(p, p_solution(), 50);
  CHECK_FALSE(cert.convexity_pass);
  CHECK(cert.worst_eigenvalue == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK_FALSE(cert.overall);
}

TEST_CASE("certificate flags a broken terminal condition and adjoint") {
  const DelayedProblem p = example_p();
  Solution shifted = p_solution();
  Trajectory::Parts parts = shifted.adjoint.parts();
  for (auto& v : parts.values) v.array() += 0.5;
  for (auto& [i, v] : parts.left_limits) v.array() += 0.5;
  shifted.adjoint = Trajectory(parts);
  const Certificate cert = certify(p, shifted, 50);
  CHECK_FALSE(cert.transversality_pass);
  CHECK_FALSE(cert.adjoint_pass);
}

TEST_CASE("certificate needs samples") {
  CHECK_THROWS_AS(certify(example_p(), p_solution(), 0), std::invalid_argument);
}

TEST_CASE("certificate is reproducible") {
  const Certificate a = certify(example_p(), p_solution(), 30);
  const Certificate b = certify(example_p(), p_solution(), 30);
  CHECK(a.to_text() == b.to_text());
}

TEST_CASE("control enters the Hamiltonian only through g0 and the forcing") {
  ProblemSpec spec = ProblemSpec::zeros(1, 1);
  spec.b = 2.0;
  spec.r = 0.5;
  spec.s = 0.5;
  spec.A = PolyMatrix::constant(Matrix::Constant(1, 1, 0.3));
  spec.g_B = PolyMatrix::constant(Matrix::Constant(1, 1, 2.0));
  spec.f0_x = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  spec.phi = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  const DelayedProblem p = to_problem(spec);
  const IntegratorConfig cfg{Scheme::rk4, 0.05, Quadrature::simpson};
  const CommensurableGrid grid = make_grid(p);
  const Trajectory u = sample_control(p, grid, cfg, [](double, Side) { return Vector::Zero(1); });
  const Trajectory x = integrate_state(p, u, cfg);
  const Trajectory zero_eta({0.0, 2.0}, {vec({0.0}), vec({0.0})});
  for (double t : {0.1, 0.9, 1.7}) {
    const double h0 = hamiltonian(t, vec({-3.0}), x, u, zero_eta, p).total;
    const double h1 = hamiltonian(t, vec({4.0}), x, u, zero_eta, p).total;
    CHECK(h0 == h1);
  }
}

TEST_CASE("unforced quadratic control cost is maximized at zero") {
  ProblemSpec spec = ProblemSpec::zeros(1, 2);
  spec.b = 2.0;
  spec.r = 0.5;
  spec.s = 0.5;
  spec.A = PolyMatrix::constant(Matrix::Constant(1, 1, -1.0));
  spec.f0_x = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  spec.phi = PolyMatrix::constant(Matrix::Constant(1, 1, 1.0));
  Matrix g0 = Matrix::Zero(4, 4);
  g0.topLeftCorner(2, 2).setIdentity();
  spec.g0_quad = PolyMatrix::constant(g0);
  const DelayedProblem p = to_problem(spec);
  const Solution sol = sweep(p, {}, IntegratorConfig{Scheme::rk4, 0.05, Quadrature::simpson});
  for (double t : {0.0, 0.6, 1.3, 2.0}) {
    CHECK(maximize_pointwise(t, sol.state, sol.control, sol.adjoint, p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("P control at t = 2") {
  const Solution& sol = p_solution();
  const Vector u = maximize_pointwise(2.0, sol.state, sol.control, sol.adjoint, example_p());
  CHECK(u[0] == doctest::Approx((std::exp(1.0) - 1.0) / 20.0).epsilon(1e-9));
  CHECK(sol.control.eval(2.0)[0] == doctest::Approx(0.0859141).epsilon(1e-6));
}

TEST_CASE("sweep on scalar problems with a quadratic state cost") {
  dloc::testing::Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    ProblemSpec spec = ProblemSpec::zeros(1, 1);
    spec.b = 2.0;
    spec.r = 0.5;
    spec.s = 0.25;
    spec.A = PolyMatrix::constant(Matrix::Constant(1, 1, rng.uniform(-1.0, 0.5)));
    spec.A_D = PolyMatrix::constant(Matrix::Constant(1, 1, rng.uniform(-0.5, 0.5)));
    spec.g_B = PolyMatrix::constant(Matrix::Constant(1, 1, rng.uniform(0.5, 1.5)));
    spec.gD_B = PolyMatrix::constant(Matrix::Constant(1, 1, rng.uniform(-1.0, 1.0)));
    spec.f0_quad = PolyMatrix::constant((Matrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
    spec.g0_quad = PolyMatrix::constant((Matrix(2, 2) << rng.uniform(0.5, 2.0), 0.0, 0.0, 0.0).finished());
    spec.phi = PolyMatrix::constant(Matrix::Constant(1, 1, rng.uniform(0.5, 2.0)));
    const DelayedProblem p = to_problem(spec);
    const Solution sol = sweep(p, {}, IntegratorConfig{Scheme::rk4, 1e-3, Quadrature::simpson});
    CAPTURE(trial);
    CHECK(sol.diagnostics.converged);
    CHECK_FALSE(sol.diagnostics.single_pass);
    const auto& history = sol.diagnostics.cost_history;
    for (std::size_t i = 1; i < history.size(); ++i) {
      CHECK(history[i] <= history[i - 1] + 1e-12 * (1.0 + std::abs(history[i - 1])));
    }
    const Solution oracle = solve_transcription(p, 2000);
    CHECK(std::abs(sol.cost - oracle.cost) <= 1e-3 * (1.0 + std::abs(oracle.cost)));
    CHECK(certify(p, sol, 100).overall);
  }
}
