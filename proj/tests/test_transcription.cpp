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
using dloc::testing::Rng;
using dloc::testing::vec;

namespace {

double central_difference(const Transcription& tr, Vector u, Eigen::Index i) {
  const double h = 1e-6 * (1.0 + std::abs(u[i]));
  const double saved = u[i];
  u[i] = saved + h;
  const double plus = tr.cost(u);
  u[i] = saved - h;
  const double minus = tr.cost(u);
  return (plus - minus) / (2.0 * h);
}

double gradient_error(const Transcription& tr, const Vector& u, Rng& rng, int coordinates) {
  const Vector g = tr.gradient(u);
  double worst = 0.0;
  for (int c = 0; c < coordinates; ++c) {
    const Eigen::Index i = rng.integer(0, tr.variables() - 1);
    const double fd = central_difference(tr, u, i);
    worst = std::max(worst, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-8));
  }
  return worst;
}

double control_gap_to_reference(const Solution& sol) {
  const ReferenceSolution ref = example_p_reference();
  double worst = 0.0;
  const auto& grid = sol.control.grid();
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    worst = std::max(worst, std::abs(sol.control.values()[j][0] - ref.control(grid[j])[0]));
  }
  return worst;
}

DelayedProblem random_exact_problem(std::uint64_t seed, long& M) {
  auto rc = dloc::testing::random_linear_case(seed);
  rc.spec.b = rc.spec.a + rc.h * static_cast<double>(rc.N);
  M = rc.N * 10;
  return to_problem(rc.spec);
}

}  // namespace

TEST_CASE("discretization of P") {
  const Transcription tr(example_p(), 2000);
  CHECK(tr.step() == doctest::Approx(0.002));
  CHECK(tr.state_lag() == 1000);
  CHECK(tr.control_lag() == 500);
  CHECK(tr.variables() == 2000);
  CHECK(tr.time(2000) == 4.0);
  const Transcription coarse(example_p(), 4);
  CHECK(coarse.step() == 1.0);
  CHECK(coarse.state_lag() == 2);
  CHECK(coarse.control_lag() == 1);
  CHECK_THROWS_AS(Transcription(example_p(), 3), IndivisibleStep);
  CHECK_THROWS_AS(Transcription(example_p(), 2), IndivisibleStep);
  CHECK_THROWS_AS(Transcription(example_p(), 0), std::invalid_argument);
}

TEST_CASE("coarse P states by hand") {
  // dt = 1: x_{j+1} = 2 x_j + x_{j-2} - 10 u_{j-1}, x = 1 for j <= 0.
  const Transcription tr(example_p(), 4);
  const Vector u = vec({0.1, 0.2, 0.3, 0.4});
  const auto x = tr.states(u);
  REQUIRE(x.size() == 7);
  CHECK(x[2] == vec({1.0}));
  CHECK(x[3][0] == doctest::Approx(3.0));
  CHECK(x[4][0] == doctest::Approx(6.0));
  CHECK(x[5][0] == doctest::Approx(11.0));
  CHECK(x[6][0] == doctest::Approx(22.0));
  const double cost = (1.0 + 3.0 + 6.0 + 11.0) + 100.0 * (0.01 + 0.04 + 0.09 + 0.16);
  CHECK(tr.cost(u) == doctest::Approx(cost));
  CHECK_THROWS_AS(tr.states(vec({0.0})), DimensionMismatch);
}

TEST_CASE("discrete adjoint gradient matches central differences on P") {
  const Transcription tr(example_p(), 200);
  Rng rng(2019);
  const Vector u = rng.vector(tr.variables(), 0.5);
  CHECK(gradient_error(tr, u, rng, 20) <= 1e-5);
}

TEST_CASE("discrete adjoint gradient on random problems") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    long M = 0;
    const DelayedProblem p = random_exact_problem(seed, M);
    const Transcription tr(p, M);
    Rng rng(seed);
    const Vector u = rng.vector(tr.variables(), 1.0);
    CAPTURE(seed);
    CHECK(gradient_error(tr, u, rng, 20) <= 1e-5);
  }
}

TEST_CASE("gradient of a pure control cost") {
  ProblemSpec spec = ProblemSpec::zeros(1, 1);
  spec.b = 1.0;
  spec.r = 0.5;
  spec.g0_quad = PolyMatrix::constant((Matrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
  const Transcription tr(to_problem(spec), 10);
  Vector u = Vector::LinSpaced(10, -1.0, 1.0);
  CHECK((tr.gradient(u) - 2.0 * u * tr.step()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("projection keeps controls in the region") {
  DelayedProblem p = example_p();
  p.region = ControlRegion::box(vec({-0.1}), vec({0.1}));
  const Transcription tr(p, 40);
  Rng rng(4);
  const Vector u = rng.vector(40, 1.0);
  const Vector pu = tr.project(u);
  CHECK(tr.project(pu) == pu);
  CHECK(pu.maxCoeff() <= 0.1);
  CHECK(pu.minCoeff() >= -0.1);
}

TEST_CASE("transcription of P approaches the optimum") {
  const auto start = std::chrono::steady_clock::now();
  const Solution sol = solve_transcription(example_p(), 2000);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 30.0);
  CHECK(sol.method == Method::transcription);
  CHECK(sol.diagnostics.converged);
  CHECK(sol.diagnostics.subintervals == 2000);
  CHECK(std::abs(sol.cost - 67.491786) / 67.491786 <= 0.01);
  CHECK(sol.adjoint.eval(4.0)[0] == 0.0);
  CHECK(std::abs(sol.adjoint.eval(2.0)[0] - (1.0 - std::exp(2.0))) < 0.05);
}

TEST_CASE("transcription error halves when the mesh is refined") {
  const double exact = example_p_reference().cost;
  const Solution coarse = solve_transcription(example_p(), 400);
  const Solution fine = solve_transcription(example_p(), 800);
  const double cost_ratio = std::abs(coarse.cost - exact) / std::abs(fine.cost - exact);
  const double control_ratio = control_gap_to_reference(coarse) / control_gap_to_reference(fine);
  CHECK(cost_ratio == doctest::Approx(2.0).epsilon(0.2));
  CHECK(control_ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("transcription optimum is stationary") {
  const Transcription tr(example_p(), 200);
  const Solution sol = solve_transcription(example_p(), 200);
  Vector u(200);
  for (long j = 0; j < 200; ++j) u[j] = sol.control.values()[j][0];
  CHECK(tr.gradient(u).cwiseAbs().maxCoeff() / tr.step() < 1e-5);
  CHECK(tr.cost(u) == doctest::Approx(sol.cost).epsilon(1e-14));
}

TEST_CASE("transcription with a box meets projected stationarity") {
  DelayedProblem p = example_p();
  p.region = ControlRegion::box(vec({0.0}), vec({0.2}));
  const Solution sol = solve_transcription(p, 400);
  const Transcription tr(p, 400);
  Vector u(400);
  for (long j = 0; j < 400; ++j) u[j] = sol.control.values()[j][0];
  const Vector g = tr.gradient(u) / tr.step();
  CHECK((u - tr.project(u - g)).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(u.maxCoeff() <= 0.2);
  CHECK(u.minCoeff() >= 0.0);
}

TEST_CASE("zero problem is solved at the first iterate") {
  ProblemSpec spec = ProblemSpec::zeros(2, 1);
  spec.b = 1.0;
  spec.r = 0.25;
  spec.s = 0.5;
  const Solution sol = solve_transcription(to_problem(spec), 20);
  CHECK(sol.cost == 0.0);
  CHECK(sol.diagnostics.iterations == 1);
  CHECK(sol.diagnostics.converged);
}

TEST_CASE("transcription gives up with the last iterate") {
  DescentOptions options;
  options.max_iters = 1;
  try {
    solve_transcription(example_p(), 200, options);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.last_iterate().diagnostics.iterations == 1);
    CHECK(e.last_iterate().method == Method::transcription);
  }
}

TEST_CASE("transcription and sweep agree on LQ problems") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const DelayedProblem p = lq_no_delay(2, 2, {0.0, 1.0}, seed);
    const Solution a = sweep(p, {}, IntegratorConfig{Scheme::rk4, 1e-3, Quadrature::simpson});
    const Solution b = solve_transcription(p, 2000);
    CAPTURE(seed);
    CHECK(std::abs(a.cost - b.cost) <= 1e-3 * (1.0 + std::abs(a.cost)));
    CHECK(compare(a, b, p.horizon).control_gap <= 1e-3);
  }
}

TEST_CASE("comparison of a solution with itself is zero") {
  const Solution sol = solve_transcription(example_p(), 200);
  const ComparisonReport report = compare(sol, sol, example_p().horizon);
  CHECK(report.cost_gap == 0.0);
  CHECK(report.control_gap == 0.0);
  CHECK(report.state_gap == 0.0);
  CHECK(report.grid.size() == 201);
  CHECK(report.summary().find("cost_gap=0") != std::string::npos);
  CHECK(report.table().rfind("t,u_a1,u_b1,x_a1,x_b1\n", 0) == 0);
}

TEST_CASE("sweep and transcription compare on the coarser grid") {
  const Solution a = sweep(example_p(), {}, IntegratorConfig{});
  const Solution b = solve_transcription(example_p(), 2000);
  const ComparisonReport report = compare(a, b, example_p().horizon);
  CHECK(report.grid.size() == 2001);
  CHECK(report.cost_gap == doctest::Approx(std::abs(a.cost - b.cost)));
  CHECK(report.cost_gap <= 0.7);
}
