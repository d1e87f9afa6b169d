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

#include <cmath>
#include <string>

#include "dloc/errors.hpp"
#include "dloc/library.hpp"
#include "dloc/spec_file.hpp"
#include "support/generators.hpp"

using namespace dloc;
using dloc::testing::Rng;

namespace {

const char* const kMinimal = R"([problem]
n = 1
m = 1
a = 0
b = 1
r = 0.5
s = 0

[dynamics]
A = [[-1]]

[history]
phi = [2]
)";

void check_error(const std::string& text, int line, int column, const std::string& fragment) {
  try {
    parse_spec(text);
    FAIL("expected a parse error for: " << text);
  } catch (const ParseError& e) {
    CAPTURE(e.what());
    CHECK(e.line() == line);
    CHECK(e.column() == column);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

double matrix_gap(const PolyMatrix& lhs, const PolyMatrix& rhs, double t) {
  const Matrix l = lhs(t), r = rhs(t);
  if (l.size() == 0 && r.size() == 0) return 0.0;
  return ((l - r).array().abs() / (1.0 + r.array().abs())).maxCoeff();
}

}  // namespace

TEST_CASE("polynomials evaluate by Horner") {
  const Polynomial p{{1.0, -3.0, 2.0}};
  CHECK(p(0.0) == 1.0);
  CHECK(p(2.0) == 3.0);
  CHECK(Polynomial{}(5.0) == 0.0);
}

TEST_CASE("minimal spec fills defaults") {
  const ProblemSpec s = parse_spec(kMinimal);
  CHECK(s.n == 1);
  CHECK(s.r == 0.5);
  CHECK(s.A(0.3)(0, 0) == -1.0);
  CHECK(s.phi(0.0)(0, 0) == 2.0);
  CHECK(s.A_D(0.0).isZero());
  CHECK(s.psi(0.0).isZero());
  CHECK_FALSE(s.box);
}

TEST_CASE("polynomial entries follow the grammar") {
  std::string text = kMinimal;
  text.replace(text.find("[[-1]]"), 6, "[[2*t^2 - 3*t + 1]]");
  text += "\n[cost]\nf0.x = [-t^3 + 0.5*t*t]  # comment\n";
  const ProblemSpec s = parse_spec(text);
  CHECK(s.A(2.0)(0, 0) == doctest::Approx(3.0));
  CHECK(s.A(0.5)(0, 0) == doctest::Approx(0.0));
  CHECK(s.f0_x(2.0)(0, 0) == doctest::Approx(-6.0));
}

TEST_CASE("box region with infinite bounds") {
  std::string text = kMinimal;
  text += "\n[control]\nregion = box\nlower = [-1]\nupper = [inf]\n";
  const ProblemSpec s = parse_spec(text);
  CHECK(s.box);
  CHECK(s.lower[0] == -1.0);
  CHECK(std::isinf(s.upper[0]));
  const DelayedProblem p = to_problem(s);
  CHECK(p.region.is_box());
  CHECK(p.region.project(Vector::Constant(1, -5.0))[0] == -1.0);
}

TEST_CASE("parse errors carry line and column") {
  check_error("[problem]\nn = 1\nm = 1\n[bogus]\n", 4, 1, "unknown section");
  check_error("[problem]\nn = 1\nm = 1\nq = 2\n", 4, 1, "unknown key");
  check_error("[problem]\nn = 1\nn = 2\n", 3, 1, "duplicate key");
  check_error("[problem]\nn = 1\nm = 1\na = 0\nb = 1\nr = 1\ns = 0\n[dynamics]\nA = [[1, 2]]\n", 9, 5,
              "expected a 1x1");
  check_error("[problem]\nn = 1\nm = x\n", 3, 5, "invalid number");
  check_error("[problem]\nn = 1\nm = 1\na = 0\nb = 1\nr = 1\ns = 0\n[dynamics]\nA = [[1]]\n", 10, 1,
              "missing key 'phi'");
  check_error("[problem]\nn = 1\nm = 1\na = 1\nb = 1\nr = 1\ns = 0\n[dynamics]\nA = [[1]]\n"
              "[history]\nphi = [1]\n",
              5, 1, "b > a");
  check_error("[dynamics]\nA = [[1]]\n", 1, 1, "must come before");
  check_error(std::string(kMinimal) + "[control]\nregion = whole\nlower = [0]\n", 16, 1,
              "bounds given");
  check_error(std::string(kMinimal) + "[control]\nregion = box\nlower = [1]\nupper = [0]\n", 17, 1,
              "lower > upper");
}

TEST_CASE("example P survives a text round trip") {
  const ProblemSpec p = example_p_spec();
  const std::string text = format_spec(p);
  CHECK(parse_spec(text) == p);
  CHECK(format_spec(parse_spec(text)) == text);
}

TEST_CASE("random specs survive a text round trip") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const ProblemSpec spec = dloc::testing::random_linear_case(seed).spec;
    const std::string text = format_spec(spec);
    const ProblemSpec back = parse_spec(text);
    CAPTURE(seed);
    CHECK(format_spec(back) == text);
    CHECK(back.n == spec.n);
    CHECK(back.a == spec.a);
    CHECK(back.b == spec.b);
    CHECK(back.r == spec.r);
    CHECK(back.s == spec.s);
    CHECK(back.box == spec.box);
    Rng rng(seed);
    for (int i = 0; i < 5; ++i) {
      const double t = rng.uniform(spec.a - 1.0, spec.b);
      for (auto member : {&ProblemSpec::A, &ProblemSpec::A_D, &ProblemSpec::g_B, &ProblemSpec::g_c,
                          &ProblemSpec::gD_B, &ProblemSpec::gD_c, &ProblemSpec::f0_x,
                          &ProblemSpec::f0_xr, &ProblemSpec::f0_quad, &ProblemSpec::g0_u,
                          &ProblemSpec::g0_us, &ProblemSpec::g0_quad, &ProblemSpec::phi,
                          &ProblemSpec::psi}) {
        CHECK(matrix_gap(back.*member, spec.*member, t) <= 1e-15);
      }
    }
  }
}

TEST_CASE("quadratic cost forms have the stated gradients") {
  const ProblemSpec spec = dloc::testing::random_linear_case(12, false).spec;
  const DelayedProblem p = to_problem(spec);
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const double t = rng.uniform(spec.a, spec.b);
    const Vector x = rng.vector(spec.n), y = rng.vector(spec.n);
    const Vector u = rng.vector(spec.m), v = rng.vector(spec.m);
    Vector z(2 * spec.n);
    z << x, y;
    const double f0 = spec.f0_x(t).col(0).dot(x) + spec.f0_xr(t).col(0).dot(y) +
                      z.dot(spec.f0_quad(t) * z);
    CHECK(p.f0(t, x, y) == doctest::Approx(f0).epsilon(1e-14));
    const auto fx = [&](const Vector& w) { return p.f0(t, w, y); };
    CHECK((p.d2_f0(t, x, y) - finite_difference_gradient(fx, x)).cwiseAbs().maxCoeff() < 1e-7);
    const auto gu = [&](const Vector& w) { return p.g0(t, w, v); };
    CHECK((p.d2_g0(t, u, v) - finite_difference_gradient(gu, u)).cwiseAbs().maxCoeff() < 1e-7);
    const auto gv = [&](const Vector& w) { return p.g0(t, u, w); };
    CHECK((p.d3_g0(t, u, v) - finite_difference_gradient(gv, v)).cwiseAbs().maxCoeff() < 1e-7);
    const Vector g = spec.g_B(t) * u + spec.g_c(t).col(0);
    CHECK((p.g(t, u) - g).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zeros spec has the requested shapes") {
  const ProblemSpec s = ProblemSpec::zeros(3, 2);
  CHECK(s.A.rows == 3);
  CHECK(s.A.cols == 3);
  CHECK(s.g_B.cols == 2);
  CHECK(s.f0_quad.rows == 6);
  CHECK(s.g0_quad.rows == 4);
  CHECK(s.phi.cols == 1);
}
