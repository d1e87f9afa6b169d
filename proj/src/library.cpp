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

#include "dloc/library.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dloc {

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

double p_adjoint(double t) {
  const double e2 = std::exp(2.0);
  if (t <= 2.0) return std::exp(2.0 - t) * (t - e2 - 1.0);
  if (t <= 4.0) return 1.0 - std::exp(4.0 - t);
  return 0.0;
}

double p_control(double t) {
  if (t < 1.0) return (std::exp(3.0 - t) - std::exp(1.0 - t) * t) / 20.0;
  if (t <= 3.0) return (std::exp(3.0 - t) - 1.0) / 20.0;
  return 0.0;
}

double p_state(double t) {
  const double e2 = std::exp(2.0);
  const double e4 = e2 * e2;
  const double e6 = e4 * e2;
  const double em2 = 1.0 / e2;
  if (t <= 0.0) return 1.0;
  if (t <= 1.0) return -1.0 + 2.0 * std::exp(t);
  if (t <= 2.0) {
    return ((e2 + 2.0 * e4 - 2.0 * e2 * t) * std::exp(-t) - 8.0 + (17.0 - 2.0 * e2) * std::exp(t)) /
           8.0;
  }
  if (t <= 3.0) {
    return (2.0 * std::exp(4.0 - t) + 4.0 + (-47.0 * em2 + 17.0 - 2.0 * e2 + 16.0 * em2 * t) * std::exp(t)) /
           8.0;
  }
  return ((-e6 + e4 * t) * std::exp(-t) + 4.0 +
          (-51.0 * em2 + 24.0 - 2.0 * e2 + 17.0 * em2 * t - 2.0 * t) * std::exp(t)) /
         8.0;
}

}  // namespace

DelayedProblem example_p() {
  DelayedProblem p;
  p.name = "P";
  p.n = 1;
  p.m = 1;
  p.A = [](double) { return scalar_matrix(1.0); };
  p.A_D = [](double) { return scalar_matrix(1.0); };
  p.g = [](double, const Vector&) { return scalar(0.0); };
  p.g_D = [](double, const Vector& v) { return Vector(-10.0 * v); };
  p.f0 = [](double, const Vector& x, const Vector&) { return x[0]; };
  p.d2_f0 = [](double, const Vector&, const Vector&) { return scalar(1.0); };
  p.d3_f0 = [](double, const Vector&, const Vector&) { return scalar(0.0); };
  p.g0 = [](double, const Vector& u, const Vector&) { return 100.0 * u[0] * u[0]; };
  p.d2_g0 = [](double, const Vector& u, const Vector&) { return Vector(200.0 * u); };
  p.d3_g0 = [](double, const Vector&, const Vector&) { return scalar(0.0); };
  p.dg_du = [](double, const Vector&) { return scalar_matrix(0.0); };
  p.dgD_dv = [](double, const Vector&) { return scalar_matrix(-10.0); };
  p.phi = [](double) { return scalar(1.0); };
  p.psi = [](double) { return scalar(0.0); };
  p.horizon = {0.0, 4.0};
  p.delays = {2.0, 1.0};
  p.region = ControlRegion::whole_space(1);
  return p;
}

ReferenceSolution example_p_reference() {
  const double e2 = std::exp(2.0);
  const double e4 = e2 * e2;
  ReferenceSolution ref;
  ref.control = [](double t) { return scalar(p_control(t)); };
  ref.state = [](double t) { return scalar(p_state(t)); };
  ref.adjoint = [](double t) { return scalar(p_adjoint(t)); };
  ref.cost = (23.0 + e2 + 34.0 * e4 - 2.0 * e4 * e2) / 16.0;
  return ref;
}

ProblemSpec example_p_spec() {
  ProblemSpec spec = ProblemSpec::zeros(1, 1);
  spec.name = "P";
  spec.a = 0.0;
  spec.b = 4.0;
  spec.r = 2.0;
  spec.s = 1.0;
  spec.A.at(0, 0).coeffs = {1.0};
  spec.A_D.at(0, 0).coeffs = {1.0};
  spec.gD_B.at(0, 0).coeffs = {-10.0};
  spec.f0_x.at(0, 0).coeffs = {1.0};
  spec.g0_quad.at(0, 0).coeffs = {100.0};
  spec.phi.at(0, 0).coeffs = {1.0};
  return spec;
}

ProblemSpec lq_no_delay_spec(int n, int m, TimeHorizon horizon, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be at least 1");
  if (!(horizon.b > horizon.a)) throw std::invalid_argument("horizon needs b > a");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_matrix = [&](int rows, int cols) {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) out(i, j) = unit(rng);
    }
    return out;
  };

  ProblemSpec spec = ProblemSpec::zeros(n, m);
  spec.name = "lq_no_delay";
  spec.a = horizon.a;
  spec.b = horizon.b;
  spec.r = horizon.length() / 10.0;
  spec.s = spec.r;
  spec.A = PolyMatrix::constant(-Matrix::Identity(n, n) + 0.3 * random_matrix(n, n));
  spec.g_B = PolyMatrix::constant(random_matrix(n, m));
  const Matrix L = 0.5 * random_matrix(n, n);
  const Matrix Q = L * L.transpose() + 0.5 * Matrix::Identity(n, n);
  const Matrix K = 0.5 * random_matrix(m, m);
  const Matrix R = K * K.transpose() + Matrix::Identity(m, m);
  Matrix f0_quad = Matrix::Zero(2 * n, 2 * n);
  f0_quad.topLeftCorner(n, n) = 0.5 * Q;
  Matrix g0_quad = Matrix::Zero(2 * m, 2 * m);
  g0_quad.topLeftCorner(m, m) = 0.5 * R;
  spec.f0_quad = PolyMatrix::constant(f0_quad);
  spec.g0_quad = PolyMatrix::constant(g0_quad);
  spec.f0_x = PolyMatrix::constant(random_matrix(n, 1));
  spec.phi = PolyMatrix::constant(random_matrix(n, 1));
  return spec;
}

DelayedProblem lq_no_delay(int n, int m, TimeHorizon horizon, std::uint64_t seed) {
  return to_problem(lq_no_delay_spec(n, m, horizon, seed));
}

}  // namespace dloc
