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

#include "dloc/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dloc {

ControlRegion ControlRegion::whole_space(int m) {
  const double inf = std::numeric_limits<double>::infinity();
  return ControlRegion(Kind::whole_space, Vector::Constant(m, -inf), Vector::Constant(m, inf));
}

ControlRegion ControlRegion::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("box bounds have different sizes");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw std::invalid_argument("box bound " + std::to_string(i) + " has lower > upper");
    }
  }
  return ControlRegion(Kind::box, std::move(lower), std::move(upper));
}

Vector ControlRegion::project(const Vector& u) const {
  if (kind_ == Kind::whole_space) return u;
  return u.cwiseMax(lower_).cwiseMin(upper_);
}

bool ControlRegion::contains(const Vector& u, double tol) const {
  if (u.size() != lower_.size()) return false;
  if (kind_ == Kind::whole_space) return u.allFinite();
  return ((u.array() >= lower_.array() - tol) && (u.array() <= upper_.array() + tol)).all();
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& fn, const Vector& z) {
  Vector grad(z.size());
  Vector probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double step = 1e-6 * (1.0 + std::abs(z[i]));
    probe[i] = z[i] + step;
    const double up = fn(probe);
    probe[i] = z[i] - step;
    const double down = fn(probe);
    probe[i] = z[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& z,
                                  int rows) {
  Matrix jac(rows, z.size());
  Vector probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double step = 1e-6 * (1.0 + std::abs(z[i]));
    probe[i] = z[i] + step;
    const Vector up = fn(probe);
    probe[i] = z[i] - step;
    const Vector down = fn(probe);
    probe[i] = z[i];
    jac.col(i) = (up - down) / (2.0 * step);
  }
  return jac;
}

Vector DelayedProblem::state_cost_dx(double t, const Vector& x, const Vector& y) const {
  if (d2_f0) return d2_f0(t, x, y);
  return finite_difference_gradient([&](const Vector& z) { return f0(t, z, y); }, x);
}

Vector DelayedProblem::state_cost_dy(double t, const Vector& x, const Vector& y) const {
  if (d3_f0) return d3_f0(t, x, y);
  return finite_difference_gradient([&](const Vector& z) { return f0(t, x, z); }, y);
}

Vector DelayedProblem::control_cost_du(double t, const Vector& u, const Vector& v) const {
  if (d2_g0) return d2_g0(t, u, v);
  return finite_difference_gradient([&](const Vector& z) { return g0(t, z, v); }, u);
}

Vector DelayedProblem::control_cost_dv(double t, const Vector& u, const Vector& v) const {
  if (d3_g0) return d3_g0(t, u, v);
  return finite_difference_gradient([&](const Vector& z) { return g0(t, u, z); }, v);
}

Matrix DelayedProblem::forcing_du(double t, const Vector& u) const {
  if (dg_du) return dg_du(t, u);
  return finite_difference_jacobian([&](const Vector& z) { return g(t, z); }, u, n);
}

Matrix DelayedProblem::delayed_forcing_dv(double t, const Vector& v) const {
  if (dgD_dv) return dgD_dv(t, v);
  return finite_difference_jacobian([&](const Vector& z) { return g_D(t, z); }, v, n);
}

std::string Violation::to_string() const {
  std::ostringstream out;
  out.precision(17);
  out << field << " @ t=" << time << ": " << message;
  return out.str();
}

namespace {

// Samples one time-callable, recording non-finite values, wrong sizes and
// jumps in t larger than the configured threshold.
class CallableProbe {
 public:
  CallableProbe(std::vector<Violation>& out, const ValidateOptions& options)
      : out_(out), options_(options) {}

  void probe(const std::string& field, const std::vector<double>& times, Eigen::Index rows,
             Eigen::Index cols, const std::function<Matrix(double)>& fn) {
    std::vector<double> sampled;
    double scale = 1.0;
    for (double t : times) {
      Matrix value;
      try {
        value = fn(t);
      } catch (const std::exception& e) {
        out_.push_back({field, t, std::string("evaluation threw: ") + e.what()});
        return;
      }
      if (value.rows() != rows || value.cols() != cols) {
        std::ostringstream msg;
        msg << "returned " << value.rows() << "x" << value.cols() << ", expected " << rows << "x"
            << cols;
        out_.push_back({field, t, msg.str()});
        return;
      }
      if (!value.allFinite()) {
        out_.push_back({field, t, "non-finite value"});
        return;
      }
      scale = std::max(scale, 1.0 + value.cwiseAbs().maxCoeff());
      sampled.push_back(t);
    }
    const double threshold = options_.jump_factor * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t i = 1; i + 1 < sampled.size(); ++i) {
      const double t = sampled[i];
      const double delta = 1e-12 * std::max(1.0, std::abs(t));
      Matrix jump;
      try {
        jump = fn(t + delta) - fn(t - delta);
      } catch (const std::exception&) {
        continue;
      }
      if (!jump.allFinite() || jump.cwiseAbs().maxCoeff() > threshold) {
        out_.push_back({field, t, "discontinuity in t above jump threshold"});
        return;
      }
    }
  }

 private:
  std::vector<Violation>& out_;
  const ValidateOptions& options_;
};

std::vector<double> uniform_samples(double lo, double hi, int count, bool include_hi) {
  std::vector<double> times;
  if (count < 2 || !(hi > lo)) {
    times.push_back(lo);
    return times;
  }
  const int intervals = include_hi ? count - 1 : count;
  for (int i = 0; i < count; ++i) times.push_back(lo + (hi - lo) * i / intervals);
  return times;
}

Vector probe_vector(int dim, double base) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = base * (i % 2 == 0 ? 1.0 : -0.5) / (1.0 + i);
  return v;
}

Matrix as_matrix(const Vector& v) { return Matrix(v); }
Matrix as_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

std::vector<Violation> validate(const DelayedProblem& p, const ValidateOptions& options) {
  std::vector<Violation> out;
  const double a = p.horizon.a;
  const double b = p.horizon.b;
  const double r = p.delays.r;
  const double s = p.delays.s;

  if (!(a < b)) out.push_back({"horizon", a, "requires a < b"});
  if (!(r >= 0.0) || !(s >= 0.0)) out.push_back({"delays", a, "delays must be nonnegative"});
  if (r == 0.0 && s == 0.0) out.push_back({"delays", a, "delays simultaneously zero"});
  if (p.n < 1) out.push_back({"n", a, "state dimension must be positive"});
  if (p.m < 1) out.push_back({"m", a, "control dimension must be positive"});
  if (p.region.dim() != p.m) out.push_back({"region", a, "region dimension differs from m"});

  const std::pair<const char*, bool> required[] = {
      {"A", static_cast<bool>(p.A)},     {"A_D", static_cast<bool>(p.A_D)},
      {"g", static_cast<bool>(p.g)},     {"g_D", static_cast<bool>(p.g_D)},
      {"f0", static_cast<bool>(p.f0)},   {"g0", static_cast<bool>(p.g0)},
      {"phi", static_cast<bool>(p.phi)}, {"psi", static_cast<bool>(p.psi)},
  };
  for (const auto& [field, present] : required) {
    if (!present) out.push_back({field, a, "callable missing"});
  }
  if (!out.empty()) return out;

  const int count = options.samples_per_interval;
  const auto main_times = uniform_samples(a, b, count, true);
  const auto phi_times = r > 0.0 ? uniform_samples(a - r, a, count, true) : std::vector<double>{a};
  const auto psi_times = s > 0.0 ? uniform_samples(a - s, a, count, false) : std::vector<double>{};

  CallableProbe probe(out, options);
  const int n = p.n;
  const int m = p.m;
  probe.probe("phi", phi_times, n, 1, [&](double t) { return as_matrix(p.phi(t)); });
  if (!psi_times.empty()) {
    probe.probe("psi", psi_times, m, 1, [&](double t) { return as_matrix(p.psi(t)); });
  }
  probe.probe("A", main_times, n, n, [&](double t) { return p.A(t); });
  probe.probe("A_D", main_times, n, n, [&](double t) { return p.A_D(t); });

  for (double base : {0.0, 0.75}) {
    const Vector x = probe_vector(n, base + 0.5);
    const Vector y = probe_vector(n, base - 0.25);
    const Vector u = p.region.project(probe_vector(m, base));
    const Vector v = p.region.project(probe_vector(m, -base));
    probe.probe("g", main_times, n, 1, [&](double t) { return as_matrix(p.g(t, u)); });
    probe.probe("g_D", main_times, n, 1, [&](double t) { return as_matrix(p.g_D(t, v)); });
    probe.probe("f0", main_times, 1, 1, [&](double t) { return as_matrix(p.f0(t, x, y)); });
    probe.probe("d2_f0", main_times, n, 1,
                [&](double t) { return as_matrix(p.state_cost_dx(t, x, y)); });
    probe.probe("d3_f0", main_times, n, 1,
                [&](double t) { return as_matrix(p.state_cost_dy(t, x, y)); });
    probe.probe("g0", main_times, 1, 1, [&](double t) { return as_matrix(p.g0(t, u, v)); });
  }
  return out;
}

}  // namespace dloc
