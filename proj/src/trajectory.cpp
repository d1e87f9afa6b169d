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

#include "dloc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dloc/errors.hpp"

namespace dloc {

double time_tolerance(double t) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
}

Trajectory::Trajectory(std::vector<double> grid, std::vector<Vector> values, Interp interp)
    : Trajectory(Parts{std::move(grid), std::move(values), interp, {}, {}, {}}) {}

Trajectory::Trajectory(Parts parts)
    : grid_(std::move(parts.grid)),
      values_(std::move(parts.values)),
      interp_(parts.interp),
      left_limits_(std::move(parts.left_limits)),
      slopes_right_(std::move(parts.slopes_right)),
      slopes_left_(std::move(parts.slopes_left)) {
  if (grid_.empty()) throw std::invalid_argument("trajectory needs at least one sample");
  if (values_.size() != grid_.size()) {
    throw DimensionMismatch("trajectory has " + std::to_string(values_.size()) + " values for " +
                            std::to_string(grid_.size()) + " sample times");
  }
  dim_ = static_cast<int>(values_.front().size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i])) throw NonFinite("trajectory sample time is not finite");
    if (i > 0 && !(grid_[i] > grid_[i - 1])) {
      throw std::invalid_argument("trajectory grid must be strictly increasing");
    }
    if (values_[i].size() != dim_) throw DimensionMismatch("trajectory values differ in size");
    if (!values_[i].allFinite()) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "trajectory value at t=" << grid_[i] << " is not finite";
      throw NonFinite(msg.str());
    }
  }
  for (const auto& [index, value] : left_limits_) {
    if (index >= grid_.size() || value.size() != dim_) {
      throw DimensionMismatch("trajectory left limit does not match the grid");
    }
    if (!value.allFinite()) throw NonFinite("trajectory left limit is not finite");
  }
  const bool has_right = !slopes_right_.empty();
  const bool has_left = !slopes_left_.empty();
  if (has_right != has_left ||
      (has_right && (slopes_right_.size() != grid_.size() || slopes_left_.size() != grid_.size()))) {
    throw DimensionMismatch("trajectory slopes must be given for every node on both sides");
  }
}

bool Trajectory::covers(double t0, double t1) const {
  return t0 >= grid_.front() - time_tolerance(grid_.front()) &&
         t1 <= grid_.back() + time_tolerance(grid_.back());
}

long Trajectory::find_node(double t) const {
  const auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
  const double tol = time_tolerance(t);
  if (it != grid_.end() && std::abs(*it - t) <= tol) return static_cast<long>(it - grid_.begin());
  if (it != grid_.begin() && std::abs(*(it - 1) - t) <= tol) {
    return static_cast<long>(it - grid_.begin()) - 1;
  }
  return -1;
}

const Vector& Trajectory::left_value(std::size_t i) const {
  const auto it = left_limits_.find(i);
  return it == left_limits_.end() ? values_[i] : it->second;
}

Vector Trajectory::eval(double t, Side side) const {
  if (!covers(t, t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time " << t << " outside trajectory window [" << grid_.front() << ", " << grid_.back()
        << "]";
    throw CoverageError(msg.str());
  }
  const long node = find_node(t);
  if (node >= 0) {
    const auto i = static_cast<std::size_t>(node);
    return side == Side::left ? left_value(i) : values_[i];
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  return interpolate(static_cast<std::size_t>(it - grid_.begin()) - 1, t);
}

Vector Trajectory::interpolate(std::size_t i, double t) const {
  const double t0 = grid_[i];
  const double t1 = grid_[i + 1];
  const double width = t1 - t0;
  const double s = (t - t0) / width;
  const Vector& p0 = values_[i];
  const Vector& p1 = left_value(i + 1);
  if (interp_ == Interp::linear) return p0 + s * (p1 - p0);

  const Vector m0 = has_slopes() ? slopes_right_[i] : estimated_slope(i, true);
  const Vector m1 = has_slopes() ? slopes_left_[i + 1] : estimated_slope(i + 1, false);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * p0 + h10 * width * m0 + h01 * p1 + h11 * width * m1;
}

// Three-point slope estimate that never differentiates across a stored jump.
Vector Trajectory::estimated_slope(std::size_t i, bool right) const {
  const std::size_t last = grid_.size() - 1;
  auto jump_at = [&](std::size_t k) { return left_limits_.count(k) > 0; };

  if (right) {
    // Slope at the start of interval [i, i+1].
    const double h2 = grid_[i + 1] - grid_[i];
    const Vector& p1 = left_value(i + 1);
    if (i > 0 && !jump_at(i)) {
      const double h1 = grid_[i] - grid_[i - 1];
      return -h2 / (h1 * (h1 + h2)) * values_[i - 1] + (h2 - h1) / (h1 * h2) * values_[i] +
             h1 / (h2 * (h1 + h2)) * p1;
    }
    if (i + 2 <= last && !jump_at(i + 1)) {
      const double h3 = grid_[i + 2] - grid_[i + 1];
      return -(2 * h2 + h3) / (h2 * (h2 + h3)) * values_[i] + (h2 + h3) / (h2 * h3) * p1 -
             h2 / (h3 * (h2 + h3)) * left_value(i + 2);
    }
    return (p1 - values_[i]) / h2;
  }

  // Slope at the end of interval [i-1, i].
  const double h1 = grid_[i] - grid_[i - 1];
  const Vector& p1 = left_value(i);
  if (i < last && !jump_at(i)) {
    const double h2 = grid_[i + 1] - grid_[i];
    return -h2 / (h1 * (h1 + h2)) * values_[i - 1] + (h2 - h1) / (h1 * h2) * p1 +
           h1 / (h2 * (h1 + h2)) * left_value(i + 1);
  }
  if (i >= 2 && !jump_at(i - 1)) {
    const double h0 = grid_[i - 1] - grid_[i - 2];
    return h1 / (h0 * (h0 + h1)) * values_[i - 2] - (h0 + h1) / (h0 * h1) * values_[i - 1] +
           (2 * h1 + h0) / (h1 * (h0 + h1)) * p1;
  }
  return (p1 - values_[i - 1]) / h1;
}

Trajectory::Parts Trajectory::parts() const {
  return Parts{grid_, values_, interp_, left_limits_, slopes_right_, slopes_left_};
}

double sup_distance(const Trajectory& lhs, const Trajectory& rhs) {
  if (lhs.size() != rhs.size() || lhs.dim() != rhs.dim()) {
    throw DimensionMismatch("trajectories are not sampled alike");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    worst = std::max(worst, (lhs.values()[i] - rhs.values()[i]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (lhs.left_value(i) - rhs.left_value(i)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Trajectory blend(const Trajectory& previous, const Trajectory& next, double lambda) {
  if (lambda == 1.0) return next;
  Trajectory::Parts parts = next.parts();
  for (std::size_t i = 0; i < parts.values.size(); ++i) {
    parts.values[i] = (1.0 - lambda) * previous.values()[i] + lambda * next.values()[i];
  }
  parts.left_limits.clear();
  for (std::size_t i = 0; i < parts.values.size(); ++i) {
    if (previous.left_limits().count(i) || next.left_limits().count(i)) {
      parts.left_limits.emplace(i, (1.0 - lambda) * previous.left_value(i) +
                                       lambda * next.left_value(i));
    }
  }
  return Trajectory(std::move(parts));
}

}  // namespace dloc
