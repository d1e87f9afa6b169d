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

#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "dloc/problem.hpp"

namespace dloc {

enum class Interp { linear, cubic };

/// Which one-sided limit to take when a query lands on a sample time.
enum class Side { left, right };

/// Sampled vector-valued function of time.
///
/// Node values are right-continuous. A node may additionally carry a left
/// limit, which lets a trajectory represent jumps (controls switching at
/// block seams). Cubic interpolation is Hermite on each interval; when
/// node slopes are not supplied they are estimated from neighbouring nodes.
class Trajectory {
 public:
  struct Parts {
    std::vector<double> grid;
    std::vector<Vector> values;
    Interp interp = Interp::linear;
    std::map<std::size_t, Vector> left_limits;
    /// Either empty or one entry per node: derivative just right of the node.
    std::vector<Vector> slopes_right;
    /// Either empty or one entry per node: derivative just left of the node.
    std::vector<Vector> slopes_left;
  };

  explicit Trajectory(Parts parts);
  Trajectory(std::vector<double> grid, std::vector<Vector> values, Interp interp = Interp::linear);

  int dim() const { return dim_; }
  std::size_t size() const { return grid_.size(); }
  Interp interp() const { return interp_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Vector>& values() const { return values_; }
  const std::map<std::size_t, Vector>& left_limits() const { return left_limits_; }
  bool has_slopes() const { return !slopes_right_.empty(); }
  double front_time() const { return grid_.front(); }
  double back_time() const { return grid_.back(); }

  /// True when [t0, t1] lies inside the sampled window (node-snapping tolerance).
  bool covers(double t0, double t1) const;

  /// Value at t. Exact at nodes; Side::left returns the stored left limit.
  /// Throws CoverageError outside [front_time, back_time].
  Vector eval(double t, Side side = Side::right) const;

  /// Left limit at node i (equals the node value unless a jump is stored).
  const Vector& left_value(std::size_t i) const;

  /// Index of the node within snapping distance of t, or -1.
  long find_node(double t) const;

  /// Parts copy, for building modified trajectories.
  Parts parts() const;

 private:
  Vector interpolate(std::size_t i, double t) const;
  Vector estimated_slope(std::size_t i, bool right) const;

  std::vector<double> grid_;
  std::vector<Vector> values_;
  Interp interp_;
  std::map<std::size_t, Vector> left_limits_;
  std::vector<Vector> slopes_right_;
  std::vector<Vector> slopes_left_;
  int dim_ = 0;
};

/// Snapping tolerance used when comparing sample times.
double time_tolerance(double t);

/// Largest componentwise difference over nodes and left limits of two
/// trajectories sampled on the same grid.
double sup_distance(const Trajectory& lhs, const Trajectory& rhs);
/// Nodewise (1 - lambda) previous + lambda next, on next's grid.
Trajectory blend(const Trajectory& previous, const Trajectory& next, double lambda);

}  // namespace dloc
