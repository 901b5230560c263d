#pragma once

#include <vector>

#include "wbc/common.hpp"

namespace wbc::task {

struct Waypoint {
  double time = 0.0;
  Vector value;
};

struct SplineSample {
  Vector value, velocity, acceleration;
};

/// Clamped cubic spline through vector waypoints with zero end velocities.
class TrajectorySpline {
 public:
  /// Needs at least two waypoints with strictly increasing times and equal sizes.
  explicit TrajectorySpline(std::vector<Waypoint> waypoints);

  /// Time is clamped to the waypoint range.
  SplineSample evaluate(double t) const;
  double startTime() const { return waypoints_.front().time; }
  double endTime() const { return waypoints_.back().time; }
  int dimension() const { return static_cast<int>(waypoints_.front().value.size()); }

 private:
  std::vector<Waypoint> waypoints_;
  std::vector<Vector> moments_;  // second derivatives at the knots
};

}  // namespace wbc::task
