#include "wbc/task/spline.hpp"

#include <algorithm>

namespace wbc::task {

TrajectorySpline::TrajectorySpline(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  const std::size_t n = waypoints_.size();
  if (n < 2) throw ValidationError("a spline needs at least two waypoints");
  const auto dim = waypoints_.front().value.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(waypoints_[i].time > waypoints_[i - 1].time)) throw ValidationError("waypoint times must be strictly increasing");
    requireSize(waypoints_[i].value.size(), dim, "waypoint");
  }

  // Tridiagonal system for the knot moments M:
  //   2 h0 M0 + h0 M1 = 6 ((y1 - y0)/h0 - v0)
  //   h_{i-1} M_{i-1} + 2 (h_{i-1} + h_i) M_i + h_i M_{i+1} = 6 (slope_i - slope_{i-1})
  //   h M_{n-2} + 2 h M_{n-1} = 6 (v_end - slope_{n-2})
  // with v0 = v_end = 0, solved by the Thomas algorithm for all dimensions at once.
  std::vector<double> h(n - 1);
  std::vector<Vector> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = waypoints_[i + 1].time - waypoints_[i].time;
    slope[i] = (waypoints_[i + 1].value - waypoints_[i].value) / h[i];
  }
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
  std::vector<Vector> rhs(n);
  diag[0] = 2.0 * h[0];
  upper[0] = h[0];
  rhs[0] = 6.0 * slope[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lower[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i];
    rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
  }
  lower[n - 1] = h[n - 2];
  diag[n - 1] = 2.0 * h[n - 2];
  rhs[n - 1] = -6.0 * slope[n - 2];

  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  moments_.assign(n, Vector());
  moments_[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) moments_[i] = (rhs[i] - upper[i] * moments_[i + 1]) / diag[i];
}

SplineSample TrajectorySpline::evaluate(double t) const {
  t = std::clamp(t, startTime(), endTime());
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double value, const Waypoint& w) { return value < w.time; });
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - waypoints_.begin() - 1, 0));
  i = std::min(i, waypoints_.size() - 2);
  const double t0 = waypoints_[i].time, t1 = waypoints_[i + 1].time;
  const double h = t1 - t0;
  const double a = (t1 - t) / h, b = (t - t0) / h;
  const Vector& y0 = waypoints_[i].value;
  const Vector& y1 = waypoints_[i + 1].value;
  const Vector& m0 = moments_[i];
  const Vector& m1 = moments_[i + 1];
  SplineSample s;
  s.value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
  s.velocity = (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
  s.acceleration = a * m0 + b * m1;
  return s;
}

}  // namespace wbc::task
