#pragma once

#include <limits>

#include "wbc/common.hpp"

namespace wbc::task {

struct PidGains {
  Vector kp, ki, kd;
  /// Bound on |integral| per dimension; +inf disables clamping.
  Vector integratorLimit;

  static PidGains uniform(int dimension, double kp, double ki, double kd,
                          double limit = std::numeric_limits<double>::infinity());
  int dimension() const { return static_cast<int>(kp.size()); }
  /// Throws on size mismatch or negative entries.
  void check(int dimension) const;
};

/// Task-space PID: out = kp*e + ki*clamp(integral) + kd*edot + ff (elementwise).
class PidController {
 public:
  explicit PidController(int dimension = 0) { resize(dimension); }

  void resize(int dimension) { integral_.setZero(dimension); }
  void reset() { integral_.setZero(); }
  const Vector& integral() const { return integral_; }

  /// Advances the integral by error*dt (clamped) and writes the command.
  void compute(const Vector& error, const Vector& errorDot, const Vector& feedforward, const PidGains& gains,
               double dt, Eigen::Ref<Vector> out);

 private:
  Vector integral_;
};

/// One-shot form with an explicit integral state.
Vector pidCommand(const Vector& error, const Vector& errorDot, const Vector& feedforward, const PidGains& gains,
                  double dt, Vector& integral);

}  // namespace wbc::task
