#include "wbc/task/pid.hpp"

namespace wbc::task {

PidGains PidGains::uniform(int dimension, double kp, double ki, double kd, double limit) {
  return {Vector::Constant(dimension, kp), Vector::Constant(dimension, ki), Vector::Constant(dimension, kd),
          Vector::Constant(dimension, limit)};
}

void PidGains::check(int dimension) const {
  requireSize(kp.size(), dimension, "kp");
  requireSize(ki.size(), dimension, "ki");
  requireSize(kd.size(), dimension, "kd");
  requireSize(integratorLimit.size(), dimension, "integratorLimit");
  if ((kp.array() < 0).any() || (ki.array() < 0).any() || (kd.array() < 0).any() ||
      (integratorLimit.array() < 0).any()) {
    throw ValidationError("PID gains must be non-negative");
  }
}

void PidController::compute(const Vector& error, const Vector& errorDot, const Vector& feedforward,
                            const PidGains& gains, double dt, Eigen::Ref<Vector> out) {
  const auto n = integral_.size();
  requireSize(error.size(), n, "error");
  requireSize(errorDot.size(), n, "errorDot");
  requireSize(feedforward.size(), n, "feedforward");
  requireSize(out.size(), n, "command");
  // A non-finite error suppresses this cycle's command; keep it out of the
  // integral so the task recovers once its inputs do.
  if (error.allFinite()) integral_ += error * dt;
  integral_ = integral_.cwiseMax(-gains.integratorLimit).cwiseMin(gains.integratorLimit);
  out = gains.kp.cwiseProduct(error) + gains.ki.cwiseProduct(integral_) + gains.kd.cwiseProduct(errorDot) +
        feedforward;
}

Vector pidCommand(const Vector& error, const Vector& errorDot, const Vector& feedforward, const PidGains& gains,
                  double dt, Vector& integral) {
  if (dt <= 0.0) throw Error("pid dt must be positive");
  requireSize(gains.dimension(), error.size(), "gains");
  Vector state = integral.size() == error.size() ? integral : Vector::Zero(error.size());
  if (error.allFinite()) state += error * dt;
  state = state.cwiseMax(-gains.integratorLimit).cwiseMin(gains.integratorLimit);
  integral = state;
  requireSize(errorDot.size(), error.size(), "errorDot");
  requireSize(feedforward.size(), error.size(), "feedforward");
  return gains.kp.cwiseProduct(error) + gains.ki.cwiseProduct(state) + gains.kd.cwiseProduct(errorDot) + feedforward;
}

}  // namespace wbc::task
