#include "wbc/task/tasks.hpp"

#include <cmath>

namespace wbc::task {

JointPositionTask::JointPositionTask(std::string name, const rbd::RobotModel& model, const PidGains& gains)
    : Task(std::move(name), "JointPositionTask", model.jointCount(), model.dofCount(), gains) {
  const int m = model.jointCount();
  Vector current(m);
  model.actualPositions(current);
  goalPosition_ = addInput("goalPosition", current);
  goalVelocity_ = addInput("goalVelocity", Vector::Zero(m));
  goalAcceleration_ = addInput("goalAcceleration", Vector::Zero(m));
  addOutput("currentAcceleration", m);
  position_.setZero(m);
  velocity_.setZero(m);
  error_.setZero(m);
  errorDot_.setZero(m);
}

void JointPositionTask::compute(const rbd::RobotModel& model, double dt, TaskState& state) {
  state.jacobian = model.underactuation();
  model.actualPositions(position_);
  model.actualVelocities(velocity_);
  error_ = input(goalPosition_) - position_;
  errorDot_ = input(goalVelocity_) - velocity_;
  pid(error_, errorDot_, input(goalAcceleration_), dt, state);
  state.error = error_;
  state.outputs[0] = input(goalAcceleration_);
}

CartesianPositionTask::CartesianPositionTask(std::string name, const rbd::RobotModel& model, std::string link,
                                             const Vector3& point, const PidGains& gains)
    : Task(std::move(name), "CartesianPositionTask", 3, model.dofCount(), gains),
      linkName_(std::move(link)),
      link_(model.linkIndex(linkName_)),
      point_(point) {
  goalPosition_ = addInput("goalPosition", model.pointPosition(link_, point_));
  goalVelocity_ = addInput("goalVelocity", Vector::Zero(3));
  goalAcceleration_ = addInput("goalAcceleration", Vector::Zero(3));
  addOutput("actualPosition", 3);
  error_.setZero(3);
  errorDot_.setZero(3);
}

void CartesianPositionTask::compute(const rbd::RobotModel& model, double dt, TaskState& state) {
  model.pointJacobian(link_, point_, state.jacobian);
  const Vector3 position = model.pointPosition(link_, point_);
  error_ = input(goalPosition_) - position;
  errorDot_.noalias() = -state.jacobian * model.qd();
  errorDot_ += input(goalVelocity_);
  pid(error_, errorDot_, input(goalAcceleration_), dt, state);
  state.error = error_;
  state.outputs[0] = position;
}

Vector3 quaternionError(const Eigen::Quaterniond& goal, const Eigen::Quaterniond& current) {
  Eigen::Quaterniond delta = goal * current.conjugate();
  if (delta.w() < 0.0) delta.coeffs() = -delta.coeffs();
  return 2.0 * delta.vec();
}

namespace {

Vector quaternionInput(const Eigen::Quaterniond& q) {
  Vector v(4);
  v << q.w(), q.x(), q.y(), q.z();
  return v;
}

}  // namespace

OrientationTask3D::OrientationTask3D(std::string name, const rbd::RobotModel& model, std::string link,
                                     const PidGains& gains)
    : Task(std::move(name), "OrientationTask3D", 3, model.dofCount(), gains),
      linkName_(std::move(link)),
      link_(model.linkIndex(linkName_)) {
  goalOrientation_ = addInput("goalOrientation", quaternionInput(Eigen::Quaterniond(model.linkRotation(link_))));
  goalAngularVelocity_ = addInput("goalAngularVelocity", Vector::Zero(3));
  spatial_.setZero(6, model.dofCount());
  error_.setZero(3);
  errorDot_.setZero(3);
  zero_.setZero(3);
}

void OrientationTask3D::compute(const rbd::RobotModel& model, double dt, TaskState& state) {
  const Vector& g = input(goalOrientation_);
  const Eigen::Quaterniond goal(g(0), g(1), g(2), g(3));
  if (std::abs(goal.norm() - 1.0) > 1e-6) {
    state.status = TaskStatus::InvalidGoal;
    return;
  }
  model.spatialJacobian(link_, spatial_);
  state.jacobian = spatial_.topRows(3);
  error_ = quaternionError(goal, Eigen::Quaterniond(model.linkRotation(link_)));
  errorDot_.noalias() = -state.jacobian * model.qd();
  errorDot_ += input(goalAngularVelocity_);
  pid(error_, errorDot_, zero_, dt, state);
  state.error = error_;
}

std::optional<HeadingError> headingError(const Vector3& heading, const Vector3& goal) {
  const Vector3 h = heading.normalized();
  const Vector3 g = goal.normalized();
  if ((h + g).norm() < 1e-9) return std::nullopt;
  Vector3 e1 = Vector3::UnitZ() - h.z() * h;
  if (e1.norm() < 1e-6) e1 = Vector3::UnitX() - h.x() * h;
  e1.normalize();
  HeadingError out;
  out.basis.col(0) = e1;
  out.basis.col(1) = h.cross(e1);
  out.error = out.basis.transpose() * (g - h);
  return out;
}

OrientationTask2D::OrientationTask2D(std::string name, const rbd::RobotModel& model, std::string link,
                                     const Vector3& bodyVector, const PidGains& gains)
    : Task(std::move(name), "OrientationTask2D", 2, model.dofCount(), gains),
      linkName_(std::move(link)),
      link_(model.linkIndex(linkName_)) {
  if (std::abs(bodyVector.norm() - 1.0) > 1e-6) throw ValidationError("bodyFrameVector must be a unit vector");
  goalVector_ = addInput("goalVector", model.linkRotation(link_) * bodyVector);
  bodyVector_ = addInput("bodyFrameVector", bodyVector);
  spatial_.setZero(6, model.dofCount());
  headingJacobian_.setZero(3, model.dofCount());
  error_.setZero(2);
  errorDot_.setZero(2);
  zero_.setZero(2);
}

void OrientationTask2D::compute(const rbd::RobotModel& model, double dt, TaskState& state) {
  const Vector& g = input(goalVector_);
  const Vector& b = input(bodyVector_);
  if (std::abs(g.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6) {
    state.status = TaskStatus::InvalidGoal;
    return;
  }
  const Vector3 heading = model.linkRotation(link_) * Vector3(b);
  const auto he = headingError(heading, Vector3(g));
  if (!he) {
    state.status = TaskStatus::Singular;
    return;
  }
  model.spatialJacobian(link_, spatial_);
  // d(heading)/dt = omega x heading = -[heading]x * omega
  headingJacobian_.noalias() = -skew(heading) * spatial_.topRows(3);
  state.jacobian.noalias() = he->basis.transpose() * headingJacobian_;
  error_ = he->error;
  errorDot_.noalias() = -state.jacobian * model.qd();
  pid(error_, errorDot_, zero_, dt, state);
  state.error = error_;
}

COMTask::COMTask(std::string name, const rbd::RobotModel& model, const PidGains& gains)
    : Task(std::move(name), "COMTask", 3, model.dofCount(), gains) {
  goalPosition_ = addInput("goalPosition", model.com());
  addOutput("actualPosition", 3);
  error_.setZero(3);
  errorDot_.setZero(3);
  zero_.setZero(3);
}

void COMTask::compute(const rbd::RobotModel& model, double dt, TaskState& state) {
  model.comJacobian(state.jacobian);
  const Vector3 com = model.com();
  error_ = input(goalPosition_) - com;
  errorDot_.noalias() = -state.jacobian * model.qd();
  pid(error_, errorDot_, zero_, dt, state);
  state.error = error_;
  state.outputs[0] = com;
}

}  // namespace wbc::task
