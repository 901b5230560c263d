#pragma once

#include <optional>

#include "wbc/task/task.hpp"

namespace wbc::task {

/// Posture control over all real joints. Jacobian is the selection matrix U.
class JointPositionTask : public Task {
 public:
  JointPositionTask(std::string name, const rbd::RobotModel& model, const PidGains& gains);

 protected:
  void compute(const rbd::RobotModel& model, double dt, TaskState& state) override;

 private:
  int goalPosition_, goalVelocity_, goalAcceleration_;
  Vector position_, velocity_, error_, errorDot_;
};

/// World-frame position of a point fixed in a link.
class CartesianPositionTask : public Task {
 public:
  CartesianPositionTask(std::string name, const rbd::RobotModel& model, std::string link, const Vector3& point,
                        const PidGains& gains);
  const std::string& link() const { return linkName_; }

 protected:
  void compute(const rbd::RobotModel& model, double dt, TaskState& state) override;

 private:
  std::string linkName_;
  int link_;
  Vector3 point_;
  int goalPosition_, goalVelocity_, goalAcceleration_;
  Vector error_, errorDot_;
};

/// 2 * vec(goal * current^-1), sign chosen for the shortest rotation.
Vector3 quaternionError(const Eigen::Quaterniond& goal, const Eigen::Quaterniond& current);

/// Full link orientation, goal given as a unit quaternion [w, x, y, z].
class OrientationTask3D : public Task {
 public:
  OrientationTask3D(std::string name, const rbd::RobotModel& model, std::string link, const PidGains& gains);
  const std::string& link() const { return linkName_; }

 protected:
  void compute(const rbd::RobotModel& model, double dt, TaskState& state) override;

 private:
  std::string linkName_;
  int link_;
  int goalOrientation_, goalAngularVelocity_;
  Matrix spatial_;
  Vector error_, errorDot_, zero_;
};

struct HeadingError {
  Eigen::Matrix<double, 3, 2> basis;  // orthonormal, perpendicular to the heading
  Eigen::Vector2d error;
};

/// Error of heading h toward goal g in the plane perpendicular to h.
/// Empty when h and g are anti-parallel.
std::optional<HeadingError> headingError(const Vector3& heading, const Vector3& goal);

/// Points a body-fixed vector along a world goal vector (2 DOF).
class OrientationTask2D : public Task {
 public:
  OrientationTask2D(std::string name, const rbd::RobotModel& model, std::string link, const Vector3& bodyVector,
                    const PidGains& gains);
  const std::string& link() const { return linkName_; }

 protected:
  void compute(const rbd::RobotModel& model, double dt, TaskState& state) override;

 private:
  std::string linkName_;
  int link_;
  int goalVector_, bodyVector_;
  Matrix spatial_;
  Eigen::Matrix<double, 3, Eigen::Dynamic> headingJacobian_;
  Vector error_, errorDot_, zero_;
};

/// Whole-robot center of mass position.
class COMTask : public Task {
 public:
  COMTask(std::string name, const rbd::RobotModel& model, const PidGains& gains);

 protected:
  void compute(const rbd::RobotModel& model, double dt, TaskState& state) override;

 private:
  int goalPosition_;
  Vector error_, errorDot_, zero_;
};

}  // namespace wbc::task
