#pragma once

#include <vector>

#include "wbc/constraint/constraint.hpp"
#include "wbc/control/command.hpp"
#include "wbc/linalg.hpp"
#include "wbc/rbd/model.hpp"
#include "wbc/rbd/state.hpp"
#include "wbc/task/compound_task.hpp"

namespace wbc::control {

enum class ComputeStatus { Ok, NoTasks, InvalidTask };

struct ComputeResult {
  ComputeStatus status = ComputeStatus::Ok;
  int invalidTask = -1;  // compound-task entry index when status is InvalidTask
  bool ok() const { return status == ComputeStatus::Ok; }
};

/// Prioritized whole-body torque controller.
///
/// Levels are processed in ascending priority number. With Phi and UNcBar from
/// the constraint projection, level k contributes
///   Jt_k  = J_k UNcBar P_{k-1}
///   F_k   = (Jt_k Phi Jt_k^T)^+ xdd_k
///   tau  += Jt_k^T F_k
///   P_k   = P_{k-1} - P_{k-1} Phi Jt_k^T (Jt_k Phi Jt_k^T)^+ Jt_k
/// after which UNcBar^T (B + G) and Lstar^T internalForce are added.
/// All workspaces are sized by configure(); compute() does not allocate.
class Wbosc {
 public:
  Wbosc(const rbd::RobotModel& model, const task::CompoundTask& tasks, double tolerance = kDefaultPinvTolerance);
  virtual ~Wbosc() = default;

  /// Resizes level workspaces after a priority change.
  void configure(const task::CompoundTask& tasks);
  void setTolerance(double tolerance);

  /// 1 keeps a joint's gravity compensation, 0 drops it.
  void setGravityCompensationMask(const Vector& mask);
  const Vector& gravityCompensationMask() const { return gravityMask_; }
  void setInternalForceReference(const Vector& reference);
  const Vector& internalForceReference() const { return internalForce_; }

  /// Effort into command.effort; position and velocity copy the measured state.
  virtual ComputeResult compute(const rbd::RobotModel& model, const constraint::ConstraintProjection& constraints,
                                const task::CompoundTask& tasks, const rbd::RobotState& measured, double dt,
                                Command& command);

  /// Torque-only part of compute().
  ComputeResult computeTorque(const rbd::RobotModel& model, const constraint::ConstraintProjection& constraints,
                              const task::CompoundTask& tasks);
  const Vector& torque() const { return tau_; }

  /// Masked UNcBar^T G from the last compute.
  const Vector& gravityTorque() const { return gravityTorque_; }

  // Ladder internals from the last compute, for analysis and tests.
  int levelCount() const { return static_cast<int>(levels_.size()); }
  const Matrix& projectedJacobian(int level) const { return levels_[level].projected; }
  int levelRows(int level) const { return levels_[level].rows; }
  /// P_k after processing level k; the last level's projector is not computed.
  const Matrix& projector(int level) const { return levels_[level].projector; }

 private:
  struct Level {
    int rows = 0;
    Matrix jacobian;        // r x n aggregate
    Vector command;         // r
    Matrix contactJacobian; // r x m: J UNcBar
    Matrix projected;       // r x m: J UNcBar P_{k-1}
    Matrix phiJt;           // m x r
    Matrix weighted;        // r x r
    Matrix inertia;         // r x r (pseudo-inverse of weighted)
    Vector force;           // r
    Matrix pPhiJt;          // m x r
    Matrix gain;            // m x r
    Matrix projector;       // m x m
    SquarePseudoInverse pinv;
  };

  int joints_;
  int dofs_;
  double tolerance_;
  std::vector<Level> levels_;
  Vector tau_, gravityTorque_, gravityMask_, internalForce_, biasTorque_;
};

/// WBOSC plus an internal joint model that turns torques into expected
/// joint positions and velocities for joint-level impedance control.
class WboscImpedance : public Wbosc {
 public:
  WboscImpedance(const rbd::RobotModel& model, const task::CompoundTask& tasks, double relaxation = 0.05,
                 double tolerance = kDefaultPinvTolerance);

  void setRelaxation(double alpha) { relaxation_ = alpha; }
  void setPositionGains(const Vector& kp, const Vector& kd);
  /// Forces re-initialization from the next measured state.
  void reset() { initialized_ = false; }

  ComputeResult compute(const rbd::RobotModel& model, const constraint::ConstraintProjection& constraints,
                        const task::CompoundTask& tasks, const rbd::RobotState& measured, double dt,
                        Command& command) override;

  const Vector& internalPosition() const { return position_; }
  const Vector& internalVelocity() const { return velocity_; }

 private:
  double relaxation_;
  bool initialized_ = false;
  Vector position_, velocity_, kp_, kd_;
  Vector generalizedForce_, accelerationFull_, scratch_, acceleration_;
};

}  // namespace wbc::control
