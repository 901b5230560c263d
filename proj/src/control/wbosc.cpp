#include "wbc/control/wbosc.hpp"

namespace wbc::control {

Wbosc::Wbosc(const rbd::RobotModel& model, const task::CompoundTask& tasks, double tolerance)
    : joints_(model.jointCount()), dofs_(model.dofCount()), tolerance_(tolerance) {
  tau_.setZero(joints_);
  gravityTorque_.setZero(joints_);
  gravityMask_.setOnes(joints_);
  internalForce_.setZero(joints_);
  biasTorque_.setZero(joints_);
  configure(tasks);
}

void Wbosc::configure(const task::CompoundTask& tasks) {
  levels_.clear();
  levels_.resize(tasks.levelCount());
  for (int k = 0; k < tasks.levelCount(); ++k) {
    Level& l = levels_[k];
    const int r = tasks.levelCapacity(k);
    l.jacobian.setZero(r, dofs_);
    l.command.setZero(r);
    l.contactJacobian.setZero(r, joints_);
    l.projected.setZero(r, joints_);
    l.phiJt.setZero(joints_, r);
    l.weighted.setZero(r, r);
    l.inertia.setZero(r, r);
    l.force.setZero(r);
    l.pPhiJt.setZero(joints_, r);
    l.gain.setZero(joints_, r);
    l.projector.setIdentity(joints_, joints_);
    l.pinv = SquarePseudoInverse(r, tolerance_);
  }
}

void Wbosc::setTolerance(double tolerance) {
  tolerance_ = tolerance;
  for (auto& l : levels_) l.pinv.setTolerance(tolerance);
}

void Wbosc::setGravityCompensationMask(const Vector& mask) {
  requireSize(mask.size(), joints_, "gravity_compensation_mask");
  gravityMask_ = mask;
}

void Wbosc::setInternalForceReference(const Vector& reference) {
  requireSize(reference.size(), joints_, "internal force reference");
  internalForce_ = reference;
}

ComputeResult Wbosc::computeTorque(const rbd::RobotModel&, const constraint::ConstraintProjection& constraints,
                                   const task::CompoundTask& tasks) {
  ComputeResult result;
  const Matrix& uncBar = constraints.actuationInverse();
  const Matrix& phi = constraints.phi();
  tau_.setZero();

  int total = 0;
  const Matrix* previous = nullptr;
  const int count = static_cast<int>(levels_.size());
  for (int k = 0; k < count; ++k) {
    Level& l = levels_[k];
    const auto aggregate = tasks.aggregate(k, l.jacobian, l.command);
    if (aggregate.invalidTask >= 0 && result.status == ComputeStatus::Ok) {
      result.status = ComputeStatus::InvalidTask;
      result.invalidTask = aggregate.invalidTask;
    }
    l.rows = aggregate.rows;
    total += l.rows;

    l.contactJacobian.noalias() = l.jacobian * uncBar;
    if (previous) {
      l.projected.noalias() = l.contactJacobian * *previous;
    } else {
      l.projected = l.contactJacobian;
    }
    l.phiJt.noalias() = phi * l.projected.transpose();
    l.weighted.noalias() = l.projected * l.phiJt;
    l.pinv.compute(l.weighted, l.inertia);
    l.force.noalias() = l.inertia * l.command;
    tau_.noalias() += l.projected.transpose() * l.force;

    if (k + 1 < count) {
      if (previous) {
        l.pPhiJt.noalias() = *previous * l.phiJt;
        l.projector = *previous;
      } else {
        l.pPhiJt = l.phiJt;
        l.projector.setIdentity();
      }
      l.gain.noalias() = l.pPhiJt * l.inertia;
      l.projector.noalias() -= l.gain * l.projected;
      previous = &l.projector;
    }
  }
  if (total == 0 && result.status == ComputeStatus::Ok) result.status = ComputeStatus::NoTasks;

  gravityTorque_ = constraints.projectedGravity().cwiseProduct(gravityMask_);
  tau_ += constraints.projectedCoriolis();
  tau_ += gravityTorque_;
  tau_.noalias() += constraints.internalForceProjector().transpose() * internalForce_;
  return result;
}

ComputeResult Wbosc::compute(const rbd::RobotModel& model, const constraint::ConstraintProjection& constraints,
                             const task::CompoundTask& tasks, const rbd::RobotState& measured, double,
                             Command& command) {
  const ComputeResult result = computeTorque(model, constraints, tasks);
  command.effort = tau_;
  command.position = measured.position;
  command.velocity = measured.velocity;
  command.positionKp.setZero();
  command.positionKd.setZero();
  return result;
}

WboscImpedance::WboscImpedance(const rbd::RobotModel& model, const task::CompoundTask& tasks, double relaxation,
                               double tolerance)
    : Wbosc(model, tasks, tolerance), relaxation_(relaxation) {
  const int m = model.jointCount();
  const int n = model.dofCount();
  position_.setZero(m);
  velocity_.setZero(m);
  kp_.setZero(m);
  kd_.setZero(m);
  generalizedForce_.setZero(n);
  accelerationFull_.setZero(n);
  scratch_.setZero(n);
  acceleration_.setZero(m);
}

void WboscImpedance::setPositionGains(const Vector& kp, const Vector& kd) {
  requireSize(kp.size(), kp_.size(), "position_kp");
  requireSize(kd.size(), kd_.size(), "position_kd");
  kp_ = kp;
  kd_ = kd;
}

ComputeResult WboscImpedance::compute(const rbd::RobotModel& model, const constraint::ConstraintProjection& constraints,
                                      const task::CompoundTask& tasks, const rbd::RobotState& measured, double dt,
                                      Command& command) {
  const ComputeResult result = computeTorque(model, constraints, tasks);
  if (!initialized_) {
    position_ = measured.position;
    velocity_ = measured.velocity;
    initialized_ = true;
  }
  // Constrained forward dynamics of the commanded torque: qdd = N_c Ainv (U^T tau - B - G).
  generalizedForce_.noalias() = model.underactuation().transpose() * torque();
  generalizedForce_ -= model.coriolis();
  generalizedForce_ -= model.gravityForces();
  scratch_.noalias() = model.massMatrixInverse() * generalizedForce_;
  accelerationFull_.noalias() = constraints.nullspace() * scratch_;
  acceleration_.noalias() = model.underactuation() * accelerationFull_;

  velocity_ += acceleration_ * dt;
  position_ += velocity_ * dt;
  position_ += relaxation_ * (measured.position - position_);
  velocity_ += relaxation_ * (measured.velocity - velocity_);

  command.effort = torque();
  command.position = position_;
  command.velocity = velocity_;
  command.positionKp = kp_;
  command.positionKd = kd_;
  return result;
}

}  // namespace wbc::control
