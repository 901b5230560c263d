#include "wbc/constraint/constraint.hpp"

namespace wbc::constraint {

Matrix Constraint::jacobian(const rbd::RobotModel& model) const {
  Matrix out(rows_, model.dofCount());
  jacobian(model, inputs_, out);
  return out;
}

void Constraint::declareParameters(param::ParameterRegistry& registry) {
  registry.declare(name_, "enabled", &inputs_.enabled);
}

FlatContactConstraint::FlatContactConstraint(std::string name, const rbd::RobotModel& model, std::string link)
    : Constraint(std::move(name), "FlatContactConstraint", 6), linkName_(std::move(link)), link_(model.linkIndex(linkName_)) {}

void FlatContactConstraint::jacobian(const rbd::RobotModel& model, const ConstraintInputs&, Eigen::Ref<Matrix> out) const {
  model.spatialJacobian(link_, out);
}

PointContactConstraint::PointContactConstraint(std::string name, const rbd::RobotModel& model, std::string link,
                                               const Vector3& point)
    : Constraint(std::move(name), "PointContactConstraint", 3),
      linkName_(std::move(link)),
      link_(model.linkIndex(linkName_)),
      point_(point) {}

void PointContactConstraint::jacobian(const rbd::RobotModel& model, const ConstraintInputs&, Eigen::Ref<Matrix> out) const {
  model.pointJacobian(link_, point_, out);
}

CoactuationConstraint::CoactuationConstraint(std::string name, const rbd::RobotModel& model, std::string master,
                                             std::string slave, double ratio)
    : Constraint(std::move(name), "CoactuationConstraint", 1), master_(std::move(master)), slave_(std::move(slave)) {
  if (master_ == slave_) throw ValidationError("coactuation master and slave must differ ('" + master_ + "')");
  masterDof_ = model.dofIndex(master_);
  slaveDof_ = model.dofIndex(slave_);
  inputs_.ratio = ratio;
}

void CoactuationConstraint::jacobian(const rbd::RobotModel&, const ConstraintInputs& inputs, Eigen::Ref<Matrix> out) const {
  out.setZero();
  out(0, slaveDof_) = 1.0;
  out(0, masterDof_) = -inputs.ratio;
}

void CoactuationConstraint::declareParameters(param::ParameterRegistry& registry) {
  Constraint::declareParameters(registry);
  registry.declare(name(), "transmissionRatio", &inputs_.ratio);
}

Constraint& ConstraintSet::add(std::unique_ptr<Constraint> constraint, bool enabled) {
  if (find(constraint->name())) throw ValidationError("duplicate constraint '" + constraint->name() + "'");
  constraint->setEnabled(enabled);
  capacity_ += constraint->rows();
  constraints_.push_back(std::move(constraint));
  return *constraints_.back();
}

Constraint* ConstraintSet::find(std::string_view name) const {
  for (const auto& c : constraints_) {
    if (c->name() == name) return c.get();
  }
  return nullptr;
}

bool ConstraintSet::isConstrained(std::string_view joint) const {
  for (const auto& c : constraints_) {
    if (c->enabled() && c->constrainsJoint(joint)) return true;
  }
  return false;
}

void ConstraintSet::latch(std::vector<ConstraintInputs>& out) const {
  out.resize(constraints_.size());
  for (std::size_t i = 0; i < constraints_.size(); ++i) out[i] = constraints_[i]->inputs();
}

void ConstraintSet::declareParameters(param::ParameterRegistry& registry) {
  for (auto& c : constraints_) c->declareParameters(registry);
}

ConstraintProjection::ConstraintProjection(const rbd::RobotModel& model, const ConstraintSet& set, double tolerance) {
  const int n = model.dofCount();
  const int m = model.jointCount();
  const int rows = set.capacity();
  jc_.setZero(rows, n);
  jcBar_.setZero(n, rows);
  nc_.setIdentity(n, n);
  unc_.setZero(m, n);
  phi_.setZero(m, m);
  uncBar_.setZero(n, m);
  lstar_.setZero(m, m);
  projectedGravity_.setZero(m);
  projectedCoriolis_.setZero(m);
  contactInverse_ = DynamicallyConsistentInverse(rows, n, tolerance);
  actuationInverse_ = DynamicallyConsistentInverse(m, n, tolerance);
  scratchInputs_.reserve(set.constraints().size());
  for (const auto& c : set.constraints()) blockRows_.push_back(c->rows());
  blockEnabled_.assign(blockRows_.size(), 0);
}

void ConstraintProjection::setTolerance(double tolerance) {
  contactInverse_.setTolerance(tolerance);
  actuationInverse_.setTolerance(tolerance);
}

void ConstraintProjection::update(const rbd::RobotModel& model, const ConstraintSet& set,
                                  const std::vector<ConstraintInputs>& inputs) {
  requireSize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(set.constraints().size()),
              "constraint inputs");
  const Matrix& ainv = model.massMatrixInverse();
  const Matrix& u = model.underactuation();
  int row = 0;
  activeRows_ = 0;
  const auto& constraints = set.constraints();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const int r = constraints[i]->rows();
    auto block = jc_.middleRows(row, r);
    blockEnabled_[i] = inputs[i].enabled;
    if (inputs[i].enabled) {
      constraints[i]->jacobian(model, inputs[i], block);
      activeRows_ += r;
    } else {
      block.setZero();
    }
    row += r;
  }

  nc_.setIdentity();
  if (jc_.rows() > 0) {
    contactInverse_.compute(jc_, ainv, jcBar_);
    nc_.noalias() -= jcBar_ * jc_;
  }
  unc_.noalias() = u * nc_;
  actuationInverse_.compute(unc_, ainv, uncBar_);
  phi_ = actuationInverse_.weighted();
  lstar_.setIdentity();
  lstar_.noalias() -= unc_ * uncBar_;
  projectedGravity_.noalias() = uncBar_.transpose() * model.gravityForces();
  projectedCoriolis_.noalias() = uncBar_.transpose() * model.coriolis();
}

void ConstraintProjection::update(const rbd::RobotModel& model, const ConstraintSet& set) {
  set.latch(scratchInputs_);
  update(model, set, scratchInputs_);
}

Matrix ConstraintProjection::jacobian() const {
  Matrix out(activeRows_, jc_.cols());
  int source = 0, target = 0;
  for (std::size_t i = 0; i < blockRows_.size(); ++i) {
    if (blockEnabled_[i]) {
      out.middleRows(target, blockRows_[i]) = jc_.middleRows(source, blockRows_[i]);
      target += blockRows_[i];
    }
    source += blockRows_[i];
  }
  return out;
}

}  // namespace wbc::constraint
