#include "wbc/sim/plant.hpp"

#include <cmath>

#include "wbc/linalg.hpp"

namespace wbc::sim {

PlantConstraints PlantConstraints::fromConstraintSet(const constraint::ConstraintSet& set,
                                                     const rbd::RobotModel& model) {
  PlantConstraints out;
  const std::string root = model.description().rootLink();
  for (const auto& c : set.constraints()) {
    if (!c->enabled()) continue;
    if (auto* flat = dynamic_cast<const constraint::FlatContactConstraint*>(c.get())) {
      if (flat->link() == root) {
        // fixed-base robots are already welded to the world
        out.weldBase = out.weldBase || model.floating();
        continue;
      }
      out.contacts.push_back({flat->link(), true, Vector3::Zero()});
    } else if (auto* point = dynamic_cast<const constraint::PointContactConstraint*>(c.get())) {
      out.contacts.push_back({point->link(), false, point->point()});
    } else if (auto* coact = dynamic_cast<const constraint::CoactuationConstraint*>(c.get())) {
      out.transmissions.push_back({model.realJointIndex(coact->master()), model.realJointIndex(coact->slave()),
                                   coact->ratio()});
    } else {
      throw ValidationError("plant cannot enforce constraint type " + c->typeName());
    }
  }
  return out;
}

Plant::Plant(rbd::RobotDescription description, PlantConstraints constraints, PlantOptions options)
    : model_(std::move(description)), constraints_(std::move(constraints)), options_(options) {
  const int n = model_.dofCount();
  const auto& ord = model_.ordering();
  const auto realJoints = model_.description().realJoints();

  std::vector<int> slaveOf(model_.jointCount(), -1);
  for (std::size_t i = 0; i < constraints_.transmissions.size(); ++i) {
    const auto& t = constraints_.transmissions[i];
    if (t.master < 0 || t.slave < 0 || t.master >= model_.jointCount() || t.slave >= model_.jointCount() ||
        t.master == t.slave)
      throw ValidationError("invalid transmission joints");
    if (slaveOf[t.slave] >= 0) throw ValidationError("joint driven by two transmissions");
    slaveOf[t.slave] = t.master;
  }
  for (const auto& t : constraints_.transmissions)
    if (slaveOf[t.master] >= 0) throw ValidationError("chained transmissions are not supported");
  if (constraints_.weldBase && !model_.floating()) constraints_.weldBase = false;

  std::vector<int> column(n, -1);
  if (!constraints_.weldBase)
    for (int d : ord.virtualIndices) {
      column[d] = static_cast<int>(independent_.size());
      independent_.push_back(d);
    }
  for (int j = 0; j < model_.jointCount(); ++j) {
    if (slaveOf[j] >= 0) continue;
    column[ord.realIndices[j]] = static_cast<int>(independent_.size());
    independent_.push_back(ord.realIndices[j]);
  }
  const int nz = static_cast<int>(independent_.size());
  map_.setZero(n, nz);
  lower_.setConstant(nz, -std::numeric_limits<double>::infinity());
  upper_.setConstant(nz, std::numeric_limits<double>::infinity());
  for (int i = 0; i < nz; ++i) map_(independent_[i], i) = 1.0;
  for (int j = 0; j < model_.jointCount(); ++j) {
    const int col = column[ord.realIndices[j]];
    if (col < 0) continue;
    lower_[col] = realJoints[j]->limits.lower;
    upper_[col] = realJoints[j]->limits.upper;
  }
  for (const auto& t : constraints_.transmissions)
    map_(ord.realIndices[t.slave], column[ord.realIndices[t.master]]) = t.ratio;

  for (const auto& c : constraints_.contacts) model_.linkIndex(c.link);
  int rows = 0;
  for (const auto& c : constraints_.contacts) rows += c.flat ? 6 : 3;
  contactRows_.setZero(rows, n);
  reducedContact_.setZero(rows, nz);
  base_.setZero(n);
  q_.setZero(n);
  qd_.setZero(n);
  z_.setZero(nz);
  zd_.setZero(nz);
  effort_.setZero(model_.jointCount());
  rhs_.setZero(nz);
  force_.setZero(n);
  reducedMass_.setZero(nz, nz);
  model_.update(q_, qd_);
}

void Plant::reset(const Vector& position, const Vector& velocity) {
  requireSize(position.size(), model_.jointCount(), "plant position");
  requireSize(velocity.size(), model_.jointCount(), "plant velocity");
  const auto& ord = model_.ordering();
  for (int i = 0; i < static_cast<int>(independent_.size()); ++i) {
    const int d = independent_[i];
    z_[i] = 0.0;
    zd_[i] = 0.0;
    for (int j = 0; j < model_.jointCount(); ++j)
      if (ord.realIndices[j] == d) {
        z_[i] = position[j];
        zd_[i] = velocity[j];
      }
  }
  time_ = 0.0;
  limitClamped_ = false;
  effort_.setZero();
  enforceCoordinates();
  if (reducedContact_.rows() > 0) projectVelocity();
}

void Plant::enforceCoordinates() {
  q_.noalias() = base_ + map_ * z_;
  qd_.noalias() = map_ * zd_;
}

void Plant::contactJacobian() {
  int row = 0;
  for (const auto& c : constraints_.contacts) {
    const int link = model_.linkIndex(c.link);
    if (c.flat) {
      model_.spatialJacobian(link, contactRows_.middleRows(row, 6));
      row += 6;
    } else {
      model_.pointJacobian(link, c.point, contactRows_.middleRows(row, 3));
      row += 3;
    }
  }
  reducedContact_.noalias() = contactRows_ * map_;
}

void Plant::accelerations(const Vector& z, const Vector& zd, Vector& zdd) {
  q_.noalias() = base_ + map_ * z;
  qd_.noalias() = map_ * zd;
  model_.update(q_, qd_);
  force_.noalias() = model_.underactuation().transpose() * effort_;
  force_ -= model_.coriolis() + model_.gravityForces();
  rhs_.noalias() = map_.transpose() * force_;
  reducedMass_.noalias() = map_.transpose() * model_.massMatrix() * map_;
  Eigen::LLT<Matrix> llt(reducedMass_);
  zdd = llt.solve(rhs_);
  if (reducedContact_.rows() == 0) return;
  contactJacobian();
  const Matrix minvJt = llt.solve(reducedContact_.transpose());
  const Matrix lambda = pseudoInverse(reducedContact_ * minvJt);
  zdd -= minvJt * (lambda * (reducedContact_ * zdd));
}

void Plant::projectVelocity() {
  q_.noalias() = base_ + map_ * z_;
  qd_.noalias() = map_ * zd_;
  model_.update(q_, qd_);
  contactJacobian();
  reducedMass_.noalias() = map_.transpose() * model_.massMatrix() * map_;
  Eigen::LLT<Matrix> llt(reducedMass_);
  const Matrix minvJt = llt.solve(reducedContact_.transpose());
  const Matrix lambda = pseudoInverse(reducedContact_ * minvJt);
  zd_ -= minvJt * (lambda * (reducedContact_ * zd_));
}

void Plant::step(const Vector& effort, double dt) {
  requireSize(effort.size(), model_.jointCount(), "plant effort");
  if (!effort.allFinite()) throw Error("plant received a non-finite effort command");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("plant step requires a positive time step");
  effort_ = effort;

  const int nz = static_cast<int>(z_.size());
  Vector zdd(nz);
  if (options_.integrator == Integrator::SemiImplicitEuler) {
    accelerations(z_, zd_, zdd);
    zd_ += zdd * dt;
    z_ += zd_ * dt;
  } else {
    Vector k1v(nz), k2v(nz), k3v(nz), k4v(nz);
    const Vector z0 = z_, v0 = zd_;
    accelerations(z0, v0, k1v);
    const Vector v1 = v0 + 0.5 * dt * k1v;
    accelerations(z0 + 0.5 * dt * v0, v1, k2v);
    const Vector v2 = v0 + 0.5 * dt * k2v;
    accelerations(z0 + 0.5 * dt * v1, v2, k3v);
    const Vector v3 = v0 + dt * k3v;
    accelerations(z0 + dt * v2, v3, k4v);
    z_ = z0 + dt / 6.0 * (v0 + 2.0 * v1 + 2.0 * v2 + v3);
    zd_ = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }

  if (options_.clampLimits) {
    for (int i = 0; i < nz; ++i) {
      if (z_[i] < lower_[i]) {
        z_[i] = lower_[i];
        zd_[i] = std::max(zd_[i], 0.0);
        limitClamped_ = true;
      } else if (z_[i] > upper_[i]) {
        z_[i] = upper_[i];
        zd_[i] = std::min(zd_[i], 0.0);
        limitClamped_ = true;
      }
    }
  }
  if (reducedContact_.rows() > 0) projectVelocity();
  enforceCoordinates();
  time_ += dt;
}

void Plant::state(rbd::RobotState& out) const {
  if (out.size() != model_.jointCount()) out.resize(model_.jointCount());
  out.timestamp = time_;
  const auto& ord = model_.ordering();
  for (int j = 0; j < model_.jointCount(); ++j) {
    out.position[j] = q_[ord.realIndices[j]];
    out.velocity[j] = qd_[ord.realIndices[j]];
  }
  out.effort = effort_;
}

double Plant::kineticEnergy() {
  model_.update(q_, qd_);
  return 0.5 * qd_.dot(model_.massMatrix() * qd_);
}

double Plant::potentialEnergy() {
  model_.updateKinematics(q_, qd_);
  if (model_.totalMass() == 0.0) return 0.0;
  return -model_.totalMass() * model_.worldGravity().dot(model_.com());
}

}  // namespace wbc::sim
