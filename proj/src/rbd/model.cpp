#include "wbc/rbd/model.hpp"

#include <deque>

namespace wbc::rbd {

namespace {

Vector6 crossMotion(const Vector6& v, const Vector6& m) {
  Vector6 out;
  const Vector3 w = v.head<3>();
  out.head<3>() = w.cross(m.head<3>());
  out.tail<3>() = w.cross(m.tail<3>()) + v.tail<3>().cross(m.head<3>());
  return out;
}

Vector6 crossForce(const Vector6& v, const Vector6& f) {
  Vector6 out;
  const Vector3 w = v.head<3>();
  out.head<3>() = w.cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

}  // namespace

RobotModel::RobotModel(RobotDescription description)
    : description_(std::move(description)), gravityVector_(description_.gravity) {
  validate(description_);
  floating_ = description_.floating();
  joints_ = static_cast<int>(description_.realJointCount());
  dofs_ = joints_ + (floating_ ? 6 : 0);
  const int offset = floating_ ? 6 : 0;

  if (floating_) {
    for (int i = 0; i < 6; ++i) ordering_.virtualIndices.push_back(i);
  }
  for (const auto* joint : description_.realJoints()) {
    const int index = static_cast<int>(ordering_.realNames.size());
    realJointIndex_.emplace(joint->name, index);
    ordering_.realNames.push_back(joint->name);
    ordering_.realIndices.push_back(offset + index);
  }
  ordering_.actuatedIndices = ordering_.realIndices;

  underactuation_.setZero(joints_, dofs_);
  for (int i = 0; i < joints_; ++i) underactuation_(i, ordering_.realIndices[i]) = 1.0;

  buildBodies();

  const std::size_t n = bodies_.size();
  rotation_.assign(n, Matrix3::Identity());
  position_.assign(n, Vector3::Zero());
  motion_.assign(n, Vector6::Zero());
  velocity_.assign(n, Vector6::Zero());
  spatialInertia_.assign(n, Matrix6::Zero());
  compositeInertia_.assign(n, Matrix6::Zero());
  workspace_.velocity.assign(n, Vector6::Zero());
  workspace_.acceleration.assign(n, Vector6::Zero());
  workspace_.force.assign(n, Vector6::Zero());

  massMatrix_.setZero(dofs_, dofs_);
  massMatrixInverse_.setZero(dofs_, dofs_);
  coriolis_.setZero(dofs_);
  gravity_.setZero(dofs_);
  fullBias_.setZero(dofs_);
  zeroAcceleration_.setZero(dofs_);
  cholesky_ = Eigen::LLT<Matrix>(dofs_);

  for (const auto& body : bodies_) totalMass_ += body.mass;

  update(Vector::Zero(dofs_), Vector::Zero(dofs_));
}

void RobotModel::buildBodies() {
  const int offset = floating_ ? 6 : 0;
  const std::string root = description_.rootLink();

  const JointSpec* rootJoint = nullptr;
  for (const auto& j : description_.joints) {
    if (j.child == root) rootJoint = &j;
  }

  auto makeLinkBody = [&](const std::string& linkName) {
    Body body;
    body.link = linkName;
    const LinkSpec* spec = description_.findLink(linkName);
    body.mass = spec->mass;
    body.com = spec->com;
    body.inertia = spec->inertia;
    return body;
  };

  if (floating_) {
    const Vector3 axes[3] = {Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()};
    for (int i = 0; i < 6; ++i) {
      Body body = (i == 5) ? makeLinkBody(root) : Body{};
      body.parent = i - 1;
      body.type = i < 3 ? JointType::Prismatic : JointType::Revolute;
      body.dof = i;
      body.axis = axes[i % 3];
      if (i == 0) {
        body.originRotation = rpyToRotation(rootJoint->originRpy);
        body.originPosition = rootJoint->originXyz;
      }
      bodies_.push_back(std::move(body));
    }
  } else {
    Body body = makeLinkBody(root);
    body.parent = -1;
    body.type = JointType::Fixed;
    if (rootJoint) {
      body.originRotation = rpyToRotation(rootJoint->originRpy);
      body.originPosition = rootJoint->originXyz;
    }
    bodies_.push_back(std::move(body));
  }
  linkIndex_.emplace(root, static_cast<int>(bodies_.size()) - 1);

  std::deque<std::string> pending{root};
  while (!pending.empty()) {
    const std::string parentLink = pending.front();
    pending.pop_front();
    const int parentBody = linkIndex_.at(parentLink);
    for (const auto& j : description_.joints) {
      if (j.parent != parentLink) continue;
      Body body = makeLinkBody(j.child);
      body.parent = parentBody;
      body.type = j.type;
      body.dof = j.isReal() ? offset + realJointIndex_.at(j.name) : -1;
      body.originRotation = rpyToRotation(j.originRpy);
      body.originPosition = j.originXyz;
      body.axis = j.axis;
      bodies_.push_back(std::move(body));
      linkIndex_.emplace(j.child, static_cast<int>(bodies_.size()) - 1);
      pending.push_back(j.child);
    }
  }

  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    std::vector<int> chain;
    for (int b = static_cast<int>(i); b >= 0; b = bodies_[b].parent) {
      if (bodies_[b].dof >= 0) chain.push_back(b);
    }
    bodies_[i].support.assign(chain.rbegin(), chain.rend());
  }
}

std::optional<int> RobotModel::findLink(std::string_view name) const {
  auto it = linkIndex_.find(std::string(name));
  if (it == linkIndex_.end()) return std::nullopt;
  return it->second;
}

int RobotModel::linkIndex(std::string_view name) const {
  if (auto index = findLink(name)) return *index;
  throw UnknownNameError("link", std::string(name));
}

std::optional<int> RobotModel::findRealJoint(std::string_view name) const {
  auto it = realJointIndex_.find(std::string(name));
  if (it == realJointIndex_.end()) return std::nullopt;
  return it->second;
}

int RobotModel::realJointIndex(std::string_view name) const {
  if (auto index = findRealJoint(name)) return *index;
  throw UnknownNameError("joint", std::string(name));
}

void RobotModel::updateKinematics(const Vector& q, const Vector& qd) {
  requireSize(q.size(), dofs_, "q_full");
  requireSize(qd.size(), dofs_, "qd_full");
  q_ = q;
  qd_ = qd;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& body = bodies_[i];
    Matrix3 parentRotation = Matrix3::Identity();
    Vector3 parentPosition = Vector3::Zero();
    Vector6 parentVelocity = Vector6::Zero();
    if (body.parent >= 0) {
      parentRotation = rotation_[body.parent];
      parentPosition = position_[body.parent];
      parentVelocity = velocity_[body.parent];
    }
    const Matrix3 jointFrame = parentRotation * body.originRotation;
    const Vector3 jointOrigin = parentPosition + parentRotation * body.originPosition;
    Vector6& s = motion_[i];
    switch (body.type) {
      case JointType::Revolute: {
        const Vector3 axis = jointFrame * body.axis;
        rotation_[i] = jointFrame * Eigen::AngleAxisd(q(body.dof), body.axis).toRotationMatrix();
        position_[i] = jointOrigin;
        s.head<3>() = axis;
        s.tail<3>() = jointOrigin.cross(axis);
        break;
      }
      case JointType::Prismatic: {
        const Vector3 axis = jointFrame * body.axis;
        rotation_[i] = jointFrame;
        position_[i] = jointOrigin + axis * q(body.dof);
        s.head<3>().setZero();
        s.tail<3>() = axis;
        break;
      }
      default:
        rotation_[i] = jointFrame;
        position_[i] = jointOrigin;
        s.setZero();
        break;
    }
    velocity_[i] = parentVelocity;
    if (body.dof >= 0) velocity_[i] += s * qd(body.dof);
  }
}

void RobotModel::computeSpatialInertias() {
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& body = bodies_[i];
    Matrix6& inertia = spatialInertia_[i];
    if (body.mass == 0.0 && body.inertia.isZero(0.0)) {
      inertia.setZero();
      continue;
    }
    const Vector3 c = position_[i] + rotation_[i] * body.com;
    const Matrix3 cx = skew(c);
    inertia.topLeftCorner<3, 3>() = rotation_[i] * body.inertia * rotation_[i].transpose() + body.mass * cx * cx.transpose();
    inertia.topRightCorner<3, 3>() = body.mass * cx;
    inertia.bottomLeftCorner<3, 3>() = body.mass * cx.transpose();
    inertia.bottomRightCorner<3, 3>() = body.mass * Matrix3::Identity();
  }
}

void RobotModel::compositeRigidBody() {
  for (std::size_t i = 0; i < bodies_.size(); ++i) compositeInertia_[i] = spatialInertia_[i];
  for (int i = static_cast<int>(bodies_.size()) - 1; i >= 0; --i) {
    if (bodies_[i].parent >= 0) compositeInertia_[bodies_[i].parent] += compositeInertia_[i];
  }
  massMatrix_.setZero();
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& body = bodies_[i];
    if (body.dof < 0) continue;
    const Vector6 f = compositeInertia_[i] * motion_[i];
    massMatrix_(body.dof, body.dof) = motion_[i].dot(f);
    for (int j : body.support) {
      if (j == static_cast<int>(i)) continue;
      const double value = motion_[j].dot(f);
      massMatrix_(bodies_[j].dof, body.dof) = value;
      massMatrix_(body.dof, bodies_[j].dof) = value;
    }
  }
}

void RobotModel::recursiveNewtonEuler(const Vector& qdd, bool includeVelocity, bool includeGravity,
                                      DynamicsWorkspace& ws, Eigen::Ref<Vector> tau) const {
  Vector6 rootAcceleration = Vector6::Zero();
  if (includeGravity) rootAcceleration.tail<3>() = -gravityVector_;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const Body& body = bodies_[i];
    const Vector6 parentVelocity = body.parent >= 0 ? ws.velocity[body.parent] : Vector6::Zero();
    const Vector6 parentAcceleration = body.parent >= 0 ? ws.acceleration[body.parent] : rootAcceleration;
    Vector6 jointVelocity = Vector6::Zero();
    Vector6 jointAcceleration = Vector6::Zero();
    if (body.dof >= 0) {
      if (includeVelocity) jointVelocity = motion_[i] * qd_(body.dof);
      jointAcceleration = motion_[i] * qdd(body.dof);
    }
    ws.velocity[i] = parentVelocity + jointVelocity;
    ws.acceleration[i] = parentAcceleration + jointAcceleration + crossMotion(ws.velocity[i], jointVelocity);
    const Matrix6& inertia = spatialInertia_[i];
    ws.force[i] = inertia * ws.acceleration[i] + crossForce(ws.velocity[i], inertia * ws.velocity[i]);
  }
  for (int i = static_cast<int>(bodies_.size()) - 1; i >= 0; --i) {
    const Body& body = bodies_[i];
    if (body.dof >= 0) tau(body.dof) = motion_[i].dot(ws.force[i]);
    if (body.parent >= 0) ws.force[body.parent] += ws.force[i];
  }
}

void RobotModel::update(const Vector& q, const Vector& qd) {
  updateKinematics(q, qd);
  computeSpatialInertias();
  compositeRigidBody();
  recursiveNewtonEuler(zeroAcceleration_, false, true, workspace_, gravity_);
  recursiveNewtonEuler(zeroAcceleration_, true, true, workspace_, fullBias_);
  coriolis_ = fullBias_ - gravity_;
  cholesky_.compute(massMatrix_);
  valid_ = cholesky_.info() == Eigen::Success;
  massMatrixInverse_.setIdentity();
  if (valid_) cholesky_.solveInPlace(massMatrixInverse_);
}

Vector RobotModel::inverseDynamics(const Vector& qdd, bool includeVelocity, bool includeGravity) const {
  requireSize(qdd.size(), dofs_, "qdd");
  DynamicsWorkspace ws;
  ws.velocity.assign(bodies_.size(), Vector6::Zero());
  ws.acceleration.assign(bodies_.size(), Vector6::Zero());
  ws.force.assign(bodies_.size(), Vector6::Zero());
  Vector tau = Vector::Zero(dofs_);
  recursiveNewtonEuler(qdd, includeVelocity, includeGravity, ws, tau);
  return tau;
}

void RobotModel::pointJacobian(int link, const Vector3& pointInLink, Eigen::Ref<Matrix> out) const {
  const Vector3 x = pointPosition(link, pointInLink);
  out.setZero();
  for (int b : bodies_[link].support) {
    const Vector6& s = motion_[b];
    out.col(bodies_[b].dof) = s.tail<3>() + s.head<3>().cross(x);
  }
}

Matrix RobotModel::pointJacobian(std::string_view link, const Vector3& pointInLink) const {
  Matrix out(3, dofs_);
  pointJacobian(linkIndex(link), pointInLink, out);
  return out;
}

void RobotModel::spatialJacobian(int link, Eigen::Ref<Matrix> out) const {
  const Vector3& x = position_[link];
  out.setZero();
  for (int b : bodies_[link].support) {
    const Vector6& s = motion_[b];
    out.block<3, 1>(0, bodies_[b].dof) = s.head<3>();
    out.block<3, 1>(3, bodies_[b].dof) = s.tail<3>() + s.head<3>().cross(x);
  }
}

Matrix RobotModel::spatialJacobian(std::string_view link) const {
  Matrix out(6, dofs_);
  spatialJacobian(linkIndex(link), out);
  return out;
}

Vector3 RobotModel::com() const {
  if (totalMass_ <= 0.0) throw Error("center of mass undefined: total mass is zero");
  Vector3 sum = Vector3::Zero();
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    sum += bodies_[i].mass * pointPosition(static_cast<int>(i), bodies_[i].com);
  }
  return sum / totalMass_;
}

void RobotModel::comJacobian(Eigen::Ref<Matrix> out) const {
  if (totalMass_ <= 0.0) throw Error("center of mass undefined: total mass is zero");
  out.setZero();
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    const double weight = bodies_[i].mass / totalMass_;
    if (weight == 0.0) continue;
    const Vector3 x = pointPosition(static_cast<int>(i), bodies_[i].com);
    for (int b : bodies_[i].support) {
      const Vector6& s = motion_[b];
      out.col(bodies_[b].dof) += weight * (s.tail<3>() + s.head<3>().cross(x));
    }
  }
}

void RobotModel::actualPositions(Eigen::Ref<Vector> out) const {
  for (int i = 0; i < joints_; ++i) out(i) = q_(ordering_.realIndices[i]);
}

void RobotModel::actualVelocities(Eigen::Ref<Vector> out) const {
  for (int i = 0; i < joints_; ++i) out(i) = qd_(ordering_.realIndices[i]);
}

}  // namespace wbc::rbd
