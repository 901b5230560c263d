#pragma once

#include <Eigen/Cholesky>

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wbc/common.hpp"
#include "wbc/rbd/description.hpp"

namespace wbc::rbd {

/// Where each degree of freedom lives in the generalized vectors.
///
/// Virtual floating-base DOFs come first (x, y, z translation, then rotations
/// about x, y, z in that intrinsic order), followed by real joints in
/// description order.
struct JointOrdering {
  std::vector<int> virtualIndices;
  std::vector<int> realIndices;
  std::vector<int> actuatedIndices;
  std::vector<std::string> realNames;
};

/// Kinematic and dynamic state of a branched, optionally floating-base robot.
///
/// All spatial quantities are expressed in the world frame (Plücker
/// coordinates about the world origin, angular part first). update() fills
/// the mass matrix A by composite rigid bodies, and the gravity vector G and
/// Coriolis/centrifugal vector B by recursive Newton-Euler.
///
/// Const member functions are safe to call concurrently. update() is not.
class RobotModel {
 public:
  explicit RobotModel(RobotDescription description);

  const RobotDescription& description() const { return description_; }
  int dofCount() const { return dofs_; }
  int jointCount() const { return joints_; }
  bool floating() const { return floating_; }
  const JointOrdering& ordering() const { return ordering_; }

  /// Selection matrix U with U * q_full = q_actual.
  const Matrix& underactuation() const { return underactuation_; }

  std::optional<int> findLink(std::string_view name) const;
  /// Throws UnknownNameError.
  int linkIndex(std::string_view name) const;
  /// Index of a real joint within q_actual (description order).
  std::optional<int> findRealJoint(std::string_view name) const;
  int realJointIndex(std::string_view name) const;
  /// Generalized index of a real joint.
  int dofIndex(std::string_view jointName) const { return ordering_.realIndices[realJointIndex(jointName)]; }

  /// Recomputes kinematics, A, its inverse, B and G. Allocation-free.
  void update(const Vector& q, const Vector& qd);
  /// Recomputes link poses and velocities only.
  void updateKinematics(const Vector& q, const Vector& qd);

  /// Time of the joint state the model was last updated from.
  double timestamp() const { return timestamp_; }
  void setTimestamp(double t) { timestamp_ = t; }
  /// False if the mass matrix failed its Cholesky factorization.
  bool valid() const { return valid_; }

  const Vector& q() const { return q_; }
  const Vector& qd() const { return qd_; }
  const Matrix& massMatrix() const { return massMatrix_; }
  const Matrix& massMatrixInverse() const { return massMatrixInverse_; }
  const Vector& coriolis() const { return coriolis_; }
  const Vector& gravityForces() const { return gravity_; }
  const Vector3& worldGravity() const { return gravityVector_; }
  void setWorldGravity(const Vector3& g) { gravityVector_ = g; }

  const Matrix3& linkRotation(int link) const { return rotation_[link]; }
  const Vector3& linkPosition(int link) const { return position_[link]; }
  Vector3 pointPosition(int link, const Vector3& pointInLink) const {
    return position_[link] + rotation_[link] * pointInLink;
  }

  /// World-frame linear velocity Jacobian of a point fixed in a link (3 x n).
  void pointJacobian(int link, const Vector3& pointInLink, Eigen::Ref<Matrix> out) const;
  Matrix pointJacobian(std::string_view link, const Vector3& pointInLink) const;

  /// Angular velocity rows above the linear velocity rows of the link origin (6 x n).
  void spatialJacobian(int link, Eigen::Ref<Matrix> out) const;
  Matrix spatialJacobian(std::string_view link) const;

  double totalMass() const { return totalMass_; }
  /// Throws Error when the total mass is zero.
  Vector3 com() const;
  void comJacobian(Eigen::Ref<Matrix> out) const;

  /// Recursive Newton-Euler at the current q (and qd if requested). Allocates.
  Vector inverseDynamics(const Vector& qdd, bool includeVelocity, bool includeGravity) const;

  /// Real-joint slices of the generalized state.
  void actualPositions(Eigen::Ref<Vector> out) const;
  void actualVelocities(Eigen::Ref<Vector> out) const;

 private:
  struct Body {
    std::string link;  // empty for virtual bodies
    int parent = -1;
    JointType type = JointType::Fixed;
    int dof = -1;
    Matrix3 originRotation = Matrix3::Identity();
    Vector3 originPosition = Vector3::Zero();
    Vector3 axis = Vector3::UnitZ();
    double mass = 0.0;
    Vector3 com = Vector3::Zero();
    Matrix3 inertia = Matrix3::Zero();
    std::vector<int> support;  // bodies with a DOF on the path to the root, root first
  };

  struct DynamicsWorkspace {
    std::vector<Vector6> velocity;
    std::vector<Vector6> acceleration;
    std::vector<Vector6> force;
  };

  void buildBodies();
  void computeSpatialInertias();
  void compositeRigidBody();
  void recursiveNewtonEuler(const Vector& qdd, bool includeVelocity, bool includeGravity, DynamicsWorkspace& ws,
                            Eigen::Ref<Vector> tau) const;

  RobotDescription description_;
  bool floating_ = false;
  int dofs_ = 0;
  int joints_ = 0;
  JointOrdering ordering_;
  Matrix underactuation_;
  std::vector<Body> bodies_;
  std::unordered_map<std::string, int> linkIndex_;
  std::unordered_map<std::string, int> realJointIndex_;
  double totalMass_ = 0.0;

  double timestamp_ = 0.0;
  bool valid_ = true;
  Vector3 gravityVector_;
  Vector q_, qd_;
  std::vector<Matrix3> rotation_;
  std::vector<Vector3> position_;
  std::vector<Vector6> motion_;  // joint motion subspace per body (zero when fixed)
  std::vector<Vector6> velocity_;
  std::vector<Matrix6> spatialInertia_;
  std::vector<Matrix6> compositeInertia_;

  Matrix massMatrix_;
  Matrix massMatrixInverse_;
  Vector coriolis_;
  Vector gravity_;
  Vector fullBias_;
  Vector zeroAcceleration_;
  Eigen::LLT<Matrix> cholesky_;
  DynamicsWorkspace workspace_;
};

}  // namespace wbc::rbd
