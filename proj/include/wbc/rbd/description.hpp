#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/common.hpp"

namespace wbc::rbd {

enum class JointType { Revolute, Prismatic, Fixed, Floating };

std::string_view toString(JointType type);
std::optional<JointType> jointTypeFromString(std::string_view text);

/// Name of the implicit world link that fixed and floating joints may use as parent.
inline constexpr std::string_view kWorldLink = "world";

struct LinkSpec {
  std::string name;
  double mass = 0.0;
  Vector3 com = Vector3::Zero();
  /// Rotational inertia about the com, expressed in the link frame.
  Matrix3 inertia = Matrix3::Zero();
};

struct JointLimits {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double velocity = std::numeric_limits<double>::infinity();
  double effort = std::numeric_limits<double>::infinity();
};

struct JointSpec {
  std::string name;
  JointType type = JointType::Revolute;
  std::string parent;
  std::string child;
  Vector3 originXyz = Vector3::Zero();
  /// Fixed-axis roll, pitch, yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
  Vector3 originRpy = Vector3::Zero();
  Vector3 axis = Vector3::UnitZ();
  JointLimits limits;

  bool isReal() const { return type == JointType::Revolute || type == JointType::Prismatic; }
};

/// Validated robot description. Construct through parseDescription() or
/// validate() a hand-built instance before handing it to a RobotModel.
struct RobotDescription {
  std::string name;
  Vector3 gravity{0.0, 0.0, -9.81};
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;

  bool floating() const;
  /// Real (revolute or prismatic) joints in description order.
  std::vector<const JointSpec*> realJoints() const;
  std::vector<std::string> realJointNames() const;
  std::size_t realJointCount() const;
  std::size_t dofCount() const { return realJointCount() + (floating() ? 6 : 0); }
  const LinkSpec* findLink(std::string_view name) const;
  const JointSpec* findJoint(std::string_view name) const;
  /// Root link of the tree (child of the floating joint, if any).
  std::string rootLink() const;
};

Matrix3 rpyToRotation(const Vector3& rpy);

/// Checks the structural invariants; throws ValidationError naming the violation.
void validate(const RobotDescription& description);

/// Parses the YAML robot-description format and validates it.
/// Throws ParseError (with line/column) or ValidationError.
RobotDescription parseDescription(std::string_view text);
RobotDescription loadDescriptionFile(const std::string& path);

/// Emits the YAML robot-description format.
std::string serializeDescription(const RobotDescription& description);

}  // namespace wbc::rbd
