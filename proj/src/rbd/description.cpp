#include "wbc/rbd/description.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "../yaml_util.hpp"

namespace wbc::rbd {

std::string_view toString(JointType type) {
  switch (type) {
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
    case JointType::Fixed: return "fixed";
    case JointType::Floating: return "floating";
  }
  return "unknown";
}

std::optional<JointType> jointTypeFromString(std::string_view text) {
  if (text == "revolute") return JointType::Revolute;
  if (text == "prismatic") return JointType::Prismatic;
  if (text == "fixed") return JointType::Fixed;
  if (text == "floating") return JointType::Floating;
  return std::nullopt;
}

bool RobotDescription::floating() const {
  for (const auto& j : joints) {
    if (j.type == JointType::Floating) return true;
  }
  return false;
}

std::vector<const JointSpec*> RobotDescription::realJoints() const {
  std::vector<const JointSpec*> out;
  for (const auto& j : joints) {
    if (j.isReal()) out.push_back(&j);
  }
  return out;
}

std::vector<std::string> RobotDescription::realJointNames() const {
  std::vector<std::string> out;
  for (const auto& j : joints) {
    if (j.isReal()) out.push_back(j.name);
  }
  return out;
}

std::size_t RobotDescription::realJointCount() const {
  std::size_t n = 0;
  for (const auto& j : joints) n += j.isReal() ? 1 : 0;
  return n;
}

const LinkSpec* RobotDescription::findLink(std::string_view linkName) const {
  for (const auto& l : links) {
    if (l.name == linkName) return &l;
  }
  return nullptr;
}

const JointSpec* RobotDescription::findJoint(std::string_view jointName) const {
  for (const auto& j : joints) {
    if (j.name == jointName) return &j;
  }
  return nullptr;
}

std::string RobotDescription::rootLink() const {
  std::set<std::string> children;
  for (const auto& j : joints) {
    if (j.parent != kWorldLink) children.insert(j.child);
  }
  for (const auto& l : links) {
    if (!children.count(l.name)) return l.name;
  }
  return {};
}

Matrix3 rpyToRotation(const Vector3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vector3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()))
      .toRotationMatrix();
}

void validate(const RobotDescription& d) {
  if (d.links.empty()) throw ValidationError("robot description has no links");

  std::map<std::string, const LinkSpec*> links;
  for (const auto& l : d.links) {
    if (l.name.empty()) throw ValidationError("link with empty name");
    if (l.name == kWorldLink) throw ValidationError("link name 'world' is reserved");
    if (!links.emplace(l.name, &l).second) throw ValidationError("duplicate link name '" + l.name + "'");
    if (!(l.mass >= 0.0)) throw ValidationError("link '" + l.name + "' has negative mass");
    if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError("link '" + l.name + "' has a non-symmetric inertia matrix");
    }
  }

  std::set<std::string> jointNames;
  std::map<std::string, const JointSpec*> parentJointOf;
  int floatingCount = 0;
  for (const auto& j : d.joints) {
    if (!jointNames.insert(j.name).second) throw ValidationError("duplicate joint name '" + j.name + "'");
    if (!links.count(j.child)) throw ValidationError("joint '" + j.name + "' has unknown child link '" + j.child + "'");
    const bool fromWorld = j.parent == kWorldLink;
    if (!fromWorld && !links.count(j.parent)) {
      throw ValidationError("joint '" + j.name + "' has unknown parent link '" + j.parent + "'");
    }
    if (j.type == JointType::Floating) {
      ++floatingCount;
      if (!fromWorld) throw ValidationError("floating joint '" + j.name + "' must attach the base link to the world");
    } else if (fromWorld && j.type != JointType::Fixed) {
      throw ValidationError("joint '" + j.name + "' attaches to the world but is neither fixed nor floating");
    }
    if (j.parent == j.child) throw ValidationError("cycle: joint '" + j.name + "' connects link '" + j.child + "' to itself");
    if (j.isReal() && std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("joint '" + j.name + "' axis is not unit length");
    }
    if (j.limits.lower > j.limits.upper) throw ValidationError("joint '" + j.name + "' has lower limit above upper limit");
    if (!parentJointOf.emplace(j.child, &j).second) {
      throw ValidationError("link '" + j.child + "' is the child of more than one joint");
    }
  }
  if (floatingCount > 1) throw ValidationError("more than one floating joint");

  // Walk up from every link; revisiting a link means the parent chain loops.
  for (const auto& l : d.links) {
    std::set<std::string> seen{l.name};
    std::string current = l.name;
    for (;;) {
      auto it = parentJointOf.find(current);
      if (it == parentJointOf.end() || it->second->parent == kWorldLink) break;
      current = it->second->parent;
      if (!seen.insert(current).second) {
        throw ValidationError("cycle: link '" + current + "' is its own ancestor");
      }
    }
  }

  int roots = 0;
  for (const auto& l : d.links) {
    auto it = parentJointOf.find(l.name);
    if (it == parentJointOf.end() || it->second->parent == kWorldLink) ++roots;
  }
  if (roots != 1) {
    throw ValidationError("link graph must be a single tree; found " + std::to_string(roots) + " root links");
  }
}

namespace {

LinkSpec parseLink(const YAML::Node& node) {
  yaml::requireMap(node, "link");
  yaml::checkKeys(node, {"name", "mass", "com", "inertia"}, "link");
  LinkSpec link;
  link.name = yaml::asString(yaml::required(node, "name", "link"), "link name");
  if (node["mass"]) link.mass = yaml::asDouble(node["mass"], "mass");
  if (node["com"]) link.com = yaml::asVector3(node["com"], "com");
  if (node["inertia"]) {
    const auto v = yaml::asDoubles(node["inertia"], "inertia");
    if (v.size() != 6) yaml::fail(node["inertia"], "inertia must be [ixx, iyy, izz, ixy, ixz, iyz]");
    link.inertia << v[0], v[3], v[4], v[3], v[1], v[5], v[4], v[5], v[2];
  }
  return link;
}

JointSpec parseJoint(const YAML::Node& node) {
  yaml::requireMap(node, "joint");
  yaml::checkKeys(node, {"name", "type", "parent", "child", "origin", "axis", "limits"}, "joint");
  JointSpec joint;
  joint.name = yaml::asString(yaml::required(node, "name", "joint"), "joint name");
  const YAML::Node typeNode = yaml::required(node, "type", "joint");
  const auto type = jointTypeFromString(yaml::asString(typeNode, "joint type"));
  if (!type) yaml::fail(typeNode, "unknown joint type '" + typeNode.Scalar() + "'");
  joint.type = *type;
  joint.parent = yaml::asString(yaml::required(node, "parent", "joint"), "parent");
  joint.child = yaml::asString(yaml::required(node, "child", "joint"), "child");
  if (const YAML::Node origin = node["origin"]) {
    yaml::requireMap(origin, "origin");
    yaml::checkKeys(origin, {"xyz", "rpy"}, "origin");
    if (origin["xyz"]) joint.originXyz = yaml::asVector3(origin["xyz"], "origin xyz");
    if (origin["rpy"]) joint.originRpy = yaml::asVector3(origin["rpy"], "origin rpy");
  }
  if (node["axis"]) {
    joint.axis = yaml::asVector3(node["axis"], "axis");
  } else if (joint.isReal()) {
    yaml::fail(node, "joint '" + joint.name + "' needs an axis");
  }
  if (const YAML::Node limits = node["limits"]) {
    yaml::requireMap(limits, "limits");
    yaml::checkKeys(limits, {"position", "velocity", "effort"}, "limits");
    if (limits["position"]) {
      const auto v = yaml::asDoubles(limits["position"], "position limits");
      if (v.size() != 2) yaml::fail(limits["position"], "position limits must be [lower, upper]");
      joint.limits.lower = v[0];
      joint.limits.upper = v[1];
    }
    if (limits["velocity"]) joint.limits.velocity = yaml::asDouble(limits["velocity"], "velocity limit");
    if (limits["effort"]) joint.limits.effort = yaml::asDouble(limits["effort"], "effort limit");
  }
  return joint;
}

}  // namespace

RobotDescription parseDescription(std::string_view text) {
  const YAML::Node root = yaml::load(text);
  yaml::requireMap(root, "robot description");
  yaml::checkKeys(root, {"name", "gravity", "links", "joints"}, "robot description");
  RobotDescription d;
  d.name = yaml::asString(yaml::required(root, "name", "robot description"), "name");
  if (root["gravity"]) d.gravity = yaml::asVector3(root["gravity"], "gravity");
  const YAML::Node links = yaml::required(root, "links", "robot description");
  yaml::requireSequence(links, "links");
  for (const auto& l : links) d.links.push_back(parseLink(l));
  if (const YAML::Node joints = root["joints"]) {
    yaml::requireSequence(joints, "joints");
    for (const auto& j : joints) d.joints.push_back(parseJoint(j));
  }
  validate(d);
  return d;
}

RobotDescription loadDescriptionFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open robot description '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parseDescription(buffer.str());
}

namespace {

void emitVector(YAML::Emitter& out, const Vector3& v) {
  out << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z() << YAML::EndSeq;
}

}  // namespace

std::string serializeDescription(const RobotDescription& d) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << d.name;
  out << YAML::Key << "gravity" << YAML::Value;
  emitVector(out, d.gravity);
  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : d.links) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << l.name;
    out << YAML::Key << "mass" << YAML::Value << l.mass;
    out << YAML::Key << "com" << YAML::Value;
    emitVector(out, l.com);
    out << YAML::Key << "inertia" << YAML::Value << YAML::Flow << YAML::BeginSeq << l.inertia(0, 0) << l.inertia(1, 1)
        << l.inertia(2, 2) << l.inertia(0, 1) << l.inertia(0, 2) << l.inertia(1, 2) << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
  for (const auto& j : d.joints) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << j.name;
    out << YAML::Key << "type" << YAML::Value << std::string(toString(j.type));
    out << YAML::Key << "parent" << YAML::Value << j.parent;
    out << YAML::Key << "child" << YAML::Value << j.child;
    out << YAML::Key << "origin" << YAML::Value << YAML::BeginMap << YAML::Key << "xyz" << YAML::Value;
    emitVector(out, j.originXyz);
    out << YAML::Key << "rpy" << YAML::Value;
    emitVector(out, j.originRpy);
    out << YAML::EndMap;
    if (j.isReal()) {
      out << YAML::Key << "axis" << YAML::Value;
      emitVector(out, j.axis);
      out << YAML::Key << "limits" << YAML::Value << YAML::BeginMap;
      if (std::isfinite(j.limits.lower) || std::isfinite(j.limits.upper)) {
        out << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginSeq << j.limits.lower
            << j.limits.upper << YAML::EndSeq;
      }
      if (std::isfinite(j.limits.velocity)) out << YAML::Key << "velocity" << YAML::Value << j.limits.velocity;
      if (std::isfinite(j.limits.effort)) out << YAML::Key << "effort" << YAML::Value << j.limits.effort;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return out.c_str();
}

}  // namespace wbc::rbd
