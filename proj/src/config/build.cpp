#include "wbc/config/build.hpp"

#include <algorithm>

#include "wbc/task/tasks.hpp"

namespace wbc::config {

namespace {

const param::ParamValue* find(const ParameterMap& params, const std::string& key) {
  auto it = params.find(key);
  return it == params.end() ? nullptr : &it->second;
}

std::string stringParam(const TaskSpec& spec, const std::string& key) {
  const auto* v = find(spec.parameters, key);
  if (!v || param::kindOf(*v) != param::ParamKind::String)
    throw ConfigError(spec.type + " '" + spec.name + "': '" + key + "' must be a name");
  return std::get<std::string>(*v);
}

Vector vectorParam(const TaskSpec& spec, const std::string& key, const param::ParamValue& v) {
  switch (param::kindOf(v)) {
    case param::ParamKind::Scalar: return Vector::Constant(1, std::get<double>(v));
    case param::ParamKind::Vector: return std::get<Vector>(v);
    default: throw ConfigError(spec.type + " '" + spec.name + "': '" + key + "' must be numeric");
  }
}

Vector3 vector3Param(const TaskSpec& spec, const std::string& key, const Vector3& fallback) {
  const auto* v = find(spec.parameters, key);
  if (!v) return fallback;
  const Vector x = vectorParam(spec, key, *v);
  if (x.size() != 3) throw ConfigError(spec.type + " '" + spec.name + "': '" + key + "' needs 3 entries");
  return x;
}

double numberParam(const ConstraintSpec& spec, const std::string& key, double fallback) {
  const auto* v = find(spec.parameters, key);
  if (!v) return fallback;
  if (param::kindOf(*v) != param::ParamKind::Scalar)
    throw ConfigError(spec.type + " '" + spec.name + "': '" + key + "' must be a number");
  return std::get<double>(*v);
}

int taskDimension(const std::string& type, const rbd::RobotModel& model) {
  if (type == "JointPositionTask") return model.jointCount();
  if (type == "OrientationTask2D") return 2;
  return 3;
}

// Keys consumed by the constructor rather than set as inputs afterwards.
bool structural(const std::string& key) { return key == "link" || key == "point" || key == "bodyFrameVector"; }

}  // namespace

std::unique_ptr<task::Task> makeTask(const TaskSpec& spec, const rbd::RobotModel& model) {
  if (!taskSchemas().count(spec.type)) throw UnknownTypeError("unknown task type '" + spec.type + "'");
  const int dim = taskDimension(spec.type, model);
  const auto gains = task::PidGains::uniform(dim, 0.0, 0.0, 0.0);

  std::unique_ptr<task::Task> t;
  try {
    if (spec.type == "JointPositionTask") {
      t = std::make_unique<task::JointPositionTask>(spec.name, model, gains);
    } else if (spec.type == "CartesianPositionTask") {
      t = std::make_unique<task::CartesianPositionTask>(spec.name, model, stringParam(spec, "link"),
                                                        vector3Param(spec, "point", Vector3::Zero()), gains);
    } else if (spec.type == "OrientationTask2D") {
      t = std::make_unique<task::OrientationTask2D>(spec.name, model, stringParam(spec, "link"),
                                                    vector3Param(spec, "bodyFrameVector", Vector3::UnitX()), gains);
    } else if (spec.type == "OrientationTask3D") {
      t = std::make_unique<task::OrientationTask3D>(spec.name, model, stringParam(spec, "link"), gains);
    } else {
      t = std::make_unique<task::COMTask>(spec.name, model, gains);
    }
  } catch (const UnknownNameError& e) {
    throw DanglingReferenceError(spec.type + " '" + spec.name + "': " + e.what(), e.name());
  }

  for (const auto& [key, value] : spec.parameters) {
    if (structural(key)) continue;
    try {
      t->setInput(key, vectorParam(spec, key, value));
    } catch (const DimensionError& e) {
      throw ConfigError(spec.type + " '" + spec.name + "': " + e.what());
    }
  }
  return t;
}

std::unique_ptr<constraint::Constraint> makeConstraint(const ConstraintSpec& spec, const rbd::RobotModel& model) {
  try {
    if (spec.type == "FlatContactConstraint")
      return std::make_unique<constraint::FlatContactConstraint>(spec.name, model, stringParam(spec, "link"));
    if (spec.type == "PointContactConstraint")
      return std::make_unique<constraint::PointContactConstraint>(spec.name, model, stringParam(spec, "link"),
                                                                  vector3Param(spec, "point", Vector3::Zero()));
    if (spec.type == "CoactuationConstraint")
      return std::make_unique<constraint::CoactuationConstraint>(spec.name, model, stringParam(spec, "master"),
                                                                 stringParam(spec, "slave"),
                                                                 numberParam(spec, "transmissionRatio", 1.0));
  } catch (const UnknownNameError& e) {
    throw DanglingReferenceError(spec.type + " '" + spec.name + "': " + e.what(), e.name());
  }
  throw UnknownTypeError("unknown constraint type '" + spec.type + "'");
}

task::CompoundTask buildCompoundTask(const ControllerSpec& spec, const rbd::RobotModel& model) {
  task::CompoundTask compound;
  for (const auto& t : spec.tasks) {
    auto entry = std::find_if(spec.compoundTask.begin(), spec.compoundTask.end(),
                              [&](const CompoundEntry& e) { return e.name == t.name; });
    if (entry == spec.compoundTask.end()) continue;
    compound.add(makeTask(t, model), entry->priority, entry->enabled);
  }
  return compound;
}

constraint::ConstraintSet buildConstraintSet(const ControllerSpec& spec, const rbd::RobotModel& model) {
  constraint::ConstraintSet set;
  for (const auto& e : spec.constraintSet) set.add(makeConstraint(*spec.findConstraint(e.name), model), e.enabled);
  return set;
}

control::LimitFlags limitFlags(const FrameworkSpec& framework, int joints) {
  control::LimitFlags flags;
  flags.effort = framework.enforceEffortLimits.expand(joints);
  flags.position = framework.enforcePositionLimits.expand(joints);
  flags.velocity = framework.enforceVelocityLimits.expand(joints);
  flags.maxEffortCommand = framework.maxEffortCommand;
  return flags;
}

void checkAgainstRobot(const ControllerSpec& spec, const rbd::RobotModel& model) {
  const int n = model.jointCount();
  const auto& mask = spec.framework.gravityCompensationMask;
  if (mask.size() != 0 && mask.size() != n)
    throw ConfigError("gravity_compensation_mask has " + std::to_string(mask.size()) + " entries for " +
                      std::to_string(n) + " joints");
  limitFlags(spec.framework, n);
}

}  // namespace wbc::config
