#pragma once

#include <memory>

#include "wbc/config/spec.hpp"
#include "wbc/constraint/constraint.hpp"
#include "wbc/control/limits.hpp"
#include "wbc/rbd/model.hpp"
#include "wbc/task/compound_task.hpp"

namespace wbc::config {

/// Instantiates a task from its spec. Goals not given in the spec start at the
/// model's current pose, so update the model first.
std::unique_ptr<task::Task> makeTask(const TaskSpec& spec, const rbd::RobotModel& model);
std::unique_ptr<constraint::Constraint> makeConstraint(const ConstraintSpec& spec, const rbd::RobotModel& model);

/// Tasks listed in compound_task, in declaration order of the tasks block.
task::CompoundTask buildCompoundTask(const ControllerSpec& spec, const rbd::RobotModel& model);
/// Constraints listed in constraint_set, in constraint_set order.
constraint::ConstraintSet buildConstraintSet(const ControllerSpec& spec, const rbd::RobotModel& model);

control::LimitFlags limitFlags(const FrameworkSpec& framework, int joints);

/// Robot-dependent checks (mask and per-joint switch lengths). Throws ConfigError.
void checkAgainstRobot(const ControllerSpec& spec, const rbd::RobotModel& model);

}  // namespace wbc::config
