#pragma once

#include "wbc/rbd/model.hpp"
#include "wbc/task/compound_task.hpp"

namespace wbc::test {

// Arms bent in front of the torso, well away from joint limits.
Vector dreamerNominalPosture(const rbd::RobotModel& model);
Vector dreamerNominalState(const rbd::RobotModel& model);  // generalized q

// Two hand positions, two hand orientations and a posture task arranged over
// 2, 3 or 5 priority levels. Goals are the current pose of the (already
// updated) model.
task::CompoundTask dreamerTasks(const rbd::RobotModel& model, int levels, bool orientation3d);

}  // namespace wbc::test
