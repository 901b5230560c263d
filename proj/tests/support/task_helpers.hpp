#pragma once

#include "wbc/task/task.hpp"

namespace wbc::test {

// Runs one latched update of a task against a model and makes it active.
inline const task::TaskState& refresh(task::Task& t, const rbd::RobotModel& model) {
  t.latchInputs();
  t.update(model);
  t.pullUpdate();
  return t.active();
}

}  // namespace wbc::test
