#include "support/dreamer.hpp"

#include <stdexcept>

#include "support/task_helpers.hpp"
#include "wbc/task/tasks.hpp"

namespace wbc::test {

Vector dreamerNominalPosture(const rbd::RobotModel& model) {
  Vector q = Vector::Zero(model.jointCount());
  for (const char* side : {"left", "right"}) {
    const std::string s(side);
    q[model.realJointIndex(s + "_shoulder_extensor")] = -0.4;
    q[model.realJointIndex(s + "_shoulder_abductor")] = s == "left" ? 0.2 : -0.2;
    q[model.realJointIndex(s + "_elbow")] = -1.2;
    q[model.realJointIndex(s + "_wrist_pitch")] = -0.3;
  }
  return q;
}

Vector dreamerNominalState(const rbd::RobotModel& model) {
  return model.underactuation().transpose() * dreamerNominalPosture(model);
}

task::CompoundTask dreamerTasks(const rbd::RobotModel& model, int levels, bool orientation3d) {
  int rightPos, leftPos, rightOri, leftOri, posture;
  switch (levels) {
    case 2: rightPos = leftPos = rightOri = leftOri = 0; posture = 1; break;
    case 3: rightPos = leftPos = 0; rightOri = leftOri = 1; posture = 2; break;
    case 5: rightPos = 0; leftPos = 1; rightOri = 2; leftOri = 3; posture = 4; break;
    default: throw std::invalid_argument("levels must be 2, 3 or 5");
  }
  const auto gains = [](int dim, double kp) { return task::PidGains::uniform(dim, kp, 0.0, 3.0); };

  task::CompoundTask tasks;
  auto hand = [&](const std::string& side, int priority) {
    auto t = std::make_unique<task::CartesianPositionTask>(side + "HandPosition", model, side + "_hand",
                                                          Vector3(0.0, 0.0, -0.05), gains(3, 64.0));
    t->latchInputs();
    t->update(model);
    t->pullUpdate();
    t->setInput("goalPosition", t->active().outputs.at(0));
    tasks.add(std::move(t), priority);
  };
  auto orient = [&](const std::string& side, int priority) {
    const std::string link = side + "_hand";
    if (orientation3d) {
      auto t = std::make_unique<task::OrientationTask3D>(side + "HandOrientation", model, link, gains(3, 60.0));
      Eigen::Quaterniond q(model.linkRotation(model.linkIndex(link)));
      t->setInput("goalOrientation", Eigen::Vector4d(q.w(), q.x(), q.y(), q.z()));
      tasks.add(std::move(t), priority);
    } else {
      const Vector3 body(1.0, 0.0, 0.0);
      auto t = std::make_unique<task::OrientationTask2D>(side + "HandOrientation", model, link, body, gains(2, 60.0));
      t->setInput("goalVector", model.linkRotation(model.linkIndex(link)) * body);
      tasks.add(std::move(t), priority);
    }
  };
  hand("right", rightPos);
  hand("left", leftPos);
  orient("right", rightOri);
  orient("left", leftOri);
  auto p = std::make_unique<task::JointPositionTask>("posture", model, gains(model.jointCount(), 60.0));
  p->setInput("goalPosition", dreamerNominalPosture(model));
  tasks.add(std::move(p), posture);
  for (const auto& e : tasks.entries()) refresh(*e.task, model);
  return tasks;
}

}  // namespace wbc::test
