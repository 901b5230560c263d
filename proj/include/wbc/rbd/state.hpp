#pragma once

#include "wbc/common.hpp"

namespace wbc::rbd {

/// Measured joint state of the real joints, description order.
struct RobotState {
  double timestamp = 0.0;
  Vector position, velocity, effort;

  RobotState() = default;
  explicit RobotState(int joints) { resize(joints); }
  void resize(int joints) {
    position.setZero(joints);
    velocity.setZero(joints);
    effort.setZero(joints);
  }
  int size() const { return static_cast<int>(position.size()); }
};

}  // namespace wbc::rbd
