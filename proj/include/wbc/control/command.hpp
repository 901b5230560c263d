#pragma once

#include "wbc/common.hpp"

namespace wbc::control {

/// Per-joint output of a whole-body controller.
struct Command {
  Vector position, velocity, effort;
  Vector positionKp, positionKd;  // zero unless the controller drives joint impedance

  Command() = default;
  explicit Command(int joints) { resize(joints); }
  void resize(int joints) {
    position.setZero(joints);
    velocity.setZero(joints);
    effort.setZero(joints);
    positionKp.setZero(joints);
    positionKd.setZero(joints);
  }
  int size() const { return static_cast<int>(effort.size()); }
  bool finite() const { return effort.allFinite() && position.allFinite() && velocity.allFinite(); }
};

}  // namespace wbc::control
