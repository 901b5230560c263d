#include "wbc/control/limits.hpp"

#include <cmath>

namespace wbc::control {

std::string_view toString(LimitKind kind) {
  switch (kind) {
    case LimitKind::Effort: return "effort";
    case LimitKind::Position: return "position";
    case LimitKind::Velocity: return "velocity";
    case LimitKind::MaxEffort: return "max_effort_command";
  }
  return "?";
}

LimitEnforcer::LimitEnforcer(const rbd::RobotDescription& description, LimitFlags flags) : flags_(std::move(flags)) {
  const auto joints = description.realJoints();
  const auto m = static_cast<Eigen::Index>(joints.size());
  auto fit = [m](std::vector<bool>& v, const char* what) {
    if (v.empty()) v.assign(m, false);
    requireSize(static_cast<Eigen::Index>(v.size()), m, what);
  };
  fit(flags_.effort, "enforce_effort_limits");
  fit(flags_.position, "enforce_position_limits");
  fit(flags_.velocity, "enforce_velocity_limits");
  lower_.resize(m);
  upper_.resize(m);
  velocity_.resize(m);
  effort_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lower_(i) = joints[i]->limits.lower;
    upper_(i) = joints[i]->limits.upper;
    velocity_(i) = joints[i]->limits.velocity;
    effort_(i) = joints[i]->limits.effort;
  }
}

void LimitEnforcer::apply(Command& command, WarningSink& warnings) const {
  const auto m = command.effort.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const int joint = static_cast<int>(i);
    double& effort = command.effort(i);
    if (std::abs(effort) > flags_.maxEffortCommand) {
      warnings.push({joint, LimitKind::MaxEffort, effort, flags_.maxEffortCommand});
    }
    if (flags_.effort[i] && std::abs(effort) > effort_(i)) {
      warnings.push({joint, LimitKind::Effort, effort, effort_(i)});
      effort = std::copysign(effort_(i), effort);
    }
    if (flags_.position[i]) {
      double& p = command.position(i);
      if (p < lower_(i) || p > upper_(i)) {
        const double limit = p < lower_(i) ? lower_(i) : upper_(i);
        warnings.push({joint, LimitKind::Position, p, limit});
        p = limit;
      }
    }
    if (flags_.velocity[i]) {
      double& v = command.velocity(i);
      if (std::abs(v) > velocity_(i)) {
        warnings.push({joint, LimitKind::Velocity, v, velocity_(i)});
        v = std::copysign(velocity_(i), v);
      }
    }
  }
}

}  // namespace wbc::control
