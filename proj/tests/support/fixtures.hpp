#pragma once

#include <random>
#include <string>

#include "wbc/rbd/model.hpp"

namespace wbc::test {

std::string fixturePath(const std::string& relative);
std::string readFixture(const std::string& relative);
rbd::RobotDescription loadRobot(const std::string& name);
rbd::RobotModel makeModel(const std::string& name);

// Joint positions inside the description limits (virtual DOFs within +-0.5),
// velocities within +-1.
Vector randomPositions(const rbd::RobotModel& model, std::mt19937_64& rng);
Vector randomVelocities(const rbd::RobotModel& model, std::mt19937_64& rng);

// Infinity-norm helper for matrix comparisons.
inline double maxAbs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace wbc::test

#include "wbc/constraint/constraint.hpp"

namespace wbc::test {

// Base weld plus the 1:1 torso transmission used throughout the dreamer22 tests.
constraint::ConstraintSet dreamerConstraints(const rbd::RobotModel& model);

}  // namespace wbc::test
