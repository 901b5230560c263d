#include "support/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wbc::test {

std::string fixturePath(const std::string& relative) { return std::string(WBC_FIXTURE_DIR) + "/" + relative; }

std::string readFixture(const std::string& relative) {
  std::ifstream in(fixturePath(relative));
  if (!in) throw std::runtime_error("missing fixture " + relative);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

rbd::RobotDescription loadRobot(const std::string& name) {
  return rbd::loadDescriptionFile(fixturePath("robots/" + name + ".yaml"));
}

rbd::RobotModel makeModel(const std::string& name) { return rbd::RobotModel(loadRobot(name)); }

Vector randomPositions(const rbd::RobotModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector q(model.dofCount());
  for (int i : model.ordering().virtualIndices) q(i) = unit(rng) - 0.5;
  const auto joints = model.description().realJoints();
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const double lo = std::max(joints[j]->limits.lower, -3.0);
    const double hi = std::min(joints[j]->limits.upper, 3.0);
    q(model.ordering().realIndices[j]) = lo + (hi - lo) * unit(rng);
  }
  return q;
}

Vector randomVelocities(const rbd::RobotModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector qd(model.dofCount());
  for (Eigen::Index i = 0; i < qd.size(); ++i) qd(i) = dist(rng);
  return qd;
}

}  // namespace wbc::test

namespace wbc::test {

constraint::ConstraintSet dreamerConstraints(const rbd::RobotModel& model) {
  constraint::ConstraintSet set;
  set.add(std::make_unique<constraint::FlatContactConstraint>("baseContact", model, "torso_base"));
  set.add(std::make_unique<constraint::CoactuationConstraint>("torsoTransmission", model, "torso_lower_pitch",
                                                              "torso_upper_pitch", 1.0));
  return set;
}

}  // namespace wbc::test
