#pragma once

#include <string>
#include <vector>

#include "wbc/constraint/constraint.hpp"
#include "wbc/rbd/model.hpp"
#include "wbc/rbd/state.hpp"

namespace wbc::sim {

/// Constraints the plant enforces. Base welds and transmissions are built into
/// the independent coordinates; other contacts are enforced by projection.
struct PlantConstraints {
  struct Transmission {
    int master = -1;  // real-joint indices
    int slave = -1;
    double ratio = 1.0;
  };
  struct Contact {
    std::string link;
    bool flat = false;  // flat: 6 rows, else a 3-row point contact
    Vector3 point = Vector3::Zero();
  };

  bool weldBase = false;
  std::vector<Transmission> transmissions;
  std::vector<Contact> contacts;

  /// Mirrors the enabled constraints of a controller constraint set.
  static PlantConstraints fromConstraintSet(const constraint::ConstraintSet& set, const rbd::RobotModel& model);
};

enum class Integrator { SemiImplicitEuler, RungeKutta4 };

struct PlantOptions {
  Integrator integrator = Integrator::SemiImplicitEuler;
  bool clampLimits = true;
};

/// Torque-controlled rigid-body plant.
class Plant {
 public:
  Plant(rbd::RobotDescription description, PlantConstraints constraints, PlantOptions options = {});

  /// Sets the real-joint state; slaves are overwritten to satisfy transmissions.
  void reset(const Vector& position, const Vector& velocity);

  /// Advances by dt under the actuated effort vector. Throws on non-finite input.
  void step(const Vector& effort, double dt);

  int jointCount() const { return model_.jointCount(); }
  double time() const { return time_; }
  const Vector& fullPosition() const { return q_; }
  const Vector& fullVelocity() const { return qd_; }
  Vector position() const { return model_.underactuation() * q_; }
  Vector velocity() const { return model_.underactuation() * qd_; }
  const Vector& appliedEffort() const { return effort_; }
  void state(rbd::RobotState& out) const;

  /// True once any joint hit a position limit and was clamped.
  bool limitClamped() const { return limitClamped_; }
  double kineticEnergy();
  /// Gravitational potential relative to the world origin.
  double potentialEnergy();
  const rbd::RobotModel& model() const { return model_; }
  const PlantConstraints& constraints() const { return constraints_; }

 private:
  void enforceCoordinates();
  void accelerations(const Vector& z, const Vector& zd, Vector& zdd);
  void contactJacobian();
  void projectVelocity();

  rbd::RobotModel model_;
  PlantConstraints constraints_;
  PlantOptions options_;
  Matrix map_;          // n x nz: qd_full = map_ * zd
  Vector base_;         // q_full when z = 0
  Vector q_, qd_, z_, zd_, effort_;
  Vector lower_, upper_;  // per independent coordinate
  std::vector<int> independent_;  // full DOF index of each independent coordinate
  Matrix contactRows_, reducedContact_;
  Vector force_, rhs_;
  Matrix reducedMass_;
  double time_ = 0.0;
  bool limitClamped_ = false;
};

}  // namespace wbc::sim
