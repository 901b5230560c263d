#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/dreamer.hpp"
#include "support/fixtures.hpp"
#include "wbc/sim/plant.hpp"

using namespace wbc;

TEST(Plant, PendulumHeldByGravityTorque) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  plant.reset(Vector::Zero(1), Vector::Zero(1));
  // Oracle: m g lc = 1 * 9.81 * 0.5, sign from the gravity vector
  auto model = test::makeModel("pend1");
  model.update(Vector::Zero(1), Vector::Zero(1));
  const Vector hold = Vector::Constant(1, model.gravityForces()[0]);
  ASSERT_NEAR(std::abs(hold[0]), 9.81 * 0.5, 1e-12);
  for (int i = 0; i < 1000; ++i) plant.step(hold, 1e-3);
  EXPECT_LT(std::abs(plant.velocity()[0]), 1e-6);
  EXPECT_NEAR(plant.time(), 1.0, 1e-9);
}

TEST(Plant, ZeroTorqueZeroGravityStaysPut) {
  auto desc = test::loadRobot("planar2");
  desc.gravity.setZero();
  sim::Plant plant(desc, {});
  Vector q(2);
  q << 0.3, -0.2;
  plant.reset(q, Vector::Zero(2));
  for (int i = 0; i < 500; ++i) plant.step(Vector::Zero(2), 1e-3);
  EXPECT_EQ(plant.position(), q);
  EXPECT_EQ(plant.velocity(), Vector::Zero(2));
}

TEST(Plant, KineticEnergyConservedWithRk4) {
  auto desc = test::loadRobot("planar2");
  desc.gravity.setZero();
  sim::Plant plant(desc, {}, {sim::Integrator::RungeKutta4, false});
  Vector qd(2);
  qd << 1.0, -0.5;
  plant.reset(Vector::Zero(2), qd);
  const double e0 = plant.kineticEnergy();
  ASSERT_GT(e0, 0.0);
  for (int i = 0; i < 10000; ++i) plant.step(Vector::Zero(2), 1e-3);
  EXPECT_LT(std::abs(plant.kineticEnergy() - e0) / e0, 1e-3);
}

TEST(Plant, TotalEnergyConservedUnderGravity) {
  sim::Plant plant(test::loadRobot("planar2"), {}, {sim::Integrator::RungeKutta4, false});
  Vector q(2);
  q << 0.5, 0.3;
  plant.reset(q, Vector::Zero(2));
  const double e0 = plant.kineticEnergy() + plant.potentialEnergy();
  for (int i = 0; i < 3000; ++i) plant.step(Vector::Zero(2), 1e-3);
  const double e1 = plant.kineticEnergy() + plant.potentialEnergy();
  EXPECT_LT(std::abs(e1 - e0), 1e-4 * 9.81);
}

TEST(Plant, RejectsNonFiniteCommand) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  EXPECT_THROW(plant.step(Vector::Constant(1, std::nan("")), 1e-3), Error);
  EXPECT_THROW(plant.step(Vector::Zero(1), 0.0), Error);
  EXPECT_THROW(plant.step(Vector::Zero(2), 1e-3), DimensionError);
}

TEST(Plant, ClampsAtJointLimits) {
  auto desc = test::loadRobot("pend1");
  desc.joints[0].limits.lower = -0.1;
  desc.joints[0].limits.upper = 0.1;
  sim::Plant plant(desc, {});
  plant.reset(Vector::Zero(1), Vector::Zero(1));
  for (int i = 0; i < 2000; ++i) plant.step(Vector::Zero(1), 1e-3);
  EXPECT_TRUE(plant.limitClamped());
  EXPECT_LE(std::abs(plant.position()[0]), 0.1 + 1e-15);
}

TEST(Plant, DreamerWeldAndTransmission) {
  auto model = test::makeModel("dreamer22");
  auto set = test::dreamerConstraints(model);
  auto pc = sim::PlantConstraints::fromConstraintSet(set, model);
  EXPECT_TRUE(pc.weldBase);
  ASSERT_EQ(pc.transmissions.size(), 1u);
  sim::Plant plant(test::loadRobot("dreamer22"), pc);
  Vector q = test::dreamerNominalPosture(model);
  q[model.realJointIndex("torso_lower_pitch")] = 0.1;
  plant.reset(q, Vector::Zero(model.jointCount()));
  const int master = model.realJointIndex("torso_lower_pitch");
  const int slave = model.realJointIndex("torso_upper_pitch");
  EXPECT_NEAR(plant.position()[slave], 0.1, 1e-15);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> torque(0.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    Vector tau(model.jointCount());
    for (int j = 0; j < tau.size(); ++j) tau[j] = torque(rng);
    plant.step(tau, 1e-3);
    ASSERT_LT(std::abs(plant.position()[slave] - plant.position()[master]), 1e-9);
    ASSERT_LT(std::abs(plant.velocity()[slave] - plant.velocity()[master]), 1e-12);
    ASSERT_EQ(plant.fullPosition().head(6), Vector::Zero(6));
    ASSERT_EQ(plant.fullVelocity().head(6), Vector::Zero(6));
  }
}

TEST(Plant, PointContactHeldByProjection) {
  // planar2 with its tip pinned: the contact velocity stays zero.
  auto model = test::makeModel("planar2");
  sim::PlantConstraints pc;
  pc.contacts.push_back({"link2", false, Vector3(0.8, 0.0, 0.0)});
  sim::Plant plant(test::loadRobot("planar2"), pc);
  Vector q(2);
  q << 0.3, 0.6;
  Vector qd(2);
  qd << 1.0, 1.0;
  plant.reset(q, qd);
  for (int i = 0; i < 300; ++i) {
    plant.step(Vector::Zero(2), 1e-3);
    model.update(plant.fullPosition(), plant.fullVelocity());
    const Vector v = model.pointJacobian("link2", Vector3(0.8, 0.0, 0.0)) * plant.fullVelocity();
    ASSERT_LT(v.norm(), 1e-9);
  }
}
