#include <gtest/gtest.h>

#include <random>

#include "support/dreamer.hpp"
#include "support/fixtures.hpp"
#include "support/task_helpers.hpp"
#include "wbc/control/limits.hpp"
#include "wbc/control/wbosc.hpp"
#include "wbc/linalg.hpp"
#include "wbc/task/tasks.hpp"

using namespace wbc;

namespace {

task::CompoundTask postureOnly(const rbd::RobotModel& model, const Vector& goal) {
  task::CompoundTask tasks;
  auto t = std::make_unique<task::JointPositionTask>("posture", model,
                                                     task::PidGains::uniform(model.jointCount(), 60.0, 0.0, 3.0));
  t->setInput("goalPosition", goal);
  test::refresh(*t, model);
  tasks.add(std::move(t), 0);
  return tasks;
}

rbd::RobotState measuredFrom(const rbd::RobotModel& model) {
  rbd::RobotState s(model.jointCount());
  model.actualPositions(s.position);
  model.actualVelocities(s.velocity);
  return s;
}

}  // namespace

TEST(Wbosc, ZeroGravityAndZeroErrorGivesZeroEffort) {
  auto model = test::makeModel("planar2");
  model.setWorldGravity(Vector3::Zero());
  Vector q(2);
  q << 0.3, -0.7;
  model.update(q, Vector::Zero(2));
  auto tasks = postureOnly(model, q);
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::Wbosc wbc(model, tasks);
  control::Command cmd(2);
  ASSERT_TRUE(wbc.compute(model, proj, tasks, measuredFrom(model), 1e-3, cmd).ok());
  EXPECT_LT(cmd.effort.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Wbosc, PendulumPostureHoldIsGravityTorque) {
  auto model = test::makeModel("pend1");
  model.update(Vector::Zero(1), Vector::Zero(1));
  auto tasks = postureOnly(model, Vector::Zero(1));
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::Wbosc wbc(model, tasks);
  control::Command cmd(1);
  ASSERT_TRUE(wbc.compute(model, proj, tasks, measuredFrom(model), 1e-3, cmd).ok());
  EXPECT_NEAR(cmd.effort[0], model.gravityForces()[0], 1e-12);
  EXPECT_NEAR(std::abs(cmd.effort[0]), 4.905, 1e-9);
}

TEST(Wbosc, NoEnabledTasksReported) {
  auto model = test::makeModel("planar2");
  auto tasks = postureOnly(model, Vector::Zero(2));
  tasks.entries()[0].task->setEnabled(false);
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::Wbosc wbc(model, tasks);
  EXPECT_EQ(wbc.computeTorque(model, proj, tasks).status, control::ComputeStatus::NoTasks);
}

TEST(Wbosc, SingleLevelMatchesDirectFormula) {
  auto model = test::makeModel("dreamer22");
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Vector q = test::dreamerNominalState(model);
    q.tail(model.jointCount()) += 0.2 * test::randomVelocities(model, rng).tail(model.jointCount());
    model.update(q, test::randomVelocities(model, rng));
    auto set = test::dreamerConstraints(model);
    constraint::ConstraintProjection proj(model, set);
    proj.update(model, set);

    task::CompoundTask tasks;
    for (const char* side : {"left", "right"}) {
      auto t = std::make_unique<task::CartesianPositionTask>(std::string(side) + "Hand", model,
                                                            std::string(side) + "_hand", Vector3::Zero(),
                                                            task::PidGains::uniform(3, 64.0, 0.0, 3.0));
      t->setInput("goalPosition", Vector3(0.3, 0.1, 1.2));
      test::refresh(*t, model);
      tasks.add(std::move(t), 0);
    }
    control::Wbosc wbc(model, tasks);
    ASSERT_TRUE(wbc.computeTorque(model, proj, tasks).ok());

    // direct: tau = Jt^T (Jt Phi Jt^T)^+ xdd + UNcBar^T (B + G)
    auto level = *tasks.aggregateLevel(0);
    const Matrix jt = level.first * proj.actuationInverse();
    const Matrix lambda = pseudoInverse(jt * proj.phi() * jt.transpose());
    const Vector direct = jt.transpose() * (lambda * level.second) +
                          proj.actuationInverse().transpose() * (model.coriolis() + model.gravityForces());
    EXPECT_LT((wbc.torque() - direct).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
  }
}

class PriorityLayout : public ::testing::TestWithParam<std::tuple<int, bool>> {};

TEST_P(PriorityLayout, LevelsDoNotInterfere) {
  const auto [levels, threeD] = GetParam();
  auto model = test::makeModel("dreamer22");
  std::mt19937_64 rng(levels * 10 + threeD);
  for (int trial = 0; trial < 5; ++trial) {
    Vector q = test::dreamerNominalState(model);
    if (trial > 0) q.tail(model.jointCount()) += 0.2 * test::randomVelocities(model, rng).tail(model.jointCount());
    model.update(q, Vector::Zero(model.dofCount()));
    auto set = test::dreamerConstraints(model);
    constraint::ConstraintProjection proj(model, set);
    proj.update(model, set);
    auto tasks = test::dreamerTasks(model, levels, threeD);
    ASSERT_EQ(tasks.levelCount(), levels);
    control::Wbosc wbc(model, tasks);
    ASSERT_TRUE(wbc.computeTorque(model, proj, tasks).ok());

    for (int j = 0; j < levels; ++j)
      for (int k = j + 1; k < levels; ++k) {
        const Matrix cross = wbc.projectedJacobian(j) * proj.phi() * wbc.projectedJacobian(k).transpose();
        EXPECT_LT(cross.norm(), 1e-8) << "levels " << j << "," << k << " trial " << trial;
      }
    for (int k = 0; k + 1 < levels; ++k) {
      const Matrix& p = wbc.projector(k);
      EXPECT_LT(test::maxAbs(p * p - p), 1e-9) << "projector " << k;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dreamer, PriorityLayout,
                         ::testing::Combine(::testing::Values(2, 3, 5), ::testing::Bool()));

TEST(Wbosc, HigherLevelUnaffectedByLowerLevelCommand) {
  // Changing the posture goal must not change the hand accelerations.
  auto model = test::makeModel("dreamer22");
  model.update(test::dreamerNominalState(model), Vector::Zero(model.dofCount()));
  auto set = test::dreamerConstraints(model);
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  auto tasks = test::dreamerTasks(model, 2, false);
  control::Wbosc wbc(model, tasks);
  ASSERT_TRUE(wbc.computeTorque(model, proj, tasks).ok());
  const Vector tau1 = wbc.torque();
  auto* posture = tasks.find("posture");
  posture->setInput("goalPosition", Vector::Constant(model.jointCount(), 0.3));
  test::refresh(*posture, model);
  ASSERT_TRUE(wbc.computeTorque(model, proj, tasks).ok());
  const Vector tau2 = wbc.torque();
  const Vector dq = model.massMatrixInverse() * model.underactuation().transpose() * (tau2 - tau1);
  const Vector dqc = proj.nullspace() * dq;
  auto level = *tasks.aggregateLevel(0);
  EXPECT_LT((level.first * dqc).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GT((tau2 - tau1).norm(), 1e-3);
}

TEST(WboscImpedance, FullRelaxationTracksMeasurement) {
  auto model = test::makeModel("planar2");
  Vector q(2);
  q << 0.4, 0.2;
  model.update(q, Vector::Zero(2));
  auto tasks = postureOnly(model, Vector::Zero(2));
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::WboscImpedance wbc(model, tasks, 1.0);
  control::Command cmd(2);
  auto measured = measuredFrom(model);
  ASSERT_TRUE(wbc.compute(model, proj, tasks, measured, 1e-3, cmd).ok());
  EXPECT_LT((cmd.position - measured.position).norm(), 1e-15);
  EXPECT_LT((cmd.velocity - measured.velocity).norm(), 1e-15);
}

TEST(WboscImpedance, BalancedTorqueKeepsInternalStateStill) {
  auto model = test::makeModel("planar2");
  Vector q(2);
  q << 0.4, 0.2;
  model.update(q, Vector::Zero(2));
  auto tasks = postureOnly(model, q);
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::WboscImpedance wbc(model, tasks, 0.0);
  control::Command cmd(2);
  auto measured = measuredFrom(model);
  for (int i = 0; i < 100; ++i) ASSERT_TRUE(wbc.compute(model, proj, tasks, measured, 1e-3, cmd).ok());
  EXPECT_LT((cmd.position - q).norm(), 1e-9);
  EXPECT_LT(cmd.velocity.norm(), 1e-9);
}

TEST(WboscImpedance, UnbalancedTorqueIntegrates) {
  auto model = test::makeModel("pend1");
  model.update(Vector::Zero(1), Vector::Zero(1));
  auto tasks = postureOnly(model, Vector::Constant(1, 0.5));
  constraint::ConstraintSet set;
  constraint::ConstraintProjection proj(model, set);
  proj.update(model, set);
  control::WboscImpedance wbc(model, tasks, 0.0);
  control::Command cmd(1);
  auto measured = measuredFrom(model);
  ASSERT_TRUE(wbc.compute(model, proj, tasks, measured, 1e-3, cmd).ok());
  // posture command 60 * 0.5 = 30 rad/s^2 for one step
  EXPECT_NEAR(cmd.velocity[0], 30.0 * 1e-3, 1e-9);
  EXPECT_NEAR(cmd.position[0], 30.0 * 1e-6, 1e-12);
}

TEST(Limits, TruncatesEnabledClassesAndWarns) {
  auto desc = test::loadRobot("planar2");
  control::LimitFlags flags;
  flags.effort = {true, false};
  flags.maxEffortCommand = 150.0;
  control::LimitEnforcer enforcer(desc, flags);
  control::Command cmd(2);
  cmd.effort << 120.0, 160.0;
  control::WarningSink sink;
  enforcer.apply(cmd, sink);
  EXPECT_DOUBLE_EQ(cmd.effort[0], 100.0);
  EXPECT_DOUBLE_EQ(cmd.effort[1], 160.0);
  ASSERT_EQ(sink.size(), 2u);
  EXPECT_EQ(sink[0].kind, control::LimitKind::Effort);
  EXPECT_EQ(sink[1].kind, control::LimitKind::MaxEffort);
  EXPECT_EQ(sink[1].joint, 1);
}

TEST(Limits, DisabledEnforcementLeavesCommandAlone) {
  auto desc = test::loadRobot("planar2");
  control::LimitEnforcer enforcer(desc, {});
  control::Command cmd(2);
  cmd.effort << 500.0, -500.0;
  control::WarningSink sink;
  enforcer.apply(cmd, sink);
  EXPECT_DOUBLE_EQ(cmd.effort[0], 500.0);
  EXPECT_EQ(sink.size(), 0u);
}

TEST(Limits, SinkCountsOverflow) {
  control::WarningSink sink;
  for (int i = 0; i < 70; ++i) sink.push({i, control::LimitKind::Effort, 0, 0});
  EXPECT_EQ(sink.size(), control::WarningSink::kCapacity);
  EXPECT_EQ(sink.dropped(), 6u);
}
