#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "support/fixtures.hpp"
#include "wbc/sim/interface.hpp"

using namespace wbc;

namespace {

control::Command effortCommand(int n, double value) {
  control::Command c(n);
  c.effort.setConstant(value);
  return c;
}

}  // namespace

TEST(Lockstep, ZeroLatencyReadEqualsPlant) {
  sim::Plant plant(test::loadRobot("planar2"), {});
  Vector q(2);
  q << 0.2, 0.1;
  plant.reset(q, Vector::Zero(2));
  sim::LockstepInterface iface(plant, {});
  rbd::RobotState s;
  for (int k = 0; k < 20; ++k) {
    ASSERT_TRUE(iface.read(s));
    EXPECT_EQ(s.position, plant.position());
    EXPECT_EQ(s.velocity, plant.velocity());
    iface.write(effortCommand(2, 1.0));
    iface.advance(1e-3);
  }
}

TEST(Lockstep, LatencyIsRoundTripCycles) {
  // A step in commanded torque first shows in the state read L + 1 cycles later.
  for (int latency : {0, 1, 4, 7}) {
    auto desc = test::loadRobot("pend1");
    desc.gravity.setZero();
    sim::Plant plant(desc, {});
    plant.reset(Vector::Zero(1), Vector::Zero(1));
    sim::InterfaceSpec spec;
    spec.latencyCycles = latency;
    sim::LockstepInterface iface(plant, spec);
    rbd::RobotState s;
    int firstMotion = -1;
    const int stepCycle = 10;
    for (int k = 0; k < 40; ++k) {
      iface.read(s);
      if (firstMotion < 0 && s.velocity[0] != 0.0) firstMotion = k;
      iface.write(effortCommand(1, k >= stepCycle ? 1.0 : 0.0));
      iface.advance(1e-3);
    }
    EXPECT_EQ(firstMotion - stepCycle, latency + 1) << "latency " << latency;
  }
}

TEST(Lockstep, PositionNoiseHasConfiguredSpread) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  sim::InterfaceSpec spec;
  spec.noise.position = 0.001;
  spec.seed = 42;
  sim::LockstepInterface iface(plant, spec);
  rbd::RobotState s;
  const int n = 10000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    iface.read(s);
    sum += s.position[0];
    sq += s.position[0] * s.position[0];
    EXPECT_EQ(s.velocity[0], 0.0);
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd, 0.001, 0.0001);
}

TEST(Freerun, StepsInBackgroundWithoutBlockingReads) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  plant.reset(Vector::Zero(1), Vector::Zero(1));
  sim::FreerunInterface iface(plant, {}, 1e-3);
  iface.start();
  rbd::RobotState s;
  auto model = test::makeModel("pend1");
  model.update(Vector::Zero(1), Vector::Zero(1));
  const auto end = std::chrono::steady_clock::now() + std::chrono::milliseconds(200);
  while (std::chrono::steady_clock::now() < end) {
    iface.read(s);
    iface.write(effortCommand(1, model.gravityForces()[0]));
    std::this_thread::sleep_for(std::chrono::microseconds(500));
  }
  iface.stop();
  EXPECT_GT(iface.steps(), 50u);
  EXPECT_LT(std::abs(s.position[0]), 1e-3);
}

TEST(UdpRemote, ClosedLoopOverLoopback) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  plant.reset(Vector::Zero(1), Vector::Zero(1));
  sim::UdpRemoteInterface iface(1, 0, "127.0.0.1", 0);
  sim::RemotePlantServer server2(plant, 1e-3, 0, "127.0.0.1", iface.port(), 0.05);
  iface.setPlant("127.0.0.1", server2.port());
  server2.start();
  rbd::RobotState s;
  ASSERT_TRUE(iface.waitForState(s, 2.0));
  EXPECT_EQ(s.size(), 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(150));
  server2.stop();
  // nothing was ever written, so the plant timed out once and held the zero command
  EXPECT_EQ(server2.timeouts(), 1u);
  EXPECT_EQ(server2.commandsReceived(), 0u);
}

TEST(UdpRemote, CommandsReachThePlant) {
  sim::Plant plant(test::loadRobot("pend1"), {});
  plant.reset(Vector::Zero(1), Vector::Zero(1));
  param::UdpSocket probe(0);
  sim::RemotePlantServer server(plant, 1e-3, 0, "127.0.0.1", probe.port(), 1.0);
  sim::UdpRemoteInterface iface(1, 0, "127.0.0.1", server.port());
  server.start();
  for (int i = 0; i < 20; ++i) {
    iface.write(effortCommand(1, 0.5));
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  server.stop();
  EXPECT_GT(server.commandsReceived(), 0u);
  EXPECT_EQ(server.timeouts(), 0u);
  EXPECT_TRUE(probe.receive(0.5).has_value());
}

TEST(UdpRemote, PackingRoundTrip) {
  rbd::RobotState s(3);
  s.timestamp = 1.25;
  s.position << 1, 2, 3;
  s.velocity << 4, 5, 6;
  s.effort << 7, 8, 9;
  rbd::RobotState t(3);
  ASSERT_TRUE(sim::unpackState(sim::packState(s), t));
  EXPECT_EQ(t.position, s.position);
  EXPECT_EQ(t.effort, s.effort);
  EXPECT_EQ(t.timestamp, 1.25);
  EXPECT_FALSE(sim::unpackState(Vector::Zero(4), t));
}
