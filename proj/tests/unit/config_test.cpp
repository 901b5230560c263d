#include <gtest/gtest.h>

#include <random>
#include <typeinfo>

#include <yaml-cpp/yaml.h>

#include "support/fixtures.hpp"
#include "wbc/config/build.hpp"
#include "wbc/config/spec.hpp"
#include "wbc/param/expression.hpp"

namespace wbc {
namespace {

using config::ControllerSpec;

const char* kGoldens[] = {"dreamer_disassembly.yaml", "dreamer_posture.yaml",   "pend1_posture.yaml",
                          "dreamer_2level_2d.yaml",   "dreamer_2level_3d.yaml", "dreamer_3level_2d.yaml",
                          "dreamer_3level_3d.yaml",   "dreamer_5level_2d.yaml", "dreamer_5level_3d.yaml"};

ControllerSpec golden(const std::string& name) { return config::loadFile(test::fixturePath("configs/" + name)); }

const char* kMinimal = R"(
tasks:
  - name: posture
    type: JointPositionTask
compound_task:
  - name: posture
    priority: 0
    operational_state: enable
)";

TEST(Config, GoldenFixturesLoadWithoutWarnings) {
  for (const char* name : kGoldens) {
    SCOPED_TRACE(name);
    ControllerSpec spec;
    ASSERT_NO_THROW(spec = golden(name));
    EXPECT_TRUE(spec.warnings.empty());
  }
}

TEST(Config, DisassemblyShape) {
  const auto spec = golden("dreamer_disassembly.yaml");
  EXPECT_EQ(spec.tasks.size(), 5u);
  EXPECT_EQ(spec.constraints.size(), 2u);
  int top = 0;
  for (const auto& e : spec.compoundTask) top += e.priority == 0;
  EXPECT_EQ(top, 4);
  EXPECT_EQ(spec.findTask("jPosTask")->type, "JointPositionTask");
  EXPECT_EQ(spec.constraintSet.size(), 2u);
  EXPECT_EQ(spec.bindings.size(), 5u);
  EXPECT_EQ(spec.bindings[2].properties.at("publish_rate"), "100");
  EXPECT_EQ(spec.events.size(), 2u);
  EXPECT_EQ(spec.framework.controllerName, "dreamer");
  EXPECT_TRUE(spec.framework.enforceEffortLimits.all);
}

TEST(Config, Defaults) {
  const auto spec = config::load(kMinimal);
  EXPECT_EQ(spec.framework.servoFrequency, 1000.0);
  EXPECT_EQ(spec.framework.worldGravity, Vector3(0.0, 0.0, -9.81));
  EXPECT_EQ(spec.framework.controllerType, config::ControllerType::Wbosc);
  EXPECT_EQ(spec.framework.robotInterface, sim::InterfaceKind::Lockstep);
  EXPECT_EQ(spec.framework.servoClock, "lockstep");
  EXPECT_FALSE(spec.framework.singleThreadedModel);
  EXPECT_FALSE(spec.framework.singleThreadedTasks);
}

TEST(Config, DanglingReferenceNamesTheTask) {
  std::string text = kMinimal;
  text.replace(text.rfind("posture"), 7, "ghost");
  try {
    config::load(text);
    FAIL() << "expected a dangling reference";
  } catch (const config::DanglingReferenceError& e) {
    EXPECT_EQ(e.name(), "ghost");
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    EXPECT_EQ(e.line(), 6);
  }
}

TEST(Config, EmptyCompoundTaskRejected) {
  EXPECT_THROW(config::load("tasks:\n  - name: a\n    type: COMTask\ncompound_task: []\n"), config::ConfigError);
  EXPECT_THROW(config::load("tasks:\n  - name: a\n    type: COMTask\n"), config::ConfigError);
}

TEST(Config, UnknownKeyCarriesLocation) {
  std::string text = std::string(kMinimal) + "controlit:\n  servo_frequency: 500\n  sevro_clock_type: lockstep\n";
  try {
    config::load(text);
    FAIL();
  } catch (const config::UnknownKeyError& e) {
    EXPECT_EQ(e.line(), 11);
    EXPECT_EQ(e.column(), 3);
    EXPECT_NE(std::string(e.what()).find("sevro_clock_type"), std::string::npos);
  }
}

TEST(Config, IgnoredFrameworkKeysWarn) {
  const auto spec = config::load(std::string(kMinimal) + "controlit:\n  log_fields: [a, b]\n  coupled_joint_groups: []\n");
  EXPECT_EQ(spec.warnings.size(), 2u);
}

TEST(Config, ConstraintSetTypeMayBeOmittedOrRepeated) {
  const auto spec = golden("dreamer_disassembly.yaml");
  EXPECT_EQ(spec.constraintSet[0].type, "FlatContactConstraint");
  EXPECT_TRUE(golden("dreamer_posture.yaml").constraintSet[0].type.empty());
}

// Every mutation fixture raises exactly the class its manifest names.
TEST(Config, MutationFixturesRaiseDocumentedClasses) {
  const YAML::Node manifest = YAML::LoadFile(test::fixturePath("configs/bad/manifest.yaml"));
  ASSERT_GE(manifest.size(), 20u);
  std::set<std::string> classesSeen;
  for (const auto& kv : manifest) {
    const std::string file = kv.first.as<std::string>();
    const std::string expected = kv.second.as<std::string>();
    SCOPED_TRACE(file);
    std::string actual = "none";
    try {
      config::loadFile(test::fixturePath("configs/bad/" + file));
    } catch (const config::DanglingReferenceError&) {
      actual = "DanglingReferenceError";
    } catch (const config::UnknownTypeError&) {
      actual = "UnknownTypeError";
    } catch (const config::UnknownKeyError&) {
      actual = "UnknownKeyError";
    } catch (const config::ConfigError&) {
      actual = "ConfigError";
    } catch (const param::ExpressionError&) {
      actual = "ExpressionError";
    } catch (const ParseError&) {
      actual = "ParseError";
    } catch (const std::exception& e) {
      actual = std::string("other: ") + e.what();
    }
    EXPECT_EQ(actual, expected);
    classesSeen.insert(actual);
  }
  EXPECT_EQ(classesSeen.size(), 6u);
}

TEST(Config, GoldenSerializeFixpoint) {
  for (const char* name : kGoldens) {
    SCOPED_TRACE(name);
    const auto spec = golden(name);
    const std::string once = config::serialize(spec);
    const auto again = config::load(once);
    EXPECT_TRUE(again == spec);
    EXPECT_EQ(config::serialize(again), once);
  }
}

// Random specs exercise the serializer on values the fixtures never contain.
ControllerSpec randomSpec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> real(-1e3, 1e3);
  std::uniform_int_distribution<int> small(0, 4);
  auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };
  auto vec = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = real(rng) * std::pow(10.0, small(rng) - 2);
    return v;
  };

  ControllerSpec s;
  const std::vector<std::string> types{"JointPositionTask", "CartesianPositionTask", "OrientationTask2D",
                                       "OrientationTask3D", "COMTask"};
  const int count = 1 + small(rng);
  for (int i = 0; i < count; ++i) {
    config::TaskSpec t;
    t.name = "task" + std::to_string(i);
    t.type = types[small(rng)];
    const auto& schema = config::taskSchemas().at(t.type);
    for (const auto& key : schema.required) t.parameters[key] = std::string(coin() ? "link_7" : "42");
    for (const auto& key : schema.optional) {
      if (!coin()) continue;
      if (coin()) {
        t.parameters[key] = vec(1 + small(rng));
      } else {
        t.parameters[key] = real(rng) / 7.0;
      }
    }
    s.tasks.push_back(t);
    if (i == 0 || coin()) s.compoundTask.push_back({t.name, small(rng), i == 0 || coin()});
  }
  if (coin()) {
    s.constraints.push_back({"weld", "FlatContactConstraint", {{"link", std::string("base")}}});
    s.constraints.push_back({"tx", "CoactuationConstraint",
                             {{"master", std::string("a")}, {"slave", std::string("b")}, {"transmissionRatio", -0.5}}});
    s.constraintSet.push_back({"tx", coin() ? "CoactuationConstraint" : "", coin()});
    s.constraintSet.push_back({"weld", "", true});
  }
  if (coin()) {
    param::BindingConfig b;
    b.parameter = "task0.kp";
    b.direction = coin() ? param::Direction::Input : param::Direction::Output;
    b.transportType = coin() ? "udp" : "intra";
    b.topic = "a/b c";
    b.properties["publish_rate"] = "12.5";
    b.properties["note"] = "x=y";
    s.bindings.push_back(b);
  }
  if (coin()) s.events.push_back({"ev", "abs(task0.kp - 2) <= 1e-3 || !(true)"});
  auto& f = s.framework;
  f.servoFrequency = 1.0 + std::abs(real(rng));
  f.singleThreadedModel = coin();
  f.worldGravity = vec(3);
  if (coin()) f.gravityCompensationMask = vec(3);
  f.enforcePositionLimits.all = coin();
  if (coin()) f.enforceEffortLimits.perJoint = {true, false, true};
  if (coin()) f.maxEffortCommand = 1.0 + std::abs(real(rng));
  f.controllerType = coin() ? config::ControllerType::Wbosc : config::ControllerType::WboscImpedance;
  f.robotInterface = coin() ? sim::InterfaceKind::Freerun : sim::InterfaceKind::Lockstep;
  f.servoClock = f.robotInterface == sim::InterfaceKind::Lockstep || coin() ? "lockstep" : "monotonic";
  f.controllerName = coin() ? "true" : "ctl";
  f.impedanceRelaxation = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  f.positionKp = real(rng);
  f.simLatencyCycles = small(rng);
  f.simNoise.velocity = 1e-3 * small(rng);
  f.simSeed = static_cast<std::uint64_t>(small(rng)) * 1000;
  f.udpPort = 40000 + small(rng);
  return s;
}

TEST(Config, RandomSpecsRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = randomSpec(rng);
    const std::string text = config::serialize(spec);
    ControllerSpec back;
    ASSERT_NO_THROW(back = config::load(text)) << text;
    ASSERT_TRUE(back == spec) << text;
  }
}

TEST(Config, DiffDisablePosture) {
  const auto from = golden("dreamer_disassembly.yaml");
  auto to = from;
  to.compoundTask.back().enabled = false;
  const auto actions = config::specDiff(from, to);
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0], (config::Action{config::Action::Kind::DisableTask, "jPosTask", 1}));
  EXPECT_TRUE(config::specDiff(from, from).empty());
}

TEST(Config, DiffMoveOrientationsToMiddleLevel) {
  const auto from = golden("dreamer_2level_2d.yaml");
  const auto to = golden("dreamer_3level_2d.yaml");
  const auto actions = config::specDiff(from, to);
  // orientations 0 -> 1, posture 1 -> 2
  std::vector<std::string> moved;
  for (const auto& a : actions) {
    EXPECT_EQ(a.kind, config::Action::Kind::SetPriority);
    moved.push_back(a.name);
  }
  EXPECT_EQ(moved, (std::vector<std::string>{"rightHandOrientation", "leftHandOrientation", "jPosTask"}));

  auto only = from;
  for (auto& e : only.compoundTask)
    if (e.name.find("Orientation") != std::string::npos) e.priority = 1;
  EXPECT_EQ(config::specDiff(from, only).size(), 2u);
}

TEST(Config, DiffRejectsStructuralChanges) {
  const auto from = golden("dreamer_disassembly.yaml");
  auto added = from;
  added.tasks.push_back({"com", "COMTask", {}});
  added.compoundTask.push_back({"com", 2, true});
  EXPECT_THROW(config::specDiff(from, added), config::ConfigError);
  auto retuned = from;
  retuned.framework.servoFrequency = 500.0;
  EXPECT_THROW(config::specDiff(from, retuned), config::ConfigError);
  auto toggled = from;
  toggled.constraintSet[1].enabled = false;
  const auto actions = config::specDiff(from, toggled);
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0].kind, config::Action::Kind::DisableConstraint);
}

TEST(Config, BuildsDisassemblyController) {
  auto model = test::makeModel("dreamer22");
  const auto spec = golden("dreamer_disassembly.yaml");
  config::checkAgainstRobot(spec, model);
  auto tasks = config::buildCompoundTask(spec, model);
  EXPECT_EQ(tasks.size(), 5u);
  EXPECT_EQ(tasks.levelCount(), 2);
  EXPECT_EQ(tasks.levelCapacity(0), 3 + 3 + 2 + 2);
  EXPECT_EQ(tasks.levelCapacity(1), 16);
  const Vector* goal = tasks.find("rightHandPosition")->findInput("goalPosition");
  ASSERT_NE(goal, nullptr);
  EXPECT_EQ(*goal, Vector3(0.41, -0.30, 1.28));
  EXPECT_EQ(*tasks.find("jPosTask")->findInput("kp"), Vector::Constant(16, 60.0));
  auto set = config::buildConstraintSet(spec, model);
  EXPECT_EQ(set.constraints().size(), 2u);
  EXPECT_EQ(set.capacity(), 7);
  EXPECT_TRUE(set.isConstrained("torso_upper_pitch"));
}

TEST(Config, BuildRejectsRobotMismatches) {
  auto model = test::makeModel("dreamer22");
  auto spec = golden("dreamer_disassembly.yaml");
  spec.tasks[0].parameters["link"] = std::string("tail");
  EXPECT_THROW(config::buildCompoundTask(spec, model), config::DanglingReferenceError);
  spec = golden("dreamer_disassembly.yaml");
  spec.tasks[0].parameters["goalPosition"] = Vector(Vector::Zero(4));
  EXPECT_THROW(config::buildCompoundTask(spec, model), config::ConfigError);
  spec = golden("dreamer_disassembly.yaml");
  spec.framework.gravityCompensationMask = Vector::Ones(3);
  EXPECT_THROW(config::checkAgainstRobot(spec, model), config::ConfigError);
  spec.framework.gravityCompensationMask = Vector::Ones(16);
  spec.framework.enforceVelocityLimits.perJoint = {true};
  EXPECT_THROW(config::checkAgainstRobot(spec, model), config::ConfigError);
}

}  // namespace
}  // namespace wbc
