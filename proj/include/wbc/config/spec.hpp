#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/common.hpp"
#include "wbc/param/binding.hpp"
#include "wbc/sim/interface.hpp"

namespace wbc::config {

/// Configuration problem located in the document (line/column 1-based, 0 if unknown).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : ValidationError(line > 0 ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                                 : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

/// A key the schema does not know.
class UnknownKeyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// compound_task / constraint_set / binding naming something never declared.
class DanglingReferenceError : public ConfigError {
 public:
  DanglingReferenceError(const std::string& what, std::string name, int line = 0, int column = 0)
      : ConfigError(what, line, column), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Task, constraint or transport type without a registered implementation.
class UnknownTypeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

using ParameterMap = std::map<std::string, param::ParamValue>;

bool valuesEqual(const param::ParamValue& a, const param::ParamValue& b);
bool mapsEqual(const ParameterMap& a, const ParameterMap& b);

struct TaskSpec {
  std::string name;
  std::string type;
  ParameterMap parameters;
  bool operator==(const TaskSpec& o) const { return name == o.name && type == o.type && mapsEqual(parameters, o.parameters); }
};
using ConstraintSpec = TaskSpec;

struct CompoundEntry {
  std::string name;
  int priority = 0;
  bool enabled = true;
  bool operator==(const CompoundEntry&) const = default;
};

struct ConstraintSetEntry {
  std::string name;
  std::string type;  // empty when omitted
  bool enabled = true;
  bool operator==(const ConstraintSetEntry&) const = default;
};

struct EventSpec {
  std::string name;
  std::string expression;
  bool operator==(const EventSpec&) const = default;
};

/// Either one switch for every joint or a per-joint list.
struct JointSwitch {
  bool all = false;
  std::vector<bool> perJoint;
  bool operator==(const JointSwitch&) const = default;
  std::vector<bool> expand(int joints) const;
};

enum class ControllerType { Wbosc, WboscImpedance };
std::string_view toString(ControllerType type);

/// Framework parameters from the `controlit:` block.
struct FrameworkSpec {
  double servoFrequency = 1000.0;
  bool singleThreadedModel = false;
  bool singleThreadedTasks = false;
  Vector3 worldGravity{0.0, 0.0, -9.81};
  Vector gravityCompensationMask;  // empty: every joint compensated
  JointSwitch enforceEffortLimits, enforcePositionLimits, enforceVelocityLimits;
  double maxEffortCommand = std::numeric_limits<double>::infinity();
  ControllerType controllerType = ControllerType::Wbosc;
  sim::InterfaceKind robotInterface = sim::InterfaceKind::Lockstep;
  std::string servoClock = "lockstep";  // lockstep | monotonic
  std::string logLevel = "info";

  // extensions
  std::string controllerName = "wbc";
  double impedanceRelaxation = 0.05;
  double positionKp = 0.0, positionKd = 0.0;
  double pinvTolerance = 1e-4;
  double stalenessWarnThreshold = 0.01;  // seconds
  int simLatencyCycles = 0;
  sim::NoiseSpec simNoise;
  std::uint64_t simSeed = 1;
  std::string remotePlantHost = "127.0.0.1";
  int remotePlantPort = 0;
  int remoteStatePort = 0;  // where the controller receives plant state
  int udpPort = 0;

  bool operator==(const FrameworkSpec& o) const;
};

struct ControllerSpec {
  std::vector<TaskSpec> tasks;
  std::vector<ConstraintSpec> constraints;
  std::vector<CompoundEntry> compoundTask;
  std::vector<ConstraintSetEntry> constraintSet;
  std::vector<param::BindingConfig> bindings;
  std::vector<EventSpec> events;
  FrameworkSpec framework;
  std::vector<std::string> warnings;  // accepted-but-ignored keys; not part of equality

  bool operator==(const ControllerSpec& o) const;
  const TaskSpec* findTask(std::string_view name) const;
  const ConstraintSpec* findConstraint(std::string_view name) const;
};

/// Allowed keys per registered task and constraint type.
struct TypeSchema {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};
const std::map<std::string, TypeSchema>& taskSchemas();
const std::map<std::string, TypeSchema>& constraintSchemas();

struct LoadOptions {
  std::vector<std::string> transportTypes{"intra", "udp", "file"};
};

/// Parses and validates a controller document. Throws ParseError (YAML or
/// expression syntax), UnknownKeyError, DanglingReferenceError,
/// UnknownTypeError or ConfigError.
ControllerSpec load(std::string_view text, const LoadOptions& options = {});
ControllerSpec loadFile(const std::string& path, const LoadOptions& options = {});

/// Emits the same document syntax; load(serialize(s)) == s.
std::string serialize(const ControllerSpec& spec);

struct Action {
  enum class Kind { EnableTask, DisableTask, SetPriority, EnableConstraint, DisableConstraint };
  Kind kind;
  std::string name;
  int priority = 0;
  bool operator==(const Action&) const = default;
};
std::string toString(const Action& action);

/// Runtime actions turning old into new. Throws ConfigError for changes
/// outside enable/disable/priority.
std::vector<Action> specDiff(const ControllerSpec& from, const ControllerSpec& to);

}  // namespace wbc::config
