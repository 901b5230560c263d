#include "wbc/config/spec.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wbc/param/expression.hpp"

namespace wbc::config {

namespace {

int line(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }
int column(const YAML::Node& n) { return n.Mark().column >= 0 ? n.Mark().column + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& at, const std::string& what) { throw ConfigError(what, line(at), column(at)); }

void requireMap(const YAML::Node& n, const std::string& what) {
  if (!n.IsMap()) fail(n, what + " must be a mapping");
}
void requireSequence(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list");
}

std::string scalarString(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
  return n.Scalar();
}

std::optional<double> asNumber(const YAML::Node& n) {
  if (!n.IsScalar() || n.Tag() == "!") return std::nullopt;
  const std::string& s = n.Scalar();
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  if (s == ".inf" || s == "+.inf") return std::numeric_limits<double>::infinity();
  if (s == "-.inf") return -std::numeric_limits<double>::infinity();
  return std::nullopt;
}

std::optional<bool> asBool(const YAML::Node& n) {
  if (!n.IsScalar() || n.Tag() == "!") return std::nullopt;
  const std::string& s = n.Scalar();
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  return std::nullopt;
}

double number(const YAML::Node& n, const std::string& key) {
  auto v = asNumber(n);
  if (!v) fail(n, "'" + key + "' must be a number");
  return *v;
}

bool boolean(const YAML::Node& n, const std::string& key) {
  auto v = asBool(n);
  if (!v) fail(n, "'" + key + "' must be true or false");
  return *v;
}

int integer(const YAML::Node& n, const std::string& key) {
  const double v = number(n, key);
  if (v != static_cast<double>(static_cast<long long>(v)) || std::abs(v) > 1e9) fail(n, "'" + key + "' must be an integer");
  return static_cast<int>(v);
}

Vector numberList(const YAML::Node& n, const std::string& key) {
  requireSequence(n, "'" + key + "'");
  Vector v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(n[i], key);
  return v;
}

param::ParamValue genericValue(const YAML::Node& n, const std::string& key) {
  if (n.IsSequence()) return numberList(n, key);
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar or a list of numbers");
  if (auto b = asBool(n)) return *b;
  if (auto d = asNumber(n)) return *d;
  return n.Scalar();
}

bool enableState(const YAML::Node& n) {
  const std::string s = scalarString(n, "operational_state");
  if (s == "enable" || s == "enabled") return true;
  if (s == "disable" || s == "disabled") return false;
  fail(n, "operational_state must be 'enable' or 'disable', got '" + s + "'");
}

void rejectUnknownKeys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& kv : map) {
    const std::string key = kv.first.Scalar();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw UnknownKeyError("unknown key '" + key + "' in " + where, line(kv.first), column(kv.first));
  }
}

std::vector<TaskSpec> parseTyped(const YAML::Node& list, const std::string& block,
                                 const std::map<std::string, TypeSchema>& schemas) {
  std::vector<TaskSpec> out;
  requireSequence(list, "'" + block + "'");
  std::set<std::string> seen;
  for (const auto& item : list) {
    requireMap(item, "each entry of '" + block + "'");
    if (!item["name"]) fail(item, "entry of '" + block + "' has no name");
    if (!item["type"]) fail(item, "entry of '" + block + "' has no type");
    TaskSpec spec;
    spec.name = scalarString(item["name"], "name");
    spec.type = scalarString(item["type"], "type");
    if (spec.name.empty() || spec.name.find_first_of(". \t") != std::string::npos)
      fail(item["name"], "name '" + spec.name + "' must be non-empty without dots or spaces");
    if (!seen.insert(spec.name).second) fail(item["name"], "duplicate name '" + spec.name + "' in '" + block + "'");
    auto schema = schemas.find(spec.type);
    if (schema == schemas.end())
      throw UnknownTypeError("unknown " + block.substr(0, block.size() - 1) + " type '" + spec.type + "'",
                             line(item["type"]), column(item["type"]));
    for (const auto& kv : item) {
      const std::string key = kv.first.Scalar();
      if (key == "name" || key == "type") continue;
      const auto& s = schema->second;
      if (std::find(s.required.begin(), s.required.end(), key) == s.required.end() &&
          std::find(s.optional.begin(), s.optional.end(), key) == s.optional.end())
        throw UnknownKeyError("unknown key '" + key + "' for " + spec.type + " '" + spec.name + "'", line(kv.first),
                              column(kv.first));
      spec.parameters[key] = genericValue(kv.second, key);
    }
    for (const auto& req : schema->second.required)
      if (!spec.parameters.count(req)) fail(item, spec.type + " '" + spec.name + "' requires '" + req + "'");
    out.push_back(std::move(spec));
  }
  return out;
}

JointSwitch jointSwitch(const YAML::Node& n, const std::string& key) {
  JointSwitch s;
  if (n.IsSequence()) {
    for (const auto& e : n) s.perJoint.push_back(boolean(e, key));
  } else {
    s.all = boolean(n, key);
  }
  return s;
}

void parseFramework(const YAML::Node& node, FrameworkSpec& f, std::vector<std::string>& warnings) {
  requireMap(node, "'controlit'");
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    const YAML::Node& v = kv.second;
    if (key == "servo_frequency") {
      f.servoFrequency = number(v, key);
      if (!(f.servoFrequency > 0.0) || !std::isfinite(f.servoFrequency)) fail(v, "servo_frequency must be positive");
    } else if (key == "single_threaded_model") {
      f.singleThreadedModel = boolean(v, key);
    } else if (key == "single_threaded_tasks") {
      f.singleThreadedTasks = boolean(v, key);
    } else if (key == "world_gravity") {
      const Vector g = numberList(v, key);
      if (g.size() != 3) fail(v, "world_gravity must have 3 entries");
      f.worldGravity = g;
    } else if (key == "gravity_compensation_mask") {
      f.gravityCompensationMask = numberList(v, key);
    } else if (key == "enforce_effort_limits") {
      f.enforceEffortLimits = jointSwitch(v, key);
    } else if (key == "enforce_position_limits") {
      f.enforcePositionLimits = jointSwitch(v, key);
    } else if (key == "enforce_velocity_limits") {
      f.enforceVelocityLimits = jointSwitch(v, key);
    } else if (key == "max_effort_command") {
      f.maxEffortCommand = number(v, key);
      if (!(f.maxEffortCommand > 0.0)) fail(v, "max_effort_command must be positive");
    } else if (key == "whole_body_controller_type") {
      const std::string s = scalarString(v, key);
      if (s == "WBOSC") {
        f.controllerType = ControllerType::Wbosc;
      } else if (s == "WBOSC_Impedance") {
        f.controllerType = ControllerType::WboscImpedance;
      } else {
        throw UnknownTypeError("unknown whole_body_controller_type '" + s + "'", line(v), column(v));
      }
    } else if (key == "robot_interface_type") {
      auto k = sim::interfaceKindFromString(scalarString(v, key));
      if (!k) throw UnknownTypeError("unknown robot_interface_type '" + v.Scalar() + "'", line(v), column(v));
      f.robotInterface = *k;
    } else if (key == "servo_clock_type") {
      const std::string s = scalarString(v, key);
      if (s == "lockstep" || s == "simulated-lockstep") {
        f.servoClock = "lockstep";
      } else if (s == "monotonic") {
        f.servoClock = "monotonic";
      } else {
        throw UnknownTypeError("unknown servo_clock_type '" + s + "'", line(v), column(v));
      }
    } else if (key == "log_level") {
      const std::string s = scalarString(v, key);
      static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
      if (!levels.count(s)) fail(v, "unknown log_level '" + s + "'");
      f.logLevel = s;
    } else if (key == "controller_name") {
      f.controllerName = scalarString(v, key);
      if (f.controllerName.empty()) fail(v, "controller_name must not be empty");
    } else if (key == "impedance_relaxation_factor") {
      f.impedanceRelaxation = number(v, key);
      if (f.impedanceRelaxation < 0.0 || f.impedanceRelaxation > 1.0) fail(v, "impedance_relaxation_factor must be in [0, 1]");
    } else if (key == "position_kp") {
      f.positionKp = number(v, key);
    } else if (key == "position_kd") {
      f.positionKd = number(v, key);
    } else if (key == "pinv_tolerance") {
      f.pinvTolerance = number(v, key);
      if (!(f.pinvTolerance > 0.0)) fail(v, "pinv_tolerance must be positive");
    } else if (key == "staleness_warn_threshold") {
      f.stalenessWarnThreshold = number(v, key);
      if (!(f.stalenessWarnThreshold > 0.0)) fail(v, "staleness_warn_threshold must be positive");
    } else if (key == "sim_latency_cycles") {
      f.simLatencyCycles = integer(v, key);
      if (f.simLatencyCycles < 0) fail(v, "sim_latency_cycles must be non-negative");
    } else if (key == "sim_noise_position" || key == "sim_noise_velocity" || key == "sim_noise_effort") {
      const double sigma = number(v, key);
      if (sigma < 0.0) fail(v, key + " must be non-negative");
      (key == "sim_noise_position" ? f.simNoise.position
                                   : key == "sim_noise_velocity" ? f.simNoise.velocity : f.simNoise.effort) = sigma;
    } else if (key == "sim_seed") {
      const int seed = integer(v, key);
      if (seed < 0) fail(v, "sim_seed must be non-negative");
      f.simSeed = static_cast<std::uint64_t>(seed);
    } else if (key == "remote_plant_host") {
      f.remotePlantHost = scalarString(v, key);
    } else if (key == "remote_plant_port") {
      f.remotePlantPort = integer(v, key);
      if (f.remotePlantPort < 0 || f.remotePlantPort > 65535) fail(v, "remote_plant_port out of range");
    } else if (key == "remote_state_port") {
      f.remoteStatePort = integer(v, key);
      if (f.remoteStatePort < 0 || f.remoteStatePort > 65535) fail(v, "remote_state_port out of range");
    } else if (key == "udp_port") {
      f.udpPort = integer(v, key);
      if (f.udpPort < 0 || f.udpPort > 65535) fail(v, "udp_port out of range");
    } else if (key == "coupled_joint_groups" || key == "log_fields" || key == "parameter_binding_factories") {
      warnings.push_back("controlit." + key + " is not supported and was ignored");
    } else {
      throw UnknownKeyError("unknown key '" + key + "' in 'controlit'", line(kv.first), column(kv.first));
    }
  }
  if (f.robotInterface == sim::InterfaceKind::Lockstep && f.servoClock != "lockstep")
    fail(node, "the sim-lockstep robot interface requires the lockstep servo clock");
}

param::Properties parseProperties(const YAML::Node& n) {
  param::Properties props;
  requireSequence(n, "'properties'");
  for (const auto& item : n) {
    const std::string s = scalarString(item, "properties");
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) fail(item, "property '" + s + "' must look like key=value");
    props[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return props;
}

std::string owner(const std::string& parameter) {
  const auto dot = parameter.find('.');
  return dot == std::string::npos ? std::string() : parameter.substr(0, dot);
}

}  // namespace

// ---- value helpers

bool valuesEqual(const param::ParamValue& a, const param::ParamValue& b) {
  if (a.index() != b.index()) return false;
  if (param::kindOf(a) == param::ParamKind::Vector) {
    const Vector &x = std::get<Vector>(a), &y = std::get<Vector>(b);
    return x.size() == y.size() && (x.array() == y.array()).all();
  }
  return a == b;
}

bool mapsEqual(const ParameterMap& a, const ParameterMap& b) {
  if (a.size() != b.size()) return false;
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
    if (i->first != j->first || !valuesEqual(i->second, j->second)) return false;
  return true;
}

std::vector<bool> JointSwitch::expand(int joints) const {
  if (perJoint.empty()) return std::vector<bool>(joints, all);
  if (static_cast<int>(perJoint.size()) != joints)
    throw ConfigError("per-joint limit switch has " + std::to_string(perJoint.size()) + " entries for " +
                      std::to_string(joints) + " joints");
  return perJoint;
}

std::string_view toString(ControllerType type) { return type == ControllerType::Wbosc ? "WBOSC" : "WBOSC_Impedance"; }

bool FrameworkSpec::operator==(const FrameworkSpec& o) const {
  auto maskEq = gravityCompensationMask.size() == o.gravityCompensationMask.size() &&
                (gravityCompensationMask.array() == o.gravityCompensationMask.array()).all();
  return servoFrequency == o.servoFrequency && singleThreadedModel == o.singleThreadedModel &&
         singleThreadedTasks == o.singleThreadedTasks && worldGravity == o.worldGravity && maskEq &&
         enforceEffortLimits == o.enforceEffortLimits && enforcePositionLimits == o.enforcePositionLimits &&
         enforceVelocityLimits == o.enforceVelocityLimits && maxEffortCommand == o.maxEffortCommand &&
         controllerType == o.controllerType && robotInterface == o.robotInterface && servoClock == o.servoClock &&
         logLevel == o.logLevel && controllerName == o.controllerName &&
         impedanceRelaxation == o.impedanceRelaxation && positionKp == o.positionKp && positionKd == o.positionKd &&
         pinvTolerance == o.pinvTolerance && stalenessWarnThreshold == o.stalenessWarnThreshold &&
         simLatencyCycles == o.simLatencyCycles && simNoise == o.simNoise && simSeed == o.simSeed &&
         remotePlantHost == o.remotePlantHost && remotePlantPort == o.remotePlantPort &&
         remoteStatePort == o.remoteStatePort && udpPort == o.udpPort;
}

bool ControllerSpec::operator==(const ControllerSpec& o) const {
  return tasks == o.tasks && constraints == o.constraints && compoundTask == o.compoundTask &&
         constraintSet == o.constraintSet && bindings == o.bindings && events == o.events && framework == o.framework;
}

const TaskSpec* ControllerSpec::findTask(std::string_view name) const {
  for (const auto& t : tasks)
    if (t.name == name) return &t;
  return nullptr;
}

const ConstraintSpec* ControllerSpec::findConstraint(std::string_view name) const {
  for (const auto& c : constraints)
    if (c.name == name) return &c;
  return nullptr;
}

const std::map<std::string, TypeSchema>& taskSchemas() {
  static const std::map<std::string, TypeSchema> schemas = [] {
    const std::vector<std::string> gains{"kp", "ki", "kd", "integratorLimit"};
    auto with = [&](std::vector<std::string> required, std::vector<std::string> extra) {
      TypeSchema s{std::move(required), gains};
      s.optional.insert(s.optional.end(), extra.begin(), extra.end());
      return s;
    };
    return std::map<std::string, TypeSchema>{
        {"JointPositionTask", with({}, {"goalPosition", "goalVelocity", "goalAcceleration"})},
        {"CartesianPositionTask", with({"link"}, {"point", "goalPosition", "goalVelocity", "goalAcceleration"})},
        {"OrientationTask2D", with({"link"}, {"bodyFrameVector", "goalVector"})},
        {"OrientationTask3D", with({"link"}, {"goalOrientation", "goalAngularVelocity"})},
        {"COMTask", with({}, {"goalPosition"})},
    };
  }();
  return schemas;
}

const std::map<std::string, TypeSchema>& constraintSchemas() {
  static const std::map<std::string, TypeSchema> schemas{
      {"FlatContactConstraint", {{"link"}, {}}},
      {"PointContactConstraint", {{"link"}, {"point"}}},
      {"CoactuationConstraint", {{"master", "slave"}, {"transmissionRatio"}}},
  };
  return schemas;
}

// ---- load

ControllerSpec load(std::string_view text, const LoadOptions& options) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("controller configuration must be a mapping");
  rejectUnknownKeys(root, {"tasks", "constraints", "compound_task", "constraint_set", "bindings", "events", "controlit"},
                    "the configuration");

  ControllerSpec spec;
  if (root["tasks"]) spec.tasks = parseTyped(root["tasks"], "tasks", taskSchemas());
  if (root["constraints"]) spec.constraints = parseTyped(root["constraints"], "constraints", constraintSchemas());

  const YAML::Node compound = root["compound_task"];
  if (!compound || compound.IsNull() || (compound.IsSequence() && compound.size() == 0))
    throw ConfigError("compound_task must list at least one task", compound ? line(compound) : 0,
                      compound ? column(compound) : 0);
  requireSequence(compound, "'compound_task'");
  std::set<std::string> used;
  for (const auto& item : compound) {
    requireMap(item, "each compound_task entry");
    rejectUnknownKeys(item, {"name", "priority", "operational_state"}, "compound_task");
    if (!item["name"] || !item["priority"]) fail(item, "compound_task entries need name and priority");
    CompoundEntry e;
    e.name = scalarString(item["name"], "name");
    if (!spec.findTask(e.name))
      throw DanglingReferenceError("compound_task references undeclared task '" + e.name + "'", e.name,
                                   line(item["name"]), column(item["name"]));
    if (!used.insert(e.name).second) fail(item["name"], "task '" + e.name + "' listed twice in compound_task");
    e.priority = integer(item["priority"], "priority");
    if (e.priority < 0) fail(item["priority"], "priority must be a non-negative integer");
    if (item["operational_state"]) e.enabled = enableState(item["operational_state"]);
    spec.compoundTask.push_back(e);
  }
  if (std::none_of(spec.compoundTask.begin(), spec.compoundTask.end(), [](const CompoundEntry& e) { return e.enabled; }))
    fail(compound, "compound_task has no enabled task");

  if (const YAML::Node set = root["constraint_set"]; set && !set.IsNull()) {
    requireSequence(set, "'constraint_set'");
    std::set<std::string> seen;
    for (const auto& item : set) {
      requireMap(item, "each constraint_set entry");
      rejectUnknownKeys(item, {"name", "type", "operational_state"}, "constraint_set");
      if (!item["name"]) fail(item, "constraint_set entries need a name");
      ConstraintSetEntry e;
      e.name = scalarString(item["name"], "name");
      const ConstraintSpec* c = spec.findConstraint(e.name);
      if (!c)
        throw DanglingReferenceError("constraint_set references undeclared constraint '" + e.name + "'", e.name,
                                     line(item["name"]), column(item["name"]));
      if (!seen.insert(e.name).second) fail(item["name"], "constraint '" + e.name + "' listed twice");
      if (item["type"]) {
        e.type = scalarString(item["type"], "type");
        if (e.type != c->type)
          fail(item["type"], "constraint_set type '" + e.type + "' disagrees with declared type '" + c->type + "'");
      }
      if (item["operational_state"]) e.enabled = enableState(item["operational_state"]);
      spec.constraintSet.push_back(e);
    }
  }

  if (const YAML::Node bindings = root["bindings"]; bindings && !bindings.IsNull()) {
    requireSequence(bindings, "'bindings'");
    for (const auto& item : bindings) {
      requireMap(item, "each binding");
      rejectUnknownKeys(item, {"parameter", "direction", "topic", "transport_type", "properties"}, "bindings");
      for (const char* k : {"parameter", "direction", "topic", "transport_type"})
        if (!item[k]) fail(item, std::string("binding is missing '") + k + "'");
      param::BindingConfig b;
      b.parameter = scalarString(item["parameter"], "parameter");
      const std::string ownerName = owner(b.parameter);
      if (!spec.findTask(ownerName) && !spec.findConstraint(ownerName))
        throw DanglingReferenceError("binding references parameter '" + b.parameter + "' of no declared task or constraint",
                                     b.parameter, line(item["parameter"]), column(item["parameter"]));
      auto dir = param::directionFromString(scalarString(item["direction"], "direction"));
      if (!dir) fail(item["direction"], "direction must be 'input' or 'output'");
      b.direction = *dir;
      b.topic = scalarString(item["topic"], "topic");
      if (b.topic.empty()) fail(item["topic"], "topic must not be empty");
      b.transportType = scalarString(item["transport_type"], "transport_type");
      if (std::find(options.transportTypes.begin(), options.transportTypes.end(), b.transportType) ==
          options.transportTypes.end())
        throw UnknownTypeError("unknown transport type '" + b.transportType + "'", line(item["transport_type"]),
                               column(item["transport_type"]));
      if (b.transportType == "file" && b.direction == param::Direction::Input)
        fail(item["direction"], "the file transport is output-only");
      if (item["properties"] && !item["properties"].IsNull()) b.properties = parseProperties(item["properties"]);
      if (auto it = b.properties.find("publish_rate"); it != b.properties.end()) {
        double rate = 0.0;
        try {
          std::size_t used = 0;
          rate = std::stod(it->second, &used);
          if (used != it->second.size()) rate = 0.0;
        } catch (const std::exception&) {
        }
        if (!(rate > 0.0)) fail(item["properties"], "publish_rate must be a positive number");
      }
      spec.bindings.push_back(std::move(b));
    }
  }

  if (const YAML::Node events = root["events"]; events && !events.IsNull()) {
    requireSequence(events, "'events'");
    std::set<std::string> seen;
    for (const auto& item : events) {
      requireMap(item, "each event");
      rejectUnknownKeys(item, {"name", "expression"}, "events");
      if (!item["name"] || !item["expression"]) fail(item, "events need a name and an expression");
      EventSpec e{scalarString(item["name"], "name"), scalarString(item["expression"], "expression")};
      if (!seen.insert(e.name).second) fail(item["name"], "duplicate event '" + e.name + "'");
      try {
        param::Expression::compile(e.expression);
      } catch (const param::ExpressionError& err) {
        throw param::ExpressionError("event '" + e.name + "': " + err.what(), err.offset());
      }
      spec.events.push_back(std::move(e));
    }
  }

  if (root["controlit"] && !root["controlit"].IsNull()) parseFramework(root["controlit"], spec.framework, spec.warnings);
  return spec;
}

ControllerSpec loadFile(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open controller configuration '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load(ss.str(), options);
}

// ---- serialize

namespace {

void emitValue(YAML::Emitter& out, const param::ParamValue& v) {
  switch (param::kindOf(v)) {
    case param::ParamKind::Scalar: out << std::get<double>(v); break;
    case param::ParamKind::Vector: {
      out << YAML::Flow << YAML::BeginSeq;
      for (double x : std::get<Vector>(v)) out << x;
      out << YAML::EndSeq;
      break;
    }
    case param::ParamKind::Bool: out << std::get<bool>(v); break;
    case param::ParamKind::String: out << YAML::DoubleQuoted << std::get<std::string>(v); break;
  }
}

void emitVector(YAML::Emitter& out, const Eigen::Ref<const Vector>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i];
  out << YAML::EndSeq;
}

void emitSwitch(YAML::Emitter& out, const char* key, const JointSwitch& s) {
  out << YAML::Key << key << YAML::Value;
  if (s.perJoint.empty()) {
    out << s.all;
  } else {
    out << YAML::Flow << YAML::BeginSeq;
    for (bool b : s.perJoint) out << b;
    out << YAML::EndSeq;
  }
}

void emitTyped(YAML::Emitter& out, const char* block, const std::vector<TaskSpec>& items) {
  out << YAML::Key << block << YAML::Value << YAML::BeginSeq;
  for (const auto& t : items) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << t.name << YAML::Key << "type" << YAML::Value
        << t.type;
    for (const auto& [k, v] : t.parameters) {
      out << YAML::Key << k << YAML::Value;
      emitValue(out, v);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

}  // namespace

std::string serialize(const ControllerSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out.SetBoolFormat(YAML::TrueFalseBool);
  out << YAML::BeginMap;
  emitTyped(out, "tasks", spec.tasks);
  emitTyped(out, "constraints", spec.constraints);

  out << YAML::Key << "compound_task" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : spec.compoundTask)
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << e.name << YAML::Key << "priority" << YAML::Value
        << e.priority << YAML::Key << "operational_state" << YAML::Value << (e.enabled ? "enable" : "disable")
        << YAML::EndMap;
  out << YAML::EndSeq;

  out << YAML::Key << "constraint_set" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : spec.constraintSet) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << e.name;
    if (!e.type.empty()) out << YAML::Key << "type" << YAML::Value << e.type;
    out << YAML::Key << "operational_state" << YAML::Value << (e.enabled ? "enable" : "disable") << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "bindings" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : spec.bindings) {
    out << YAML::BeginMap << YAML::Key << "parameter" << YAML::Value << b.parameter << YAML::Key << "direction"
        << YAML::Value << std::string(param::toString(b.direction)) << YAML::Key << "topic" << YAML::Value << b.topic
        << YAML::Key << "transport_type" << YAML::Value << b.transportType;
    if (!b.properties.empty()) {
      out << YAML::Key << "properties" << YAML::Value << YAML::BeginSeq;
      for (const auto& [k, v] : b.properties) out << YAML::DoubleQuoted << (k + "=" + v);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : spec.events)
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << e.name << YAML::Key << "expression" << YAML::Value
        << YAML::DoubleQuoted << e.expression << YAML::EndMap;
  out << YAML::EndSeq;

  const FrameworkSpec& f = spec.framework;
  out << YAML::Key << "controlit" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "servo_frequency" << YAML::Value << f.servoFrequency;
  out << YAML::Key << "single_threaded_model" << YAML::Value << f.singleThreadedModel;
  out << YAML::Key << "single_threaded_tasks" << YAML::Value << f.singleThreadedTasks;
  out << YAML::Key << "world_gravity" << YAML::Value;
  emitVector(out, f.worldGravity);
  if (f.gravityCompensationMask.size() > 0) {
    out << YAML::Key << "gravity_compensation_mask" << YAML::Value;
    emitVector(out, f.gravityCompensationMask);
  }
  emitSwitch(out, "enforce_effort_limits", f.enforceEffortLimits);
  emitSwitch(out, "enforce_position_limits", f.enforcePositionLimits);
  emitSwitch(out, "enforce_velocity_limits", f.enforceVelocityLimits);
  if (std::isfinite(f.maxEffortCommand)) out << YAML::Key << "max_effort_command" << YAML::Value << f.maxEffortCommand;
  out << YAML::Key << "whole_body_controller_type" << YAML::Value << std::string(toString(f.controllerType));
  out << YAML::Key << "robot_interface_type" << YAML::Value << std::string(sim::toString(f.robotInterface));
  out << YAML::Key << "servo_clock_type" << YAML::Value << f.servoClock;
  out << YAML::Key << "log_level" << YAML::Value << f.logLevel;
  out << YAML::Key << "controller_name" << YAML::Value << YAML::DoubleQuoted << f.controllerName;
  out << YAML::Key << "impedance_relaxation_factor" << YAML::Value << f.impedanceRelaxation;
  out << YAML::Key << "position_kp" << YAML::Value << f.positionKp;
  out << YAML::Key << "position_kd" << YAML::Value << f.positionKd;
  out << YAML::Key << "pinv_tolerance" << YAML::Value << f.pinvTolerance;
  out << YAML::Key << "staleness_warn_threshold" << YAML::Value << f.stalenessWarnThreshold;
  out << YAML::Key << "sim_latency_cycles" << YAML::Value << f.simLatencyCycles;
  out << YAML::Key << "sim_noise_position" << YAML::Value << f.simNoise.position;
  out << YAML::Key << "sim_noise_velocity" << YAML::Value << f.simNoise.velocity;
  out << YAML::Key << "sim_noise_effort" << YAML::Value << f.simNoise.effort;
  out << YAML::Key << "sim_seed" << YAML::Value << f.simSeed;
  out << YAML::Key << "remote_plant_host" << YAML::Value << YAML::DoubleQuoted << f.remotePlantHost;
  out << YAML::Key << "remote_plant_port" << YAML::Value << f.remotePlantPort;
  out << YAML::Key << "remote_state_port" << YAML::Value << f.remoteStatePort;
  out << YAML::Key << "udp_port" << YAML::Value << f.udpPort;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---- diff

std::string toString(const Action& a) {
  switch (a.kind) {
    case Action::Kind::EnableTask: return "enable task " + a.name;
    case Action::Kind::DisableTask: return "disable task " + a.name;
    case Action::Kind::SetPriority: return "set priority of " + a.name + " to " + std::to_string(a.priority);
    case Action::Kind::EnableConstraint: return "enable constraint " + a.name;
    case Action::Kind::DisableConstraint: return "disable constraint " + a.name;
  }
  return "?";
}

std::vector<Action> specDiff(const ControllerSpec& from, const ControllerSpec& to) {
  auto sameNames = [](const auto& a, const auto& b) {
    std::set<std::string> x, y;
    for (const auto& e : a) x.insert(e.name);
    for (const auto& e : b) y.insert(e.name);
    return x == y;
  };
  if (!(from.tasks == to.tasks)) throw ConfigError("reconfiguration cannot add, remove or redefine tasks");
  if (!(from.constraints == to.constraints))
    throw ConfigError("reconfiguration cannot add, remove or redefine constraints");
  if (!sameNames(from.compoundTask, to.compoundTask))
    throw ConfigError("reconfiguration cannot change which tasks are in the compound task");
  if (!sameNames(from.constraintSet, to.constraintSet))
    throw ConfigError("reconfiguration cannot change which constraints are in the constraint set");
  if (!(from.bindings == to.bindings) || !(from.events == to.events) || !(from.framework == to.framework))
    throw ConfigError("reconfiguration is limited to enabling, disabling and re-prioritizing");

  std::vector<Action> actions;
  for (const auto& n : to.compoundTask) {
    const auto o = std::find_if(from.compoundTask.begin(), from.compoundTask.end(),
                                [&](const CompoundEntry& e) { return e.name == n.name; });
    if (o->priority != n.priority) actions.push_back({Action::Kind::SetPriority, n.name, n.priority});
    if (o->enabled != n.enabled)
      actions.push_back({n.enabled ? Action::Kind::EnableTask : Action::Kind::DisableTask, n.name, n.priority});
  }
  for (const auto& n : to.constraintSet) {
    const auto o = std::find_if(from.constraintSet.begin(), from.constraintSet.end(),
                                [&](const ConstraintSetEntry& e) { return e.name == n.name; });
    if (o->enabled != n.enabled)
      actions.push_back({n.enabled ? Action::Kind::EnableConstraint : Action::Kind::DisableConstraint, n.name, 0});
  }
  return actions;
}

}  // namespace wbc::config
