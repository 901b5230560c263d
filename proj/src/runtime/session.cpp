#include "wbc/runtime/session.hpp"

#include "wbc/config/build.hpp"

namespace wbc::runtime {

config::ControllerSpec applyOverrides(config::ControllerSpec spec, const Overrides& o) {
  auto& f = spec.framework;
  if (o.singleThreaded) f.singleThreadedModel = f.singleThreadedTasks = *o.singleThreaded;
  if (o.clock) {
    f.servoClock = std::string(toString(*o.clock));
    if (*o.clock == ClockKind::Monotonic && f.robotInterface == sim::InterfaceKind::Lockstep)
      f.robotInterface = sim::InterfaceKind::Freerun;
    if (*o.clock == ClockKind::Lockstep && f.robotInterface == sim::InterfaceKind::Freerun)
      f.robotInterface = sim::InterfaceKind::Lockstep;
  }
  if (o.seed) f.simSeed = *o.seed;
  if (o.udpPort) f.udpPort = *o.udpPort;
  if (o.latencyCycles) f.simLatencyCycles = *o.latencyCycles;
  if (f.robotInterface == sim::InterfaceKind::Lockstep && f.servoClock != "lockstep")
    throw config::ConfigError("the sim-lockstep robot interface requires the lockstep servo clock");
  return spec;
}

Vector initialPosture(const config::ControllerSpec& spec, const rbd::RobotDescription& description) {
  const auto n = static_cast<Eigen::Index>(description.realJointCount());
  for (const auto& t : spec.tasks) {
    if (t.type != "JointPositionTask") continue;
    const bool listed = std::any_of(spec.compoundTask.begin(), spec.compoundTask.end(),
                                    [&](const config::CompoundEntry& e) { return e.name == t.name; });
    auto goal = t.parameters.find("goalPosition");
    if (!listed || goal == t.parameters.end()) continue;
    if (param::kindOf(goal->second) == param::ParamKind::Vector && std::get<Vector>(goal->second).size() == n)
      return std::get<Vector>(goal->second);
    if (param::kindOf(goal->second) == param::ParamKind::Scalar) return Vector::Constant(n, std::get<double>(goal->second));
  }
  return Vector::Zero(n);
}

Session::Session(config::ControllerSpec spec, rbd::RobotDescription description, RuntimeOptions options,
                 std::optional<Vector> initialPosition)
    : spec_(std::move(spec)), description_(std::move(description)) {
  const auto& f = spec_.framework;
  const int n = static_cast<int>(description_.realJointCount());
  if (f.robotInterface == sim::InterfaceKind::UdpRemote) {
    if (f.remotePlantPort <= 0 || f.remoteStatePort <= 0)
      throw config::ConfigError("the udp-remote interface needs remote_plant_port and remote_state_port");
    auto remote = std::make_unique<sim::UdpRemoteInterface>(n, f.remoteStatePort, f.remotePlantHost, f.remotePlantPort);
    robot_ = std::move(remote);
  } else {
    rbd::RobotModel model(description_);
    const auto set = config::buildConstraintSet(spec_, model);
    plant_ = std::make_unique<sim::Plant>(description_, sim::PlantConstraints::fromConstraintSet(set, model));
    const Vector q0 = initialPosition ? *initialPosition : initialPosture(spec_, description_);
    plant_->reset(q0, Vector::Zero(n));
    sim::InterfaceSpec is;
    is.kind = f.robotInterface;
    is.latencyCycles = f.simLatencyCycles;
    is.noise = f.simNoise;
    is.seed = f.simSeed;
    if (f.robotInterface == sim::InterfaceKind::Freerun) {
      robot_ = std::make_unique<sim::FreerunInterface>(*plant_, is, 1.0 / f.servoFrequency);
    } else {
      robot_ = std::make_unique<sim::LockstepInterface>(*plant_, is);
    }
  }
  robot_->start();
  runtime_ = std::make_unique<Runtime>(spec_, description_, *robot_, std::move(options));
}

Session::~Session() {
  runtime_.reset();
  if (robot_) robot_->stop();
}

std::unique_ptr<Session> Session::fromFiles(const std::string& configPath, const std::string& robotPath,
                                            const Overrides& overrides, RuntimeOptions options) {
  auto spec = applyOverrides(config::loadFile(configPath), overrides);
  auto description = rbd::loadDescriptionFile(robotPath);
  return std::make_unique<Session>(std::move(spec), std::move(description), std::move(options));
}

}  // namespace wbc::runtime
