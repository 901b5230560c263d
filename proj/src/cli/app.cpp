#include "wbc/cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "wbc/cli/bench.hpp"
#include "wbc/cli/trajectory.hpp"
#include "wbc/config/build.hpp"
#include "wbc/runtime/session.hpp"

namespace wbc::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::atomic<bool> interrupted{false};

extern "C" void onSignal(int) { interrupted.store(true); }

struct SignalScope {
  SignalScope() {
    interrupted = false;
    previousInt_ = std::signal(SIGINT, onSignal);
    previousTerm_ = std::signal(SIGTERM, onSignal);
  }
  ~SignalScope() {
    std::signal(SIGINT, previousInt_);
    std::signal(SIGTERM, previousTerm_);
  }
  void (*previousInt_)(int);
  void (*previousTerm_)(int);
};

struct ControllerFlags {
  std::string config, robot, clock, logDir;
  double duration = 10.0;
  bool singleThreaded = false;
  std::uint64_t seed = 0;
  int udpPort = 0, latency = 0;
  CLI::Option *seedOpt = nullptr, *udpOpt = nullptr, *latencyOpt = nullptr, *durationOpt = nullptr;
};

void addControllerFlags(CLI::App& cmd, ControllerFlags& f) {
  cmd.add_option("--config", f.config, "controller configuration (YAML)")->required();
  cmd.add_option("--robot", f.robot, "robot description (YAML)")->required();
  f.durationOpt = cmd.add_option("--duration", f.duration, "seconds of servo clock time")->check(CLI::PositiveNumber);
  cmd.add_flag("--single-threaded", f.singleThreaded, "update model and tasks on the servo thread");
  f.seedOpt = cmd.add_option("--seed", f.seed, "seed of the simulated sensor noise");
  cmd.add_option("--clock", f.clock, "servo clock")->check(CLI::IsMember({"lockstep", "monotonic"}));
  cmd.add_option("--log-dir", f.logDir, "directory for CSV logs of every bound output");
  f.udpOpt = cmd.add_option("--udp-port", f.udpPort, "UDP port for bindings and services")->check(CLI::Range(0, 65535));
  f.latencyOpt = cmd.add_option("--latency", f.latency, "injected round-trip latency in servo cycles")
                     ->check(CLI::NonNegativeNumber);
}

// Adds a file binding next to every output that is not already logged to a file.
void mirrorOutputsToFiles(config::ControllerSpec& spec) {
  std::vector<param::BindingConfig> extra;
  for (const auto& b : spec.bindings) {
    if (b.direction != param::Direction::Output || b.transportType == "file") continue;
    const bool logged = std::any_of(spec.bindings.begin(), spec.bindings.end(), [&](const param::BindingConfig& o) {
      return o.transportType == "file" && o.topic == b.topic;
    });
    const bool queued = std::any_of(extra.begin(), extra.end(), [&](const param::BindingConfig& o) { return o.topic == b.topic; });
    if (logged || queued) continue;
    param::BindingConfig file{b.parameter, param::Direction::Output, "file", b.topic, {}};
    if (auto it = b.properties.find("publish_rate"); it != b.properties.end()) file.properties["publish_rate"] = it->second;
    extra.push_back(file);
  }
  spec.bindings.insert(spec.bindings.end(), extra.begin(), extra.end());
}

std::unique_ptr<runtime::Session> openSession(const ControllerFlags& f) {
  runtime::Overrides o;
  if (f.singleThreaded) o.singleThreaded = true;
  if (!f.clock.empty()) o.clock = f.clock == "monotonic" ? runtime::ClockKind::Monotonic : runtime::ClockKind::Lockstep;
  if (f.seedOpt->count()) o.seed = f.seed;
  if (f.udpOpt->count()) o.udpPort = f.udpPort;
  if (f.latencyOpt->count()) o.latencyCycles = f.latency;
  auto spec = runtime::applyOverrides(config::loadFile(f.config), o);
  runtime::RuntimeOptions ro;
  if (!f.logDir.empty()) {
    fs::create_directories(f.logDir);
    mirrorOutputsToFiles(spec);
    ro.logDirectory = f.logDir;
  }
  return std::make_unique<runtime::Session>(std::move(spec), rbd::loadDescriptionFile(f.robot), std::move(ro));
}

void printSummary(runtime::Runtime& rt, std::ostream& out) {
  const auto& c = rt.counters();
  out << "cycles " << c.cycles << ", clock " << rt.clock().now() << " s, servo cycle " << rt.cycleStat().mean * 1e3
      << " ms mean (" << rt.cycleStat().stddev() * 1e3 << " std)\n";
  out << "model swaps " << c.modelSwaps << ", task triggers " << c.taskTriggers << ", suppressed commands "
      << c.suppressedCommands << ", lost task updates " << rt.lostTaskUpdates() << "\n";
}

int cmdRun(const ControllerFlags& f, std::ostream& out) {
  auto session = openSession(f);
  auto& rt = session->runtime();
  SignalScope signals;
  out << "running '" << rt.name() << "' for " << f.duration << " s (" << runtime::toString(rt.clock().kind()) << " clock";
  if (rt.udpPort()) out << ", udp port " << rt.udpPort();
  out << ")\n" << std::flush;
  rt.runFor(f.duration, &interrupted);
  rt.bindings().queue().drain();
  printSummary(rt, out);
  return Ok;
}

int cmdTraj(const ControllerFlags& f, const std::string& trajectory, std::ostream& out) {
  const auto tracks = loadTrajectories(trajectory);
  auto session = openSession(f);
  const auto report = runTrajectory(*session, tracks, f.durationOpt->count() ? f.duration : -1.0);
  printReport(report, out);
  session->runtime().bindings().queue().drain();
  return report.finite ? Ok : Failure;
}

int cmdBench(const BenchOptions& options, const std::string& csvPath, std::ostream& out) {
  const auto rows = runBench(options, &out);
  writeBenchTable(rows, out);
  if (!csvPath.empty()) {
    std::ofstream csv(csvPath);
    if (!csv) throw Error("cannot write '" + csvPath + "'");
    writeBenchCsv(rows, csv);
    out << "wrote " << csvPath << "\n";
  }
  return Ok;
}

int cmdIntrospect(const std::string& host, int port, const std::string& service, const std::string& args,
                  double timeout, std::ostream& out, std::ostream& err) {
  const auto response = param::udpRequest(host, port, service, args, timeout);
  if (!response) {
    err << "error: no answer from " << host << ":" << port << " within " << timeout << " s\n";
    return Timeout;
  }
  const auto doc = json::parse(*response, nullptr, false);
  if (doc.is_discarded()) {
    out << *response << "\n";
    return Failure;
  }
  out << doc.dump(2) << "\n";
  return doc.contains("error") ? Failure : Ok;
}

int cmdSend(const std::string& host, int port, const std::string& name, const std::string& text, double timeout,
            std::ostream& out, std::ostream& err) {
  const auto response = param::udpRequest(host, port, "getControllerConfiguration", std::string(), timeout);
  if (!response) {
    err << "error: no answer from " << host << ":" << port << " within " << timeout << " s\n";
    return Timeout;
  }
  const auto config = json::parse(*response, nullptr, false);
  std::string topic;
  if (!config.is_discarded() && config.contains("bindings")) {
    for (const auto& b : config["bindings"]) {
      if (b.value("direction", "") != "input" || b.value("transport", "") != "udp") continue;
      if (b.value("parameter", "") == name || b.value("topic", "") == name) topic = b.value("topic", "");
    }
  }
  if (topic.empty()) {
    err << "warning: '" << name << "' has no UDP input binding on " << host << ":" << port << ", nothing sent\n";
    return Ok;
  }
  const auto value = parseValue(text);
  param::udpSend(host, port, topic, value);
  out << "sent " << param::formatValue(value) << " on '" << topic << "'\n";
  return Ok;
}

int cmdPlant(const std::string& robotPath, const std::string& configPath, int listenPort, const std::string& host,
             int controllerPort, double frequency, double duration, std::ostream& out) {
  auto description = rbd::loadDescriptionFile(robotPath);
  const int n = static_cast<int>(description.realJointCount());
  sim::PlantConstraints constraints;
  Vector start = Vector::Zero(n);
  if (!configPath.empty()) {
    const auto spec = config::loadFile(configPath);
    rbd::RobotModel model(description);
    constraints = sim::PlantConstraints::fromConstraintSet(config::buildConstraintSet(spec, model), model);
    start = runtime::initialPosture(spec, description);
  }
  sim::Plant plant(description, constraints);
  plant.reset(start, Vector::Zero(n));
  sim::RemotePlantServer server(plant, 1.0 / frequency, listenPort, host, controllerPort);
  SignalScope signals;
  server.start();
  out << "plant '" << description.name << "' listening on udp port " << server.port() << ", state to " << host << ":"
      << controllerPort << "\n" << std::flush;
  const double end = runtime::wallSeconds() + duration;
  while (!interrupted.load() && runtime::wallSeconds() < end) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  server.stop();
  out << "commands received " << server.commandsReceived() << ", command timeouts " << server.timeouts() << "\n";
  return Ok;
}

}  // namespace

param::ParamValue parseValue(const std::string& text) {
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return text;
  if (doc.is_boolean()) return doc.get<bool>();
  if (doc.is_number()) return doc.get<double>();
  if (doc.is_array() && !doc.empty() && std::all_of(doc.begin(), doc.end(), [](const json& v) { return v.is_number(); })) {
    Vector v(static_cast<Eigen::Index>(doc.size()));
    for (std::size_t i = 0; i < doc.size(); ++i) v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
    return v;
  }
  if (doc.is_string()) return doc.get<std::string>();
  return text;
}

int runApp(int argc, const char* const* argv, const AppDefaults& defaults, std::ostream& out, std::ostream& err) {
  CLI::App app{"Whole-body operational space controller with a simulated plant"};
  app.require_subcommand(1);

  ControllerFlags runFlags, trajFlags;
  auto* run = app.add_subcommand("run", "run a configured controller against the plant");
  addControllerFlags(*run, runFlags);

  std::string trajectory;
  auto* traj = app.add_subcommand("traj", "stream spline goals at 100 Hz and report tracking error");
  addControllerFlags(*traj, trajFlags);
  traj->add_option("--trajectory", trajectory, "trajectory file (YAML)")->required();

  BenchOptions bench;
  bench.robotPath = (fs::path(defaults.fixtureDirectory) / "robots" / "dreamer22.yaml").string();
  bench.configDirectory = (fs::path(defaults.fixtureDirectory) / "configs").string();
  std::string csvPath;
  auto* benchCmd = app.add_subcommand("bench", "servo latency matrix over priority levels and threading");
  benchCmd->add_option("--robot", bench.robotPath, "robot description")->capture_default_str();
  benchCmd->add_option("--config-dir", bench.configDirectory, "directory of the benchmark configs")->capture_default_str();
  benchCmd->add_option("--cycles", bench.cycles, "measured cycles per cell")->capture_default_str()->check(CLI::PositiveNumber);
  benchCmd->add_option("--warmup", bench.warmup, "cycles before measuring")->capture_default_str()->check(CLI::NonNegativeNumber);
  benchCmd->add_option("--csv", csvPath, "also write the table as CSV");

  std::string host = "127.0.0.1", service, serviceArgs, name, valueText;
  int port = 0;
  double timeout = 1.0;
  auto* introspect = app.add_subcommand("introspect", "query an introspection service of a running controller");
  introspect->add_option("service", service, "service name")->required();
  introspect->add_option("args", serviceArgs, "service argument, e.g. a task name");
  introspect->add_option("--host", host)->capture_default_str();
  introspect->add_option("--udp-port", port, "controller UDP port")->required();
  introspect->add_option("--timeout", timeout)->capture_default_str();

  auto* send = app.add_subcommand("send", "publish one value to an input-bound parameter");
  send->add_option("name", name, "parameter or topic")->required();
  send->add_option("value", valueText, "number, true/false, [list] or text")->required();
  send->add_option("--host", host)->capture_default_str();
  send->add_option("--udp-port", port, "controller UDP port")->required();
  send->add_option("--timeout", timeout)->capture_default_str();

  std::string plantRobot, plantConfig;
  int plantPort = 0, controllerPort = 0;
  double plantFrequency = 1000.0, plantDuration = 1e9;
  auto* plant = app.add_subcommand("plant", "serve the simulated plant over UDP for a udp-remote controller");
  plant->add_option("--robot", plantRobot, "robot description")->required();
  plant->add_option("--config", plantConfig, "controller config for constraints and start posture");
  plant->add_option("--listen-port", plantPort, "port receiving commands")->required();
  plant->add_option("--controller-port", controllerPort, "port receiving state")->required();
  plant->add_option("--host", host, "controller host")->capture_default_str();
  plant->add_option("--frequency", plantFrequency)->capture_default_str()->check(CLI::PositiveNumber);
  plant->add_option("--duration", plantDuration, "wall seconds to serve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : BadInput;
  }

  try {
    if (*run) return cmdRun(runFlags, out);
    if (*traj) return cmdTraj(trajFlags, trajectory, out);
    if (*benchCmd) return cmdBench(bench, csvPath, out);
    if (*introspect) return cmdIntrospect(host, port, service, serviceArgs, timeout, out, err);
    if (*send) return cmdSend(host, port, name, valueText, timeout, out, err);
    if (*plant) return cmdPlant(plantRobot, plantConfig, plantPort, host, controllerPort, plantFrequency, plantDuration, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return BadInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return BadInput;
  } catch (const UnknownNameError& e) {
    err << "error: " << e.what() << "\n";
    return BadInput;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return BadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return Failure;
  }
  return Ok;
}

}  // namespace wbc::cli
