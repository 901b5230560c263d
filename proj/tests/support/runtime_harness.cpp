#include "support/runtime_harness.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "support/fixtures.hpp"

namespace wbc::test {

using runtime::HookPoint;
using runtime::RuntimeOptions;

std::unique_ptr<runtime::Session> makeSession(const std::string& config, const std::string& robot,
                                              const std::function<void(config::ControllerSpec&)>& edit,
                                              RuntimeOptions options) {
  auto spec = config::loadFile(fixturePath("configs/" + config));
  spec.framework.logLevel = "warn";
  if (edit) edit(spec);
  options.startPublisher = false;
  options.idleWorkerPriority = false;
  options.logDirectory = std::filesystem::temp_directory_path().string();
  return std::make_unique<runtime::Session>(std::move(spec), loadRobot(robot), std::move(options));
}

void singleThreaded(config::ControllerSpec& s) { s.framework.singleThreadedModel = s.framework.singleThreadedTasks = true; }

std::uint64_t starvationRounds(bool secondScan, int rounds) {
  std::atomic<bool> armed{false}, released{false};
  runtime::Runtime* rt = nullptr;
  RuntimeOptions o;
  o.secondScan = secondScan;
  o.waitForWorkers = false;
  // The worker parks before its update until the servo lets it go.
  o.hooks.taskWorker = [&] {
    if (!armed.load()) return;
    while (!released.load()) std::this_thread::yield();
    released = false;
    armed = false;
  };
  // Right after the first scan: release the worker and wait until it is idle.
  o.hooks.servo = [&](HookPoint p, int) {
    if (p != HookPoint::AfterFirstScan || !rt || !armed.load() || rt->taskWorkerIdle()) return;
    released = true;
    while (!rt->taskWorkerIdle()) std::this_thread::yield();
  };
  // Model updates inline so every cycle swaps and wants a task trigger.
  auto session = makeSession("dreamer_disassembly.yaml", "dreamer22",
                             [](config::ControllerSpec& s) { s.framework.singleThreadedModel = true; }, o);
  rt = &session->runtime();
  rt->waitForWorkers();
  for (int k = 0; k < rounds; ++k) {
    armed = true;
    rt->servoUpdate();  // triggers the worker, which parks
    rt->servoUpdate();  // the hook lets it finish inside check_for_updates
    rt->waitForWorkers();
    rt->servoUpdate();
    rt->waitForWorkers();
  }
  const auto lost = rt->lostTaskUpdates();
  rt = nullptr;
  return lost;
}

StressResult stressRun(std::uint64_t cycles, std::uint64_t seed) {
  std::atomic<std::uint64_t> seeds{seed};
  auto jitter = [&seeds](int spread) {
    thread_local std::mt19937_64 rng(seeds.fetch_add(1));
    const int pick = std::uniform_int_distribution<int>(0, spread)(rng);
    if (pick == 0) std::this_thread::sleep_for(std::chrono::microseconds(20));
    else if (pick < 3) std::this_thread::yield();
  };
  RuntimeOptions o;
  o.waitForWorkers = false;
  o.hooks.modelWorker = [&] { jitter(8); };
  o.hooks.taskWorker = [&] { jitter(8); };
  o.hooks.servo = [&](HookPoint, int) { jitter(64); };
  auto session = makeSession("dreamer_disassembly.yaml", "planar2", [](config::ControllerSpec& s) {
    s.tasks = {config::TaskSpec{"posture", "JointPositionTask", {{"goalPosition", Vector::Zero(2)}, {"kp", 40.0}, {"kd", 4.0}}},
               config::TaskSpec{"tip", "CartesianPositionTask", {{"link", std::string("link2")}, {"kp", 30.0}, {"kd", 3.0}}}};
    s.compoundTask = {{"tip", 0, true}, {"posture", 1, true}};
    s.constraints.clear();
    s.constraintSet.clear();
    s.bindings.clear();
    s.events.clear();
    s.framework.controllerName = "planar2";
  }, o);
  auto& rt = session->runtime();
  rt.run(cycles);
  rt.waitForWorkers();
  rt.checkForUpdates();
  StressResult r;
  r.cycles = rt.counters().cycles;
  r.blockingAcquires = rt.servoBlockingAcquires();
  r.lostUpdates = rt.lostTaskUpdates();
  r.modelSwaps = rt.counters().modelSwaps;
  r.taskTriggers = rt.counters().taskTriggers;
  return r;
}

double frozenStateCommandGap(int cycles) {
  auto multi = makeSession("dreamer_disassembly.yaml", "dreamer22");
  auto single = makeSession("dreamer_disassembly.yaml", "dreamer22", singleThreaded);
  // servoUpdate without advance: neither plant ever moves.
  for (int k = 0; k < cycles; ++k) {
    multi->runtime().servoUpdate();
    multi->runtime().waitForWorkers();
    single->runtime().servoUpdate();
  }
  const Vector& a = multi->runtime().command().effort;
  const Vector& b = single->runtime().command().effort;
  if (a.norm() == 0.0) return std::numeric_limits<double>::infinity();  // nothing was computed
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace wbc::test
