#pragma once

#include <array>
#include <cmath>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "wbc/config/spec.hpp"
#include "wbc/constraint/constraint.hpp"
#include "wbc/control/limits.hpp"
#include "wbc/control/wbosc.hpp"
#include "wbc/param/binding.hpp"
#include "wbc/param/expression.hpp"
#include "wbc/param/transport.hpp"
#include "wbc/rbd/model.hpp"
#include "wbc/runtime/clock.hpp"
#include "wbc/sim/interface.hpp"
#include "wbc/task/compound_task.hpp"

namespace wbc::runtime {

enum class Phase { Read, UpdateModel, ComputeCommand, EmitEvents, Write };
inline constexpr int kPhaseCount = 5;
std::string_view toString(Phase phase);

/// Streaming mean and standard deviation.
struct RunningStat {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double stddev() const { return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0; }
  void reset() { *this = RunningStat{}; }
};

/// Points inside check_for_updates where tests may inject interleavings.
enum class HookPoint {
  FirstScanTask,    // after the first scan looked at task `index`
  AfterFirstScan,
  AfterIdleCheck,   // index is 1 when the task worker was idle
  AfterSecondScan,
  AfterModelCheck,  // index is 1 when the model was swapped
};

struct RuntimeHooks {
  std::function<void(HookPoint, int)> servo;
  std::function<void()> modelWorker;  // start of every model worker cycle
  std::function<void()> taskWorker;   // start of every task worker cycle
};

struct RuntimeOptions {
  /// Rescan tasks once the task worker is known idle. Turning this off
  /// reintroduces task update starvation; only tests should do that.
  bool secondScan = true;
  /// With the lockstep clock, step() waits for both workers before the next
  /// cycle so multi-threaded runs are deterministic.
  bool waitForWorkers = true;
  /// Run workers under SCHED_IDLE so they only use time the servo leaves.
  bool idleWorkerPriority = true;
  bool startPublisher = true;
  std::shared_ptr<param::TopicBus> bus;  // created when null
  std::string logDirectory = ".";
  RuntimeHooks hooks;
};

struct CycleResult {
  std::uint64_t cycle = 0;
  bool stateRead = false;
  bool commandWritten = false;
  bool modelSwapped = false;
  int tasksPulled = 0;
  control::ComputeStatus status = control::ComputeStatus::Ok;
};

struct CheckResult {
  int tasksPulled = 0;
  bool modelSwapped = false;
  bool tasksTriggered = false;
};

struct RuntimeCounters {
  std::uint64_t cycles = 0;
  std::uint64_t modelStagings = 0;
  std::uint64_t stagingsSkipped = 0;   // inactive model guard was busy
  std::uint64_t modelSwaps = 0;
  std::uint64_t taskTriggers = 0;
  std::uint64_t deferredTaskTriggers = 0;  // swap happened while the task worker was busy
  std::uint64_t suppressedCommands = 0;
  std::uint64_t readMisses = 0;
  std::uint64_t staleCycles = 0;       // modelLatency above the warn threshold
};

/// Mutex that counts lock() calls made from the servo thread.
class ServoGuard {
 public:
  bool try_lock() { return mutex_.try_lock(); }
  void lock() {
    if (std::this_thread::get_id() == servoThread_.load(std::memory_order_relaxed))
      blocking_.fetch_add(1, std::memory_order_relaxed);
    mutex_.lock();
  }
  void unlock() { mutex_.unlock(); }
  void setServoThread(std::thread::id id) { servoThread_.store(id, std::memory_order_relaxed); }
  std::uint64_t servoBlockingAcquires() const { return blocking_.load(std::memory_order_relaxed); }

 private:
  std::mutex mutex_;
  std::atomic<std::thread::id> servoThread_{};
  std::atomic<std::uint64_t> blocking_{0};
};

/// The coordinator: servo loop, model and task workers, bindings, events,
/// diagnostics and introspection services for one controller.
///
/// Three model bundles rotate between roles: the servo's active copy, the
/// copy the task worker is reading (often the same one) and the inactive copy
/// the model worker writes. A swap therefore never has to wait for the task
/// worker to let go of the previous snapshot.
class Runtime {
 public:
  /// servo_init. Blocks once for a first robot state, then starts workers.
  Runtime(const config::ControllerSpec& spec, const rbd::RobotDescription& description, sim::RobotInterface& robot,
          RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// One servo cycle. Never blocks.
  CycleResult servoUpdate();
  /// servoUpdate plus the clock tick; lockstep plants advance one period.
  CycleResult step();
  void run(std::uint64_t cycles);
  /// Steps until `seconds` of clock time elapsed or *stop turns true.
  void runFor(double seconds, const std::atomic<bool>* stop = nullptr);

  CheckResult checkForUpdates();
  /// Blocks until both workers are idle (lockstep pacing and tests).
  void waitForWorkers();
  bool modelWorkerIdle() const { return !modelBusy_.load(std::memory_order_acquire); }
  bool taskWorkerIdle() const { return !taskBusy_.load(std::memory_order_acquire); }
  bool multiThreadedModel() const { return !spec_.framework.singleThreadedModel; }
  bool multiThreadedTasks() const { return !spec_.framework.singleThreadedTasks; }

  /// Queues enable/disable/priority changes for the next cycle boundary.
  /// Throws ConfigError for anything else.
  void reconfigure(const config::ControllerSpec& next);
  void queueActions(const std::vector<config::Action>& actions);

  /// Introspection; always returns a JSON document, {"error": ...} on failure.
  std::string callService(const std::string& service, const param::ParamValue& args = std::string());
  static const std::vector<std::string>& serviceNames();

  const config::ControllerSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.framework.controllerName; }
  ServoClock& clock() { return *clock_; }
  param::ParameterRegistry& registry() { return registry_; }
  param::BindingManager& bindings() { return *bindings_; }
  param::EventEngine& events() { return *events_; }
  const std::shared_ptr<param::TopicBus>& bus() const { return bus_; }
  /// Port of the UDP endpoint (bindings and services), 0 when none is open.
  int udpPort() const;
  task::CompoundTask& tasks() { return tasks_; }
  constraint::ConstraintSet& constraints() { return constraints_; }
  control::Wbosc& controller() { return *controller_; }
  const rbd::RobotModel& activeModel() const;
  const constraint::ConstraintProjection& activeProjection() const;
  const rbd::RobotState& state() const { return state_; }
  const control::Command& command() const { return command_; }
  bool commandSuppressed() const { return suppressed_; }
  const RuntimeCounters& counters() const { return counters_; }
  std::uint64_t servoBlockingAcquires() const { return modelGuard_.servoBlockingAcquires(); }
  std::uint64_t lostTaskUpdates() const;
  const RunningStat& phaseStat(Phase phase) const { return phases_[static_cast<int>(phase)]; }
  const RunningStat& cycleStat() const { return cycleStat_; }
  void resetStats();
  double modelLatency() const { return modelLatency_; }
  double lastModelSwapTime() const { return lastSwapTime_; }
  /// Full topic name of a diagnostics channel, e.g. "dreamer/diagnostics/modelLatency".
  std::string diagnosticsTopic(std::string_view channel) const;
  static constexpr const char* kEventsTopic = "events";

 private:
  struct ModelBundle;
  struct Snapshot;

  void initBundle(ModelBundle& bundle, const rbd::RobotState& state);
  void stageInto(ModelBundle& bundle);
  void updateBundle(ModelBundle& bundle);
  void modelWorkerLoop();
  void taskWorkerLoop();
  void triggerTasks();
  void swapModel();
  void updateTasksInline();
  int scanTasks(bool first);
  void applyActions();
  void publishDiagnostics(double cycleSeconds);
  void publishText(int route, const char* format, ...);
  void takeSnapshot();
  std::string serviceResponse(const std::string& service);

  config::ControllerSpec spec_;
  sim::RobotInterface& robot_;
  RuntimeOptions options_;
  std::unique_ptr<ServoClock> clock_;

  std::array<std::unique_ptr<ModelBundle>, 3> bundles_;
  int active_ = 0;
  int pinned_ = 0;      // bundle the task worker reads; meaningful while it is busy
  int inactive_ = 1;    // guarded by modelGuard_
  bool updateReady_ = false;  // guarded by modelGuard_
  bool tasksPending_ = false;  // a swapped-in model has not reached the task worker yet
  ServoGuard modelGuard_;

  task::CompoundTask tasks_;
  constraint::ConstraintSet constraints_;
  std::unique_ptr<control::Wbosc> controller_;
  control::LimitEnforcer limits_;
  control::WarningSink warnings_;

  param::ParameterRegistry registry_;
  std::shared_ptr<param::TopicBus> bus_;
  std::unique_ptr<param::BindingManager> bindings_;
  std::unique_ptr<param::EventEngine> events_;
  bool hadTasks_ = true;

  rbd::RobotState state_;
  control::Command command_;
  bool suppressed_ = false;
  double lastSwapTime_ = 0.0;
  double modelLatency_ = 0.0;
  double previousNow_ = 0.0;
  bool staleWarned_ = false;

  std::atomic<bool> stop_{false};
  std::atomic<bool> modelTrigger_{false}, taskTrigger_{false};
  std::atomic<bool> modelBusy_{false}, taskBusy_{false};
  std::thread modelThread_, taskThread_;

  std::mutex actionsMutex_;
  std::vector<config::Action> pendingActions_;
  std::atomic<bool> hasActions_{false};
  std::unique_ptr<config::ControllerSpec> desired_;  // latest spec handed to reconfigure()

  RuntimeCounters counters_;
  std::array<RunningStat, kPhaseCount> phases_;
  RunningStat cycleStat_;

  enum Route { ServoFrequency, ComputeLatency, ModelLatency, CommandRoute, JointState, Errors, Warnings, Gravity, Events };
  std::array<int, 9> routes_{};
  Vector packed_;

  std::mutex snapshotMutex_;
  std::unique_ptr<Snapshot> snapshot_;
  param::UdpTransport* udp_ = nullptr;
  int serviceSubscription_ = -1;
};

}  // namespace wbc::runtime
