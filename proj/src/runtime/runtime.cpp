#include "wbc/runtime/runtime.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wbc/config/build.hpp"

namespace wbc::runtime {

using json = nlohmann::json;

std::string_view toString(Phase phase) {
  switch (phase) {
    case Phase::Read: return "read";
    case Phase::UpdateModel: return "update model";
    case Phase::ComputeCommand: return "compute command";
    case Phase::EmitEvents: return "emit events";
    case Phase::Write: return "write";
  }
  return "?";
}

struct Runtime::ModelBundle {
  rbd::RobotModel model;
  constraint::ConstraintProjection projection;
  std::vector<constraint::ConstraintInputs> inputs;
  rbd::RobotState staged;
  Vector q, qd;

  ModelBundle(const rbd::RobotDescription& description, const constraint::ConstraintSet& set, double tolerance)
      : model(description), projection(model, set, tolerance) {
    staged.resize(model.jointCount());
    q.setZero(model.dofCount());
    qd.setZero(model.dofCount());
    inputs.reserve(set.constraints().size());
  }
};

// Values copied at the end of a cycle for the introspection services.
struct Runtime::Snapshot {
  std::uint64_t cycle = 0;
  std::vector<param::ParamValue> values;  // registry order
  std::vector<int> priorities;
  std::vector<char> taskEnabled, constraintEnabled;
  Matrix constraintJacobian;
  std::vector<int> constraintRows;
};

namespace {

void setIdlePriority(bool enabled) {
  if (!enabled) return;
  sched_param param{};
  if (pthread_setschedparam(pthread_self(), SCHED_IDLE, &param) != 0)
    spdlog::debug("could not move worker to SCHED_IDLE");
}

spdlog::level::level_enum logLevel(const std::string& name) { return spdlog::level::from_str(name); }

json toJson(const param::ParamValue& v) {
  switch (param::kindOf(v)) {
    case param::ParamKind::Scalar: {
      const double x = std::get<double>(v);
      return std::isfinite(x) ? json(x) : json(nullptr);
    }
    case param::ParamKind::Vector: {
      json a = json::array();
      for (double x : std::get<Vector>(v)) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
      return a;
    }
    case param::ParamKind::Bool: return std::get<bool>(v);
    case param::ParamKind::String: return std::get<std::string>(v);
  }
  return nullptr;
}

json matrixJson(const Eigen::Ref<const Matrix>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void copyValue(const param::Parameter& p, param::ParamValue& out) {
  switch (p.kind()) {
    case param::ParamKind::Scalar: std::get<double>(out) = p.scalar(); break;
    case param::ParamKind::Vector: std::get<Vector>(out) = p.vector(); break;
    case param::ParamKind::Bool: std::get<bool>(out) = p.boolean(); break;
    case param::ParamKind::String: std::get<std::string>(out) = p.string(); break;
  }
}

std::string owner(const std::string& name) { return name.substr(0, name.find('.')); }
std::string attribute(const std::string& name) { return name.substr(name.find('.') + 1); }

}  // namespace

Runtime::Runtime(const config::ControllerSpec& spec, const rbd::RobotDescription& description,
                 sim::RobotInterface& robot, RuntimeOptions options)
    : spec_(spec),
      robot_(robot),
      options_(std::move(options)),
      clock_(makeClock(spec.framework.servoClock == "monotonic" ? ClockKind::Monotonic : ClockKind::Lockstep,
                       spec.framework.servoFrequency)),
      limits_(description, config::limitFlags(spec.framework, static_cast<int>(description.realJointCount()))) {
  const auto& fw = spec_.framework;
  spdlog::set_level(logLevel(fw.logLevel));
  if (robot_.jointCount() != static_cast<int>(description.realJointCount()))
    throw ValidationError("robot interface has " + std::to_string(robot_.jointCount()) + " joints, description has " +
                          std::to_string(description.realJointCount()));

  rbd::RobotDescription controllerView = description;
  controllerView.gravity = fw.worldGravity;
  {
    rbd::RobotModel setup(controllerView);
    config::checkAgainstRobot(spec_, setup);
    constraints_ = config::buildConstraintSet(spec_, setup);
  }
  for (auto& b : bundles_) b = std::make_unique<ModelBundle>(controllerView, constraints_, fw.pinvTolerance);

  const int n = robot_.jointCount();
  state_.resize(n);
  command_.resize(n);
  if (!robot_.waitForState(state_, 2.0)) throw Error("robot interface unreachable: no state within 2 s");
  for (auto& b : bundles_) initBundle(*b, state_);
  active_ = 0;
  inactive_ = 1;
  pinned_ = 0;
  lastSwapTime_ = clock_->now();

  tasks_ = config::buildCompoundTask(spec_, bundles_[active_]->model);
  for (const auto& e : tasks_.entries()) e.task->setNominalPeriod(clock_->period());

  if (fw.controllerType == config::ControllerType::WboscImpedance) {
    auto impedance = std::make_unique<control::WboscImpedance>(bundles_[active_]->model, tasks_,
                                                               fw.impedanceRelaxation, fw.pinvTolerance);
    impedance->setPositionGains(Vector::Constant(n, fw.positionKp), Vector::Constant(n, fw.positionKd));
    controller_ = std::move(impedance);
  } else {
    controller_ = std::make_unique<control::Wbosc>(bundles_[active_]->model, tasks_, fw.pinvTolerance);
  }
  if (fw.gravityCompensationMask.size() > 0) controller_->setGravityCompensationMask(fw.gravityCompensationMask);

  for (const auto& e : tasks_.entries()) e.task->declareParameters(registry_);
  constraints_.declareParameters(registry_);

  bus_ = options_.bus ? options_.bus : std::make_shared<param::TopicBus>();
  param::UdpOptions udpOptions;
  udpOptions.listenPort = fw.udpPort;
  auto transports = param::TransportRegistry::standard(bus_, udpOptions, options_.logDirectory);
  bindings_ = std::make_unique<param::BindingManager>(registry_, transports);

  const std::string prefix = fw.controllerName + "/diagnostics/";
  const Eigen::Index vec = 1 + 3 * n;
  routes_[ServoFrequency] = bindings_->openTopic("intra", prefix + "servoFrequency");
  routes_[ComputeLatency] = bindings_->openTopic("intra", prefix + "servoComputeLatency");
  routes_[ModelLatency] = bindings_->openTopic("intra", prefix + "modelLatency");
  routes_[CommandRoute] = bindings_->openTopic("intra", prefix + "command", {}, vec);
  routes_[JointState] = bindings_->openTopic("intra", prefix + "jointState", {}, vec);
  routes_[Errors] = bindings_->openTopic("intra", prefix + "errors");
  routes_[Warnings] = bindings_->openTopic("intra", prefix + "warnings");
  routes_[Gravity] = bindings_->openTopic("intra", prefix + "gravityVector", {}, vec);
  routes_[Events] = bindings_->openTopic("intra", kEventsTopic);
  packed_.setZero(vec);

  // Latched bindings deliver the current values when bound, so task outputs
  // must hold real data first.
  for (const auto& e : tasks_.entries()) {
    e.task->latchInputs();
    e.task->update(bundles_[active_]->model);
    e.task->pullUpdate();
  }
  for (const auto& b : spec_.bindings) bindings_->bind(b);

  events_ = std::make_unique<param::EventEngine>(registry_);
  for (const auto& e : spec_.events) events_->add(e.name, e.expression);

  snapshot_ = std::make_unique<Snapshot>();
  for (const auto& p : registry_.parameters()) snapshot_->values.push_back(p->value());
  for (const auto& c : constraints_.constraints()) snapshot_->constraintRows.push_back(c->rows());
  snapshot_->constraintJacobian = bundles_[active_]->projection.paddedJacobian();
  snapshot_->priorities.resize(tasks_.size());
  snapshot_->taskEnabled.resize(tasks_.size());
  snapshot_->constraintEnabled.resize(constraints_.constraints().size());
  takeSnapshot();

  const bool wantsUdp = fw.udpPort != 0 || std::any_of(spec_.bindings.begin(), spec_.bindings.end(),
                                                        [](const param::BindingConfig& b) { return b.transportType == "udp"; });
  if (wantsUdp) {
    udp_ = dynamic_cast<param::UdpTransport*>(bindings_->transports().get("udp").get());
    if (udp_) udp_->setServiceHandler([this](const std::string& s, const param::ParamValue& a) { return callService(s, a); });
  }
  const std::string serviceTopic = fw.controllerName + "/services/";
  serviceSubscription_ = bus_->subscribe(serviceTopic + "request", [this, serviceTopic](const std::string&, const param::ParamValue& v) {
    if (param::kindOf(v) != param::ParamKind::String) return;
    const std::string& text = std::get<std::string>(v);
    const auto space = text.find(' ');
    const std::string service = text.substr(0, space);
    const std::string args = space == std::string::npos ? std::string() : text.substr(space + 1);
    bus_->publish(serviceTopic + "response", callService(service, args));
  });

  if (options_.startPublisher) bindings_->queue().start();
  if (multiThreadedModel()) modelThread_ = std::thread([this] { modelWorkerLoop(); });
  if (multiThreadedTasks()) taskThread_ = std::thread([this] { taskWorkerLoop(); });
  previousNow_ = clock_->now() - clock_->period();
}

Runtime::~Runtime() {
  stop_.store(true);
  modelTrigger_.store(true);
  modelTrigger_.notify_all();
  taskTrigger_.store(true);
  taskTrigger_.notify_all();
  if (modelThread_.joinable()) modelThread_.join();
  if (taskThread_.joinable()) taskThread_.join();
  if (serviceSubscription_ >= 0) bus_->unsubscribe(serviceSubscription_);
  if (udp_) udp_->setServiceHandler(nullptr);
  if (bindings_) bindings_->queue().stop();
  bindings_.reset();
}

void Runtime::initBundle(ModelBundle& bundle, const rbd::RobotState& state) {
  bundle.staged.timestamp = state.timestamp;
  bundle.staged.position = state.position;
  bundle.staged.velocity = state.velocity;
  bundle.staged.effort = state.effort;
  constraints_.latch(bundle.inputs);
  updateBundle(bundle);
}

void Runtime::stageInto(ModelBundle& bundle) {
  bundle.staged.timestamp = state_.timestamp;
  bundle.staged.position = state_.position;
  bundle.staged.velocity = state_.velocity;
  bundle.staged.effort = state_.effort;
  constraints_.latch(bundle.inputs);
}

// Virtual coordinates stay at zero: the runtime models a welded or fixed base.
void Runtime::updateBundle(ModelBundle& bundle) {
  const Matrix& u = bundle.model.underactuation();
  bundle.q.noalias() = u.transpose() * bundle.staged.position;
  bundle.qd.noalias() = u.transpose() * bundle.staged.velocity;
  bundle.model.update(bundle.q, bundle.qd);
  bundle.model.setTimestamp(bundle.staged.timestamp);
  bundle.projection.update(bundle.model, constraints_, bundle.inputs);
}

void Runtime::modelWorkerLoop() {
  setIdlePriority(options_.idleWorkerPriority);
  while (true) {
    modelTrigger_.wait(false, std::memory_order_acquire);
    if (stop_.load()) break;
    modelTrigger_.store(false, std::memory_order_relaxed);
    if (options_.hooks.modelWorker) options_.hooks.modelWorker();
    {
      std::lock_guard<ServoGuard> lock(modelGuard_);
      updateBundle(*bundles_[inactive_]);
      updateReady_ = true;
    }
    modelBusy_.store(false, std::memory_order_release);
    modelBusy_.notify_all();
  }
}

void Runtime::taskWorkerLoop() {
  setIdlePriority(options_.idleWorkerPriority);
  while (true) {
    taskTrigger_.wait(false, std::memory_order_acquire);
    if (stop_.load()) break;
    taskTrigger_.store(false, std::memory_order_relaxed);
    if (options_.hooks.taskWorker) options_.hooks.taskWorker();
    const rbd::RobotModel& model = bundles_[pinned_]->model;
    for (const auto& e : tasks_.entries()) e.task->update(model);
    taskBusy_.store(false, std::memory_order_release);
    taskBusy_.notify_all();
  }
}

namespace {
// Any bundle that is neither active nor being read by the task worker.
int freeBundle(int active, int pinned, bool pinnedInUse) {
  for (int k = 0; k < 3; ++k)
    if (k != active && !(pinnedInUse && k == pinned)) return k;
  return -1;
}
}  // namespace

void Runtime::triggerTasks() {
  for (const auto& e : tasks_.entries()) e.task->latchInputs();
  pinned_ = active_;
  tasksPending_ = false;
  ++counters_.taskTriggers;
  taskBusy_.store(true, std::memory_order_relaxed);
  taskTrigger_.store(true, std::memory_order_release);
  taskTrigger_.notify_one();
}

void Runtime::swapModel() {
  active_ = inactive_;
  inactive_ = freeBundle(active_, pinned_, !taskWorkerIdle());
  updateReady_ = false;
  lastSwapTime_ = clock_->now();
  tasksPending_ = true;
  ++counters_.modelSwaps;
  if (multiThreadedTasks() && !taskWorkerIdle()) ++counters_.deferredTaskTriggers;
}

int Runtime::scanTasks(bool first) {
  int pulled = 0;
  const auto& entries = tasks_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].task->pullUpdate()) ++pulled;
    if (first && options_.hooks.servo) options_.hooks.servo(HookPoint::FirstScanTask, static_cast<int>(i));
  }
  return pulled;
}

CheckResult Runtime::checkForUpdates() {
  CheckResult r;
  auto hook = [this](HookPoint p, int i) {
    if (options_.hooks.servo) options_.hooks.servo(p, i);
  };
  r.tasksPulled = scanTasks(true);
  hook(HookPoint::AfterFirstScan, 0);
  const bool idle = taskWorkerIdle();
  hook(HookPoint::AfterIdleCheck, idle ? 1 : 0);
  if (idle && options_.secondScan) {
    r.tasksPulled += scanTasks(false);
    hook(HookPoint::AfterSecondScan, 0);
  }
  if (multiThreadedModel() && modelGuard_.try_lock()) {
    if (updateReady_) {
      swapModel();
      r.modelSwapped = true;
    }
    modelGuard_.unlock();
  }
  hook(HookPoint::AfterModelCheck, r.modelSwapped ? 1 : 0);
  if (multiThreadedTasks() && tasksPending_) {
    if (idle) {
      triggerTasks();
      r.tasksTriggered = true;
    }
  }
  return r;
}

void Runtime::updateTasksInline() {
  const rbd::RobotModel& model = bundles_[active_]->model;
  for (const auto& e : tasks_.entries()) {
    e.task->latchInputs();
    e.task->update(model);
    e.task->pullUpdate();
  }
}

void Runtime::waitForWorkers() {
  while (modelBusy_.load(std::memory_order_acquire)) modelBusy_.wait(true, std::memory_order_acquire);
  while (taskBusy_.load(std::memory_order_acquire)) taskBusy_.wait(true, std::memory_order_acquire);
}

void Runtime::publishText(int route, const char* format, ...) {
  char buffer[240];
  va_list args;
  va_start(args, format);
  const int length = std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  if (length <= 0) return;
  bindings_->queue().push(routes_[route], std::string_view(buffer, std::min<std::size_t>(length, sizeof buffer - 1)));
}

CycleResult Runtime::servoUpdate() {
  modelGuard_.setServoThread(std::this_thread::get_id());
  CycleResult r;
  r.cycle = counters_.cycles;
  const double now = clock_->now();
  registry_.setNow(now);
  double mark[kPhaseCount + 1];
  mark[0] = wallSeconds();

  // read
  r.stateRead = robot_.read(state_);
  if (!r.stateRead) ++counters_.readMisses;
  bindings_->applyInputs();
  applyActions();
  mark[1] = wallSeconds();

  // update model
  if (multiThreadedModel()) {
    const CheckResult first = checkForUpdates();
    r.tasksPulled += first.tasksPulled;
    r.modelSwapped |= first.modelSwapped;
    if (!modelBusy_.load(std::memory_order_acquire) && modelGuard_.try_lock()) {
      if (updateReady_) {
        swapModel();
        r.modelSwapped = true;
      }
      stageInto(*bundles_[inactive_]);
      modelBusy_.store(true, std::memory_order_relaxed);
      modelTrigger_.store(true, std::memory_order_release);
      modelGuard_.unlock();
      modelTrigger_.notify_one();
      ++counters_.modelStagings;
    } else {
      ++counters_.stagingsSkipped;
    }
    const CheckResult second = checkForUpdates();
    r.tasksPulled += second.tasksPulled;
    r.modelSwapped |= second.modelSwapped;
  } else {
    stageInto(*bundles_[inactive_]);
    updateBundle(*bundles_[inactive_]);
    swapModel();
    r.modelSwapped = true;
    ++counters_.modelStagings;
    if (multiThreadedTasks()) r.tasksPulled += checkForUpdates().tasksPulled;
  }
  if (!multiThreadedTasks()) {
    updateTasksInline();
    r.tasksPulled += static_cast<int>(tasks_.size());
  }
  modelLatency_ = now - lastSwapTime_;
  mark[2] = wallSeconds();

  // compute command
  const auto result = controller_->compute(bundles_[active_]->model, bundles_[active_]->projection, tasks_, state_,
                                           clock_->period(), command_);
  r.status = result.status;
  suppressed_ = result.status == control::ComputeStatus::InvalidTask || !command_.finite();
  if (suppressed_) {
    ++counters_.suppressedCommands;
    if (result.invalidTask >= 0) {
      publishText(Errors, "cycle %llu: command suppressed, task %s produced a non-finite reference",
                  static_cast<unsigned long long>(r.cycle), tasks_.entries()[result.invalidTask].task->name().c_str());
    } else {
      publishText(Errors, "cycle %llu: command suppressed, it contains NaN values",
                  static_cast<unsigned long long>(r.cycle));
    }
  } else {
    warnings_.clear();
    limits_.apply(command_, warnings_);
    for (std::size_t i = 0; i < warnings_.size(); ++i) {
      const auto& w = warnings_[i];
      publishText(Warnings, "cycle %llu: joint %d %s %.6g beyond limit %.6g", static_cast<unsigned long long>(r.cycle),
                  w.joint, std::string_view(control::toString(w.kind)).data(), w.value, w.limit);
    }
  }
  const bool hasTasks = result.status != control::ComputeStatus::NoTasks;
  if (!hasTasks && hadTasks_) publishText(Warnings, "cycle %llu: no enabled task, gravity compensation only",
                                          static_cast<unsigned long long>(r.cycle));
  hadTasks_ = hasTasks;
  if (modelLatency_ > spec_.framework.stalenessWarnThreshold) {
    ++counters_.staleCycles;
    if (!staleWarned_) publishText(Warnings, "cycle %llu: model is %.6f s old", static_cast<unsigned long long>(r.cycle),
                                   modelLatency_);
    staleWarned_ = true;
  } else {
    staleWarned_ = false;
  }
  mark[3] = wallSeconds();

  // emit events
  for (const auto& e : tasks_.entries()) e.task->publishOutputs();
  for (std::size_t i : events_->emit()) bindings_->queue().push(routes_[Events], std::string_view(events_->name(i)));
  for (std::size_t i : events_->newWarnings()) publishText(Warnings, "%s", events_->warning(i).c_str());
  mark[4] = wallSeconds();

  // write
  if (!suppressed_) {
    robot_.write(command_);
    r.commandWritten = true;
  }
  mark[5] = wallSeconds();

  for (int p = 0; p < kPhaseCount; ++p) phases_[p].add(mark[p + 1] - mark[p]);
  cycleStat_.add(mark[5] - mark[0]);
  publishDiagnostics(mark[5] - mark[0]);
  previousNow_ = now;
  takeSnapshot();
  bindings_->queue().flush();
  ++counters_.cycles;
  return r;
}

void Runtime::publishDiagnostics(double cycleSeconds) {
  auto& queue = bindings_->queue();
  const double now = clock_->now();
  const double elapsed = now - previousNow_;
  // Lockstep periods are exact; differencing the clock would only add rounding.
  const bool exact = clock_->kind() == ClockKind::Lockstep || elapsed <= 0.0;
  queue.push(routes_[ServoFrequency], exact ? clock_->frequency() : 1.0 / elapsed);
  queue.push(routes_[ComputeLatency], cycleSeconds);
  queue.push(routes_[ModelLatency], modelLatency_);
  queue.push(routes_[CommandRoute], command_.effort);
  const Eigen::Index n = state_.position.size();
  packed_[0] = state_.timestamp;
  packed_.segment(1, n) = state_.position;
  packed_.segment(1 + n, n) = state_.velocity;
  packed_.segment(1 + 2 * n, n) = state_.effort;
  queue.push(routes_[JointState], packed_);
  queue.push(routes_[Gravity], controller_->gravityTorque());
}

CycleResult Runtime::step() {
  const CycleResult r = servoUpdate();
  if (clock_->kind() == ClockKind::Lockstep && options_.waitForWorkers) waitForWorkers();
  if (robot_.lockstep()) robot_.advance(clock_->period());
  clock_->tick();
  return r;
}

void Runtime::run(std::uint64_t cycles) {
  for (std::uint64_t i = 0; i < cycles; ++i) step();
}

void Runtime::runFor(double seconds, const std::atomic<bool>* stop) {
  const double end = clock_->now() + seconds - 0.5 * clock_->period();
  while (clock_->now() < end) {
    if (stop && stop->load()) break;
    step();
  }
}

const rbd::RobotModel& Runtime::activeModel() const { return bundles_[active_]->model; }
const constraint::ConstraintProjection& Runtime::activeProjection() const { return bundles_[active_]->projection; }

int Runtime::udpPort() const { return udp_ ? udp_->port() : 0; }

std::uint64_t Runtime::lostTaskUpdates() const {
  std::uint64_t lost = 0;
  for (const auto& e : tasks_.entries()) lost += e.task->lostUpdates();
  return lost;
}

void Runtime::resetStats() {
  for (auto& p : phases_) p.reset();
  cycleStat_.reset();
}

std::string Runtime::diagnosticsTopic(std::string_view channel) const {
  return spec_.framework.controllerName + "/diagnostics/" + std::string(channel);
}

// ---- reconfiguration

void Runtime::reconfigure(const config::ControllerSpec& next) {
  std::lock_guard<std::mutex> lock(actionsMutex_);
  if (!desired_) desired_ = std::make_unique<config::ControllerSpec>(spec_);
  const auto actions = config::specDiff(*desired_, next);
  *desired_ = next;
  pendingActions_.insert(pendingActions_.end(), actions.begin(), actions.end());
  hasActions_.store(!pendingActions_.empty(), std::memory_order_release);
}

void Runtime::queueActions(const std::vector<config::Action>& actions) {
  for (const auto& a : actions) {
    const bool isTask = a.kind == config::Action::Kind::EnableTask || a.kind == config::Action::Kind::DisableTask ||
                        a.kind == config::Action::Kind::SetPriority;
    if (isTask && !tasks_.find(a.name)) throw config::ConfigError("no task '" + a.name + "' in the compound task");
    if (!isTask && !constraints_.find(a.name))
      throw config::ConfigError("no constraint '" + a.name + "' in the constraint set");
    if (a.kind == config::Action::Kind::SetPriority && a.priority < 0)
      throw config::ConfigError("priority must be non-negative");
  }
  std::lock_guard<std::mutex> lock(actionsMutex_);
  pendingActions_.insert(pendingActions_.end(), actions.begin(), actions.end());
  hasActions_.store(!pendingActions_.empty(), std::memory_order_release);
}

// Runs between cycles on the servo side. Priority changes wait for an idle
// task worker because they re-lay the compound task out.
void Runtime::applyActions() {
  if (!hasActions_.load(std::memory_order_acquire)) return;
  std::unique_lock<std::mutex> lock(actionsMutex_, std::try_to_lock);
  if (!lock.owns_lock()) return;
  bool relayout = false;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < pendingActions_.size(); ++i) {
    const auto& a = pendingActions_[i];
    switch (a.kind) {
      case config::Action::Kind::EnableTask: tasks_.find(a.name)->setEnabled(true); break;
      case config::Action::Kind::DisableTask: tasks_.find(a.name)->setEnabled(false); break;
      case config::Action::Kind::EnableConstraint: constraints_.find(a.name)->setEnabled(true); break;
      case config::Action::Kind::DisableConstraint: constraints_.find(a.name)->setEnabled(false); break;
      case config::Action::Kind::SetPriority:
        if (!taskWorkerIdle()) {
          pendingActions_[kept++] = a;
          continue;
        }
        tasks_.setPriority(a.name, a.priority);
        relayout = true;
        break;
    }
  }
  pendingActions_.resize(kept);
  hasActions_.store(kept > 0, std::memory_order_release);
  if (relayout) controller_->configure(tasks_);
}

// ---- introspection

void Runtime::takeSnapshot() {
  std::unique_lock<std::mutex> lock(snapshotMutex_, std::try_to_lock);
  if (!lock.owns_lock()) return;
  Snapshot& s = *snapshot_;
  s.cycle = counters_.cycles;
  const auto& params = registry_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) copyValue(*params[i], s.values[i]);
  const auto& entries = tasks_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    s.priorities[i] = entries[i].priority;
    s.taskEnabled[i] = entries[i].task->enabled();
  }
  const auto& cs = constraints_.constraints();
  for (std::size_t i = 0; i < cs.size(); ++i) s.constraintEnabled[i] = cs[i]->enabled();
  s.constraintJacobian = bundles_[active_]->projection.paddedJacobian();
}

const std::vector<std::string>& Runtime::serviceNames() {
  static const std::vector<std::string> names{
      "getTaskParameters",      "getConstraintParameters",       "getRealJointIndices",     "getActuableJointIndices",
      "getControllerConfiguration", "getConstraintJacobianMatrices", "getControlItParameters", "getCmdJointIndices"};
  return names;
}

std::string Runtime::callService(const std::string& service, const param::ParamValue& args) {
  std::string filter;
  if (param::kindOf(args) == param::ParamKind::String) filter = std::get<std::string>(args);
  try {
    std::lock_guard<std::mutex> lock(snapshotMutex_);
    const Snapshot& s = *snapshot_;
    const auto& params = registry_.parameters();
    const rbd::RobotDescription& description = bundles_[active_]->model.description();
    json out;
    out["service"] = service;
    out["cycle"] = s.cycle;

    auto ownedParameters = [&](const std::string& who) {
      json values = json::object();
      for (std::size_t i = 0; i < params.size(); ++i)
        if (owner(params[i]->name()) == who) values[attribute(params[i]->name())] = toJson(s.values[i]);
      return values;
    };
    auto jointList = [&](auto keep) {
      json joints = json::array();
      int index = 0;
      for (const auto& name : description.realJointNames()) {
        if (keep(name)) joints.push_back({{"name", name}, {"index", index}});
        ++index;
      }
      return joints;
    };

    if (service == "getTaskParameters") {
      json tasks = json::object();
      for (const auto& e : tasks_.entries()) {
        if (!filter.empty() && e.task->name() != filter) continue;
        tasks[e.task->name()] = {{"type", e.task->typeName()}, {"parameters", ownedParameters(e.task->name())}};
      }
      if (!filter.empty() && tasks.empty()) throw UnknownNameError("task", filter);
      out["tasks"] = tasks;
    } else if (service == "getConstraintParameters") {
      json constraints = json::object();
      for (const auto& c : constraints_.constraints()) {
        if (!filter.empty() && c->name() != filter) continue;
        constraints[c->name()] = {{"type", c->typeName()}, {"parameters", ownedParameters(c->name())}};
      }
      if (!filter.empty() && constraints.empty()) throw UnknownNameError("constraint", filter);
      out["constraints"] = constraints;
    } else if (service == "getRealJointIndices" || service == "getCmdJointIndices") {
      out["joints"] = jointList([](const std::string&) { return true; });
    } else if (service == "getActuableJointIndices") {
      out["joints"] = jointList([&](const std::string& j) { return !constraints_.isConstrained(j); });
    } else if (service == "getControllerConfiguration") {
      out["controller"] = spec_.framework.controllerName;
      out["type"] = std::string(config::toString(spec_.framework.controllerType));
      json tasks = json::array();
      const auto& entries = tasks_.entries();
      for (std::size_t i = 0; i < entries.size(); ++i)
        tasks.push_back({{"name", entries[i].task->name()},
                         {"type", entries[i].task->typeName()},
                         {"priority", s.priorities[i]},
                         {"enabled", static_cast<bool>(s.taskEnabled[i])}});
      out["compoundTask"] = tasks;
      json constraints = json::array();
      const auto& cs = constraints_.constraints();
      for (std::size_t i = 0; i < cs.size(); ++i)
        constraints.push_back({{"name", cs[i]->name()},
                               {"type", cs[i]->typeName()},
                               {"enabled", static_cast<bool>(s.constraintEnabled[i])}});
      out["constraintSet"] = constraints;
      json bindings = json::array();
      for (const auto& b : bindings_->bindings())
        bindings.push_back({{"parameter", b.parameter},
                            {"direction", std::string(param::toString(b.direction))},
                            {"transport", b.transportType},
                            {"topic", b.topic}});
      out["bindings"] = bindings;
      json events = json::array();
      for (const auto& e : spec_.events) events.push_back({{"name", e.name}, {"expression", e.expression}});
      out["events"] = events;
    } else if (service == "getConstraintJacobianMatrices") {
      json constraints = json::object();
      const auto& cs = constraints_.constraints();
      int row = 0;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const int rows = s.constraintRows[i];
        constraints[cs[i]->name()] = {{"enabled", static_cast<bool>(s.constraintEnabled[i])},
                                      {"jacobian", matrixJson(s.constraintJacobian.middleRows(row, rows))}};
        row += rows;
      }
      out["constraints"] = constraints;
    } else if (service == "getControlItParameters") {
      const auto& f = spec_.framework;
      auto switchJson = [](const config::JointSwitch& js) {
        return js.perJoint.empty() ? json(js.all) : json(js.perJoint);
      };
      out["parameters"] = {
          {"servo_frequency", f.servoFrequency},
          {"single_threaded_model", f.singleThreadedModel},
          {"single_threaded_tasks", f.singleThreadedTasks},
          {"world_gravity", {f.worldGravity.x(), f.worldGravity.y(), f.worldGravity.z()}},
          {"gravity_compensation_mask", toJson(param::ParamValue(f.gravityCompensationMask))},
          {"enforce_effort_limits", switchJson(f.enforceEffortLimits)},
          {"enforce_position_limits", switchJson(f.enforcePositionLimits)},
          {"enforce_velocity_limits", switchJson(f.enforceVelocityLimits)},
          {"max_effort_command", std::isfinite(f.maxEffortCommand) ? json(f.maxEffortCommand) : json(nullptr)},
          {"whole_body_controller_type", std::string(config::toString(f.controllerType))},
          {"robot_interface_type", std::string(sim::toString(f.robotInterface))},
          {"servo_clock_type", f.servoClock},
          {"log_level", f.logLevel},
          {"controller_name", f.controllerName},
      };
    } else {
      return json{{"service", service}, {"error", "unknown service '" + service + "'"}}.dump();
    }
    return out.dump();
  } catch (const std::exception& e) {
    return json{{"service", service}, {"error", e.what()}}.dump();
  }
}

}  // namespace wbc::runtime
