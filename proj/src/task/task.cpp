#include "wbc/task/task.hpp"

namespace wbc::task {

std::string_view toString(TaskStatus status) {
  switch (status) {
    case TaskStatus::Ok: return "ok";
    case TaskStatus::InvalidGoal: return "invalid goal";
    case TaskStatus::Singular: return "singular";
  }
  return "?";
}

Task::Task(std::string name, std::string typeName, int dimension, int dofs, const PidGains& gains)
    : name_(std::move(name)), typeName_(std::move(typeName)), dimension_(dimension), dofs_(dofs),
      pidController_(dimension) {
  gains.check(dimension);
  kp_ = addInput("kp", gains.kp);
  ki_ = addInput("ki", gains.ki);
  kd_ = addInput("kd", gains.kd);
  limit_ = addInput("integratorLimit", gains.integratorLimit);
  latchedGains_ = gains;
  addOutput("error", dimension);
  for (auto& state : states_) {
    state.jacobian.setZero(dimension, dofs);
    state.command.setZero(dimension);
    state.error.setZero(dimension);
  }
}

int Task::addInput(std::string name, Vector initial) {
  inputs_.push_back({std::move(name), initial, initial});
  return static_cast<int>(inputs_.size()) - 1;
}

int Task::addOutput(std::string name, int size) {
  outputNames_.push_back(std::move(name));
  outputValues_.push_back(Vector::Zero(size));
  if (outputNames_.size() > 1) {
    for (auto& state : states_) state.outputs.push_back(Vector::Zero(size));
  }
  return static_cast<int>(outputNames_.size()) - 1;
}

Vector* Task::findInput(std::string_view name) {
  for (auto& slot : inputs_) {
    if (slot.name == name) return &slot.value;
  }
  return nullptr;
}

const Vector* Task::findInput(std::string_view name) const { return const_cast<Task*>(this)->findInput(name); }

std::vector<std::string> Task::inputNames() const {
  std::vector<std::string> out;
  for (const auto& slot : inputs_) out.push_back(slot.name);
  return out;
}

std::vector<std::string> Task::outputNames() const { return outputNames_; }

void Task::setInput(std::string_view name, const Vector& value) {
  Vector* slot = findInput(name);
  if (!slot) throw UnknownNameError("input of task '" + name_ + "'", std::string(name));
  if (value.size() == 1 && slot->size() != 1) {
    slot->setConstant(value(0));
  } else {
    requireSize(value.size(), slot->size(), (name_ + "." + std::string(name)).c_str());
    *slot = value;
  }
  if (name == "kp" || name == "ki" || name == "kd" || name == "integratorLimit") {
    if ((slot->array() < 0).any()) throw ValidationError(name_ + "." + std::string(name) + " must be non-negative");
  }
}

void Task::declareParameters(param::ParameterRegistry& registry) {
  for (auto& slot : inputs_) registry.declare(name_, slot.name, &slot.value);
  registry.declare(name_, "enabled", &enabled_);
  outputParams_.clear();
  for (std::size_t i = 0; i < outputNames_.size(); ++i) {
    outputParams_.push_back(&registry.declare(name_, outputNames_[i], &outputValues_[i]));
  }
}

void Task::latchInputs() {
  for (auto& slot : inputs_) slot.latched = slot.value;
  latchedGains_.kp = inputs_[kp_].latched;
  latchedGains_.ki = inputs_[ki_].latched;
  latchedGains_.kd = inputs_[kd_].latched;
  latchedGains_.integratorLimit = inputs_[limit_].latched;
  latchedEnabled_ = enabled_;
}

void Task::update(const rbd::RobotModel& model) {
  if (!latchedEnabled_) return;
  if (complete_.load(std::memory_order_acquire)) lostOverwrites_.fetch_add(1, std::memory_order_relaxed);
  TaskState& state = states_[1 - activeIndex_.load(std::memory_order_relaxed)];
  double dt = nominalPeriod_;
  if (haveModelTime_ && model.timestamp() > lastModelTime_) dt = model.timestamp() - lastModelTime_;
  lastModelTime_ = model.timestamp();
  haveModelTime_ = true;
  state.status = TaskStatus::Ok;
  compute(model, dt, state);
  state.valid = state.status == TaskStatus::Ok;
  if (!state.valid) {
    state.command.setZero();
    state.jacobian.setZero();
  }
  state.sequence = ++sequence_;
  state.modelTimestamp = model.timestamp();
  complete_.store(true, std::memory_order_release);
}

bool Task::pullUpdate() {
  if (!complete_.load(std::memory_order_acquire)) return false;
  const int next = 1 - activeIndex_.load(std::memory_order_relaxed);
  activeIndex_.store(next, std::memory_order_relaxed);
  complete_.store(false, std::memory_order_release);
  const TaskState& state = states_[next];
  if (pulled_ > 0 && state.sequence != lastPulled_ + 1) lostSeen_ += state.sequence - lastPulled_ - 1;
  lastPulled_ = state.sequence;
  ++pulled_;
  outputValues_[0] = state.error;
  for (std::size_t i = 0; i < state.outputs.size(); ++i) outputValues_[i + 1] = state.outputs[i];
  return true;
}

void Task::publishOutputs() {
  for (auto* p : outputParams_) p->notifyChanged();
}

void Task::resetState() {
  pidController_.reset();
  haveModelTime_ = false;
  for (auto& state : states_) state.valid = false;
  complete_.store(false);
}

void Task::pid(const Vector& error, const Vector& errorDot, const Vector& feedforward, double dt, TaskState& state) {
  pidController_.compute(error, errorDot, feedforward, latchedGains_, dt, state.command);
}

}  // namespace wbc::task
