#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/common.hpp"
#include "wbc/param/parameter.hpp"
#include "wbc/rbd/model.hpp"
#include "wbc/task/pid.hpp"

namespace wbc::task {

enum class TaskStatus { Ok, InvalidGoal, Singular };

std::string_view toString(TaskStatus status);

/// Result of one task update: Jacobian, reference acceleration and error.
struct TaskState {
  Matrix jacobian;
  Vector command;
  Vector error;
  std::vector<Vector> outputs;  // extra outputs beyond the error, in declaration order
  TaskStatus status = TaskStatus::Ok;
  bool valid = false;
  std::uint64_t sequence = 0;
  double modelTimestamp = 0.0;
};

/// Base class for operational-space and postural objectives.
///
/// A task keeps two TaskStates. The updater writes the inactive one and raises
/// a completion flag; the servo side swaps it in with pullUpdate(). Inputs
/// (goals, gains, enabled) exist twice as well: the servo-side copy is what
/// parameters and bindings touch, latchInputs() copies it for the updater.
class Task {
 public:
  Task(std::string name, std::string typeName, int dimension, int dofs, const PidGains& gains);
  virtual ~Task() = default;
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;

  const std::string& name() const { return name_; }
  const std::string& typeName() const { return typeName_; }
  int dimension() const { return dimension_; }
  int dofCount() const { return dofs_; }

  bool enabled() const { return enabled_; }
  void setEnabled(bool enabled) { enabled_ = enabled; }

  /// Servo-side input by name ("goalPosition", "kp", ...). Null if absent.
  Vector* findInput(std::string_view name);
  const Vector* findInput(std::string_view name) const;
  std::vector<std::string> inputNames() const;
  std::vector<std::string> outputNames() const;
  /// Throws UnknownNameError / DimensionError. Scalars broadcast over vector inputs.
  void setInput(std::string_view name, const Vector& value);

  void declareParameters(param::ParameterRegistry& registry);

  /// Servo side; only while the updater is idle.
  void latchInputs();

  /// Updater side. Computes against the model into the inactive state.
  void update(const rbd::RobotModel& model);

  /// Servo side. Swaps the completed state in and refreshes output parameters.
  bool pullUpdate();
  bool updatePending() const { return complete_.load(std::memory_order_acquire); }
  const TaskState& active() const { return states_[activeIndex_.load(std::memory_order_relaxed)]; }

  /// Notifies listeners of the output parameters (error and friends).
  void publishOutputs();

  /// Sequence gaps seen by pullUpdate plus overwrites seen by update.
  std::uint64_t lostUpdates() const { return lostSeen_ + lostOverwrites_.load(std::memory_order_relaxed); }
  std::uint64_t updatesPulled() const { return pulled_; }

  /// Fallback step for the PID integrator when model timestamps do not advance.
  void setNominalPeriod(double dt) { nominalPeriod_ = dt; }

  /// Forgets integrator state and resets both buffers (used on reconfiguration).
  void resetState();

 protected:
  int addInput(std::string name, Vector initial);
  int addOutput(std::string name, int size);
  /// Latched (updater-side) input value.
  const Vector& input(int index) const { return inputs_[index].latched; }
  const PidGains& latchedGains() const { return latchedGains_; }

  virtual void compute(const rbd::RobotModel& model, double dt, TaskState& state) = 0;

  /// Runs the PID with the latched gains into state.command.
  void pid(const Vector& error, const Vector& errorDot, const Vector& feedforward, double dt, TaskState& state);

 private:
  struct Slot {
    std::string name;
    Vector value;
    Vector latched;
  };

  std::string name_;
  std::string typeName_;
  int dimension_;
  int dofs_;
  bool enabled_ = true;
  bool latchedEnabled_ = true;

  std::vector<Slot> inputs_;
  int kp_, ki_, kd_, limit_;
  PidGains latchedGains_;
  PidController pidController_;

  std::vector<std::string> outputNames_;
  std::vector<Vector> outputValues_;  // servo-side mirrors; index 0 is the error
  std::vector<param::Parameter*> outputParams_;

  TaskState states_[2];
  std::atomic<int> activeIndex_{0};
  std::atomic<bool> complete_{false};
  std::uint64_t sequence_ = 0;  // updater side
  double lastModelTime_ = 0.0;
  bool haveModelTime_ = false;
  double nominalPeriod_ = 1e-3;
  std::uint64_t lastPulled_ = 0;
  std::uint64_t pulled_ = 0;
  std::uint64_t lostSeen_ = 0;
  std::atomic<std::uint64_t> lostOverwrites_{0};
};

}  // namespace wbc::task
