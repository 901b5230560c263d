#include "wbc/task/compound_task.hpp"

#include <algorithm>

namespace wbc::task {

Task& CompoundTask::add(std::unique_ptr<Task> task, int priority, bool enabled) {
  if (priority < 0) throw ValidationError("task priority must be non-negative");
  if (find(task->name())) throw ValidationError("duplicate task '" + task->name() + "'");
  task->setEnabled(enabled);
  entries_.push_back({std::move(task), priority});
  relayout();
  return *entries_.back().task;
}

Task* CompoundTask::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.task->name() == name) return e.task.get();
  }
  return nullptr;
}

int CompoundTask::priorityOf(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.task->name() == name) return e.priority;
  }
  throw UnknownNameError("task", std::string(name));
}

void CompoundTask::setPriority(std::string_view name, int priority) {
  if (priority < 0) throw ValidationError("task priority must be non-negative");
  for (auto& e : entries_) {
    if (e.task->name() == name) {
      e.priority = priority;
      relayout();
      return;
    }
  }
  throw UnknownNameError("task", std::string(name));
}

int CompoundTask::enabledCount() const {
  return static_cast<int>(std::count_if(entries_.begin(), entries_.end(), [](const Entry& e) { return e.task->enabled(); }));
}

void CompoundTask::relayout() {
  priorities_.clear();
  for (const auto& e : entries_) priorities_.push_back(e.priority);
  std::sort(priorities_.begin(), priorities_.end());
  priorities_.erase(std::unique(priorities_.begin(), priorities_.end()), priorities_.end());
  capacity_.assign(priorities_.size(), 0);
  members_.assign(priorities_.size(), {});
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto level = std::lower_bound(priorities_.begin(), priorities_.end(), entries_[i].priority) - priorities_.begin();
    capacity_[level] += entries_[i].task->dimension();
    members_[level].push_back(static_cast<int>(i));
  }
}

CompoundTask::Aggregate CompoundTask::aggregate(int level, Matrix& jacobian, Vector& command) const {
  Aggregate out;
  for (int index : members_[level]) {
    const Task& task = *entries_[index].task;
    if (!task.enabled()) continue;
    const TaskState& state = task.active();
    if (!state.valid) continue;
    const int d = task.dimension();
    if (!state.command.allFinite() || !state.jacobian.allFinite()) {
      out.invalidTask = index;
      continue;
    }
    jacobian.middleRows(out.rows, d) = state.jacobian;
    command.segment(out.rows, d) = state.command;
    out.rows += d;
  }
  const int rest = static_cast<int>(command.size()) - out.rows;
  jacobian.bottomRows(rest).setZero();
  command.tail(rest).setZero();
  return out;
}

std::optional<std::pair<Matrix, Vector>> CompoundTask::aggregateLevel(int priority) const {
  const auto it = std::find(priorities_.begin(), priorities_.end(), priority);
  if (it == priorities_.end()) return std::nullopt;
  const int level = static_cast<int>(it - priorities_.begin());
  const int dofs = entries_.front().task->dofCount();
  Matrix j(capacity_[level], dofs);
  Vector x(capacity_[level]);
  const Aggregate a = aggregate(level, j, x);
  if (a.rows == 0) return std::nullopt;
  return std::make_pair(Matrix(j.topRows(a.rows)), Vector(x.head(a.rows)));
}

}  // namespace wbc::task
