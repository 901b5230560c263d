#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wbc/task/task.hpp"

namespace wbc::task {

/// Prioritized collection of tasks. Lower priority numbers come first.
///
/// Each distinct priority number forms a level. Level buffers are sized for
/// all tasks at the level, enabled or not, so toggling tasks never reallocates.
class CompoundTask {
 public:
  struct Entry {
    std::unique_ptr<Task> task;
    int priority = 0;
  };

  /// Result of aggregating one level into padded buffers.
  struct Aggregate {
    int rows = 0;          // rows filled by enabled tasks
    int invalidTask = -1;  // index of a task whose command is not finite
  };

  Task& add(std::unique_ptr<Task> task, int priority, bool enabled = true);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Task* find(std::string_view name) const;
  int priorityOf(std::string_view name) const;

  /// Changes a task's level. Reallocates the level layout; call between cycles.
  void setPriority(std::string_view name, int priority);

  /// Distinct priority numbers, ascending.
  const std::vector<int>& priorities() const { return priorities_; }
  int levelCount() const { return static_cast<int>(priorities_.size()); }
  /// Padded row count of level k (sum of all task dimensions at that level).
  int levelCapacity(int level) const { return capacity_[level]; }
  /// Number of enabled tasks.
  int enabledCount() const;

  /// Stacks enabled, valid active task states of level k in declaration order.
  /// jacobian/command must be sized levelCapacity(k); unused rows are zeroed.
  Aggregate aggregate(int level, Matrix& jacobian, Vector& command) const;

  /// Allocating form by priority number; empty when no enabled task exists there.
  std::optional<std::pair<Matrix, Vector>> aggregateLevel(int priority) const;

 private:
  void relayout();

  std::vector<Entry> entries_;
  std::vector<int> priorities_;
  std::vector<int> capacity_;
  std::vector<std::vector<int>> members_;  // entry indices per level, declaration order
};

}  // namespace wbc::task
