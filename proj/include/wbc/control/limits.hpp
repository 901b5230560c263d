#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "wbc/control/command.hpp"
#include "wbc/rbd/description.hpp"

namespace wbc::control {

enum class LimitKind { Effort, Position, Velocity, MaxEffort };

std::string_view toString(LimitKind kind);

struct LimitWarning {
  int joint = -1;  // index into the real joints
  LimitKind kind = LimitKind::Effort;
  double value = 0.0;
  double limit = 0.0;
};

/// Fixed-capacity warning buffer usable from the servo loop. Overflow is counted, not stored.
class WarningSink {
 public:
  static constexpr std::size_t kCapacity = 64;

  void push(const LimitWarning& w) {
    if (count_ < kCapacity) {
      items_[count_++] = w;
    } else {
      ++dropped_;
    }
  }
  std::size_t size() const { return count_; }
  const LimitWarning& operator[](std::size_t i) const { return items_[i]; }
  std::size_t dropped() const { return dropped_; }
  void clear() {
    count_ = 0;
    dropped_ = 0;
  }

 private:
  std::array<LimitWarning, kCapacity> items_{};
  std::size_t count_ = 0;
  std::size_t dropped_ = 0;
};

/// Per-joint enforcement switches. Empty vectors mean "off for every joint".
struct LimitFlags {
  std::vector<bool> effort, position, velocity;
  double maxEffortCommand = std::numeric_limits<double>::infinity();
};

/// Truncates command entries to the description's joint limits.
class LimitEnforcer {
 public:
  LimitEnforcer(const rbd::RobotDescription& description, LimitFlags flags);

  /// Truncates enabled classes in place and records one warning per truncation.
  /// Effort beyond max_effort_command always warns, enforcement or not.
  void apply(Command& command, WarningSink& warnings) const;

 private:
  LimitFlags flags_;
  Vector lower_, upper_, velocity_, effort_;
};

}  // namespace wbc::control
