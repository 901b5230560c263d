#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string_view>

namespace wbc::runtime {

enum class ClockKind { Lockstep, Monotonic };
std::string_view toString(ClockKind kind);

/// Paces the servo loop.
class ServoClock {
 public:
  explicit ServoClock(double frequency);
  virtual ~ServoClock() = default;
  double frequency() const { return frequency_; }
  double period() const { return 1.0 / frequency_; }
  std::uint64_t cycles() const { return cycles_; }
  /// Seconds since start.
  virtual double now() const = 0;
  /// Ends the current cycle; returns once the next one may begin.
  virtual void tick() = 0;
  virtual ClockKind kind() const = 0;
  std::uint64_t overruns() const { return overruns_; }

 protected:
  double frequency_;
  std::uint64_t cycles_ = 0;
  std::uint64_t overruns_ = 0;
};

/// Simulated time: exactly cycles / frequency, no waiting.
class LockstepClock : public ServoClock {
 public:
  using ServoClock::ServoClock;
  double now() const override { return static_cast<double>(cycles_) / frequency_; }
  void tick() override { ++cycles_; }
  ClockKind kind() const override { return ClockKind::Lockstep; }
};

/// Wall time. Sleeps to the next period boundary; late cycles count as
/// overruns and the schedule skips ahead instead of bursting.
class MonotonicClock : public ServoClock {
 public:
  explicit MonotonicClock(double frequency);
  double now() const override;
  void tick() override;
  ClockKind kind() const override { return ClockKind::Monotonic; }

 private:
  std::chrono::steady_clock::time_point start_;
  std::uint64_t slot_ = 0;
};

std::unique_ptr<ServoClock> makeClock(ClockKind kind, double frequency);

/// Wall-clock seconds from a fixed origin, for latency measurement.
double wallSeconds();

}  // namespace wbc::runtime
