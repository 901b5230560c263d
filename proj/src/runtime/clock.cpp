#include "wbc/runtime/clock.hpp"

#include <cmath>
#include <thread>

#include "wbc/common.hpp"

namespace wbc::runtime {

std::string_view toString(ClockKind kind) { return kind == ClockKind::Lockstep ? "lockstep" : "monotonic"; }

ServoClock::ServoClock(double frequency) : frequency_(frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ValidationError("servo frequency must be positive");
}

MonotonicClock::MonotonicClock(double frequency) : ServoClock(frequency), start_(std::chrono::steady_clock::now()) {}

double MonotonicClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void MonotonicClock::tick() {
  ++cycles_;
  ++slot_;
  const double elapsed = now();
  const double due = static_cast<double>(slot_) * period();
  if (elapsed > due) {
    ++overruns_;
    slot_ = static_cast<std::uint64_t>(std::floor(elapsed / period())) + 1;
  }
  std::this_thread::sleep_until(start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                             std::chrono::duration<double>(static_cast<double>(slot_) * period())));
}

std::unique_ptr<ServoClock> makeClock(ClockKind kind, double frequency) {
  if (kind == ClockKind::Lockstep) return std::make_unique<LockstepClock>(frequency);
  return std::make_unique<MonotonicClock>(frequency);
}

double wallSeconds() {
  static const auto origin = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count();
}

}  // namespace wbc::runtime
