#pragma once

#include <memory>
#include <optional>
#include <string>

#include "wbc/config/spec.hpp"
#include "wbc/rbd/description.hpp"
#include "wbc/runtime/runtime.hpp"
#include "wbc/sim/interface.hpp"
#include "wbc/sim/plant.hpp"

namespace wbc::runtime {

/// Command-line style overrides applied on top of a loaded spec.
struct Overrides {
  std::optional<bool> singleThreaded;  // sets both single_threaded_* switches
  std::optional<ClockKind> clock;      // also picks the matching simulated interface
  std::optional<std::uint64_t> seed;
  std::optional<int> udpPort;
  std::optional<int> latencyCycles;
};

config::ControllerSpec applyOverrides(config::ControllerSpec spec, const Overrides& overrides);

/// Plant start posture: the goal of the first joint-position task in the
/// compound task, zero otherwise.
Vector initialPosture(const config::ControllerSpec& spec, const rbd::RobotDescription& description);

/// A controller wired to its robot: a simulated plant behind the configured
/// interface kind, or a remote plant over UDP.
class Session {
 public:
  Session(config::ControllerSpec spec, rbd::RobotDescription description, RuntimeOptions options = {},
          std::optional<Vector> initialPosition = std::nullopt);
  ~Session();

  static std::unique_ptr<Session> fromFiles(const std::string& configPath, const std::string& robotPath,
                                            const Overrides& overrides = {}, RuntimeOptions options = {});

  Runtime& runtime() { return *runtime_; }
  /// Null for the udp-remote interface.
  sim::Plant* plant() { return plant_.get(); }
  sim::RobotInterface& robot() { return *robot_; }
  const rbd::RobotDescription& description() const { return description_; }
  const config::ControllerSpec& spec() const { return spec_; }

 private:
  config::ControllerSpec spec_;
  rbd::RobotDescription description_;
  std::unique_ptr<sim::Plant> plant_;
  std::unique_ptr<sim::RobotInterface> robot_;
  std::unique_ptr<Runtime> runtime_;
};

}  // namespace wbc::runtime
