#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wbc/control/command.hpp"
#include "wbc/param/transport.hpp"
#include "wbc/rbd/state.hpp"
#include "wbc/sim/plant.hpp"

namespace wbc::sim {

enum class InterfaceKind { Lockstep, Freerun, UdpRemote };

std::string_view toString(InterfaceKind kind);
std::optional<InterfaceKind> interfaceKindFromString(std::string_view text);

struct NoiseSpec {
  double position = 0.0, velocity = 0.0, effort = 0.0;  // standard deviations
  bool operator==(const NoiseSpec&) const = default;
};

struct InterfaceSpec {
  InterfaceKind kind = InterfaceKind::Lockstep;
  int latencyCycles = 0;
  NoiseSpec noise;
  std::uint64_t seed = 1;
};

/// Read/write contract between the servo loop and a robot.
class RobotInterface {
 public:
  virtual ~RobotInterface() = default;
  virtual int jointCount() const = 0;
  /// Latest available state. Never blocks; false until a first state exists.
  virtual bool read(rbd::RobotState& state) = 0;
  virtual void write(const control::Command& command) = 0;
  /// Blocking wait for a first state (used once at initialization).
  virtual bool waitForState(rbd::RobotState& state, double timeoutSeconds);
  /// Lockstep plants advance one period when the servo clock ticks.
  virtual bool lockstep() const { return false; }
  virtual void advance(double) {}
  virtual void start() {}
  virtual void stop() {}
};

/// Plant plus latency and noise, stepped explicitly.
///
/// A total latency of L cycles is split into a sensing delay of L/2 cycles
/// (rounded down) and a command delay of the remainder, so a command written
/// in cycle k first shows in the state read in cycle k + 1 + L. The plant
/// stays frozen until its first delayed command is due.
class DelayedPlant {
 public:
  DelayedPlant(Plant& plant, int latencyCycles, NoiseSpec noise, std::uint64_t seed);

  void read(rbd::RobotState& state);
  void write(const control::Command& command);
  void advance(double dt);
  /// Refills the delay lines from the current plant state (after a reset).
  void resync();

  Plant& plant() { return plant_; }
  const Plant& plant() const { return plant_; }
  int sensingDelay() const { return sensingDelay_; }
  int commandDelay() const { return commandDelay_; }

 private:
  Plant& plant_;
  int sensingDelay_, commandDelay_;
  NoiseSpec noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<rbd::RobotState> states_;  // ring, newest at stateHead_
  std::size_t stateHead_ = 0, stateCount_ = 0;
  std::vector<Vector> commands_;
  std::size_t commandsWritten_ = 0;
  Vector effort_;
};

class LockstepInterface : public RobotInterface {
 public:
  LockstepInterface(Plant& plant, const InterfaceSpec& spec) : core_(plant, spec.latencyCycles, spec.noise, spec.seed) {}
  int jointCount() const override { return core_.plant().jointCount(); }
  bool read(rbd::RobotState& state) override {
    core_.read(state);
    return true;
  }
  void write(const control::Command& command) override { core_.write(command); }
  bool lockstep() const override { return true; }
  void advance(double dt) override { core_.advance(dt); }
  DelayedPlant& core() { return core_; }

 private:
  DelayedPlant core_;
};

/// Plant stepping in real time on its own thread. The servo side only
/// try-locks; on contention it keeps its previous state copy and queues the
/// command for the next write.
class FreerunInterface : public RobotInterface {
 public:
  FreerunInterface(Plant& plant, const InterfaceSpec& spec, double period);
  ~FreerunInterface() override;
  int jointCount() const override { return plant_.jointCount(); }
  bool read(rbd::RobotState& state) override;
  void write(const control::Command& command) override;
  void start() override;
  void stop() override;
  std::uint64_t contention() const { return contention_.load(); }
  std::uint64_t steps() const { return steps_.load(); }

 private:
  Plant& plant_;
  DelayedPlant core_;
  double period_;
  std::mutex mutex_;
  rbd::RobotState cached_;
  control::Command pending_;
  bool hasPending_ = false;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> contention_{0}, steps_{0};
  std::thread thread_;
};

/// State layout on "robot/state": [time, q..., qd..., effort...].
/// Command layout on "robot/command": [effort..., position..., velocity...].
Vector packState(const rbd::RobotState& state);
bool unpackState(const Vector& packed, rbd::RobotState& state);
Vector packCommand(const control::Command& command);
bool unpackCommand(const Vector& packed, control::Command& command);

inline constexpr const char* kStateTopic = "robot/state";
inline constexpr const char* kCommandTopic = "robot/command";

/// Controller side of an external plant process.
class UdpRemoteInterface : public RobotInterface {
 public:
  UdpRemoteInterface(int joints, int listenPort, std::string plantHost, int plantPort);
  ~UdpRemoteInterface() override;
  int jointCount() const override { return joints_; }
  bool read(rbd::RobotState& state) override;
  void write(const control::Command& command) override;
  int port() const { return socket_.port(); }
  /// Destination for commands; call before the first write.
  void setPlant(std::string host, int port) {
    host_ = std::move(host);
    plantPort_ = port;
  }

 private:
  int joints_;
  std::string host_;
  int plantPort_;
  param::UdpSocket socket_;
  std::mutex mutex_;
  rbd::RobotState latest_, cached_;
  bool fresh_ = false, have_ = false;
  param::wire::Message message_;
  std::vector<std::uint8_t> buffer_;
  Vector packed_;
};

/// Runs a plant in real time and exchanges state and commands over UDP.
/// When no command arrives for timeout seconds the last command is held and
/// a warning is logged.
class RemotePlantServer {
 public:
  RemotePlantServer(Plant& plant, double period, int listenPort, std::string controllerHost, int controllerPort,
                    double timeout = 0.1);
  ~RemotePlantServer();
  int port() const { return socket_.port(); }
  void start();
  void stop();
  std::uint64_t timeouts() const { return timeouts_.load(); }
  std::uint64_t commandsReceived() const { return received_.load(); }

 private:
  Plant& plant_;
  double period_, timeout_;
  std::string host_;
  int controllerPort_;
  param::UdpSocket socket_;
  std::mutex mutex_;
  Vector effort_;
  double lastCommand_ = 0.0;
  bool timedOut_ = false;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> timeouts_{0}, received_{0};
  std::thread thread_;
};

}  // namespace wbc::sim
