#include "wbc/sim/interface.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace wbc::sim {

std::string_view toString(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::Lockstep: return "sim-lockstep";
    case InterfaceKind::Freerun: return "sim-freerun";
    case InterfaceKind::UdpRemote: return "udp-remote";
  }
  return "?";
}

std::optional<InterfaceKind> interfaceKindFromString(std::string_view text) {
  if (text == "sim-lockstep") return InterfaceKind::Lockstep;
  if (text == "sim-freerun") return InterfaceKind::Freerun;
  if (text == "udp-remote") return InterfaceKind::UdpRemote;
  return std::nullopt;
}

bool RobotInterface::waitForState(rbd::RobotState& state, double timeoutSeconds) {
  const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeoutSeconds);
  while (!read(state)) {
    if (std::chrono::steady_clock::now() >= end) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  return true;
}

// ---- delay line

DelayedPlant::DelayedPlant(Plant& plant, int latencyCycles, NoiseSpec noise, std::uint64_t seed)
    : plant_(plant), noise_(noise), rng_(seed) {
  if (latencyCycles < 0) throw ValidationError("latency cycles must be non-negative");
  if (noise.position < 0 || noise.velocity < 0 || noise.effort < 0)
    throw ValidationError("noise standard deviations must be non-negative");
  sensingDelay_ = latencyCycles / 2;
  commandDelay_ = latencyCycles - sensingDelay_;
  states_.resize(static_cast<std::size_t>(sensingDelay_) + 1, rbd::RobotState(plant.jointCount()));
  commands_.resize(static_cast<std::size_t>(commandDelay_) + 1, Vector::Zero(plant.jointCount()));
  effort_.setZero(plant.jointCount());
  resync();
}

void DelayedPlant::resync() {
  for (auto& s : states_) plant_.state(s);
  stateHead_ = 0;
  stateCount_ = states_.size();
  commandsWritten_ = 0;
}

void DelayedPlant::read(rbd::RobotState& out) {
  const std::size_t n = states_.size();
  const std::size_t back = std::min<std::size_t>(static_cast<std::size_t>(sensingDelay_), stateCount_ - 1);
  const rbd::RobotState& s = states_[(stateHead_ + n - back) % n];
  if (out.size() != s.size()) out.resize(s.size());
  out.timestamp = s.timestamp;
  out.position = s.position;
  out.velocity = s.velocity;
  out.effort = s.effort;
  auto perturb = [&](Vector& v, double sigma) {
    if (sigma <= 0.0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += sigma * normal_(rng_);
  };
  perturb(out.position, noise_.position);
  perturb(out.velocity, noise_.velocity);
  perturb(out.effort, noise_.effort);
}

void DelayedPlant::write(const control::Command& command) {
  requireSize(command.effort.size(), plant_.jointCount(), "command effort");
  commands_[commandsWritten_ % commands_.size()] = command.effort;
  ++commandsWritten_;
}

void DelayedPlant::advance(double dt) {
  if (commandsWritten_ > static_cast<std::size_t>(commandDelay_)) {
    effort_ = commands_[(commandsWritten_ - 1 - commandDelay_) % commands_.size()];
    plant_.step(effort_, dt);
  }
  stateHead_ = (stateHead_ + 1) % states_.size();
  plant_.state(states_[stateHead_]);
  stateCount_ = std::min(stateCount_ + 1, states_.size());
}

// ---- free run

FreerunInterface::FreerunInterface(Plant& plant, const InterfaceSpec& spec, double period)
    : plant_(plant), core_(plant, spec.latencyCycles, spec.noise, spec.seed), period_(period) {
  if (!(period > 0.0)) throw ValidationError("free-run period must be positive");
  cached_.resize(plant.jointCount());
  pending_.resize(plant.jointCount());
  core_.read(cached_);
}

FreerunInterface::~FreerunInterface() { stop(); }

void FreerunInterface::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] {
    using clock = std::chrono::steady_clock;
    const auto step = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period_));
    auto next = clock::now();
    while (running_.load()) {
      next += step;
      {
        std::lock_guard lock(mutex_);
        try {
          core_.advance(period_);
        } catch (const std::exception& e) {
          spdlog::error("free-run plant: {}", e.what());
        }
      }
      ++steps_;
      std::this_thread::sleep_until(next);
    }
  });
}

void FreerunInterface::stop() {
  running_.store(false);
  if (thread_.joinable()) thread_.join();
}

bool FreerunInterface::read(rbd::RobotState& state) {
  if (mutex_.try_lock()) {
    if (hasPending_) {
      core_.write(pending_);
      hasPending_ = false;
    }
    core_.read(cached_);
    mutex_.unlock();
  } else {
    ++contention_;
  }
  state.timestamp = cached_.timestamp;
  state.position = cached_.position;
  state.velocity = cached_.velocity;
  state.effort = cached_.effort;
  return true;
}

void FreerunInterface::write(const control::Command& command) {
  pending_.effort = command.effort;
  if (mutex_.try_lock()) {
    core_.write(pending_);
    hasPending_ = false;
    mutex_.unlock();
  } else {
    hasPending_ = true;
    ++contention_;
  }
}

// ---- udp

Vector packState(const rbd::RobotState& s) {
  const int n = s.size();
  Vector out(1 + 3 * n);
  out[0] = s.timestamp;
  out.segment(1, n) = s.position;
  out.segment(1 + n, n) = s.velocity;
  out.segment(1 + 2 * n, n) = s.effort;
  return out;
}

bool unpackState(const Vector& packed, rbd::RobotState& s) {
  const int n = s.size();
  if (packed.size() != 1 + 3 * n) return false;
  s.timestamp = packed[0];
  s.position = packed.segment(1, n);
  s.velocity = packed.segment(1 + n, n);
  s.effort = packed.segment(1 + 2 * n, n);
  return true;
}

Vector packCommand(const control::Command& c) {
  const int n = c.size();
  Vector out(3 * n);
  out << c.effort, c.position, c.velocity;
  return out;
}

bool unpackCommand(const Vector& packed, control::Command& c) {
  const int n = c.size();
  if (packed.size() != 3 * n) return false;
  c.effort = packed.segment(0, n);
  c.position = packed.segment(n, n);
  c.velocity = packed.segment(2 * n, n);
  return true;
}

UdpRemoteInterface::UdpRemoteInterface(int joints, int listenPort, std::string plantHost, int plantPort)
    : joints_(joints), host_(std::move(plantHost)), plantPort_(plantPort), socket_(listenPort) {
  latest_.resize(joints);
  cached_.resize(joints);
  message_.name = kCommandTopic;
  message_.value = Vector(Vector::Zero(3 * joints));
  buffer_.reserve(64 + 24 * joints);
  packed_.setZero(3 * joints);
  socket_.start([this](const std::uint8_t* data, std::size_t size, const std::string&, int) {
    auto m = param::wire::decode(data, size);
    if (!m || m->kind != param::wire::MessageKind::Publish || m->name != kStateTopic ||
        param::kindOf(m->value) != param::ParamKind::Vector)
      return;
    std::lock_guard lock(mutex_);
    if (unpackState(std::get<Vector>(m->value), latest_)) fresh_ = true;
  });
}

UdpRemoteInterface::~UdpRemoteInterface() { socket_.stop(); }

bool UdpRemoteInterface::read(rbd::RobotState& state) {
  if (mutex_.try_lock()) {
    if (fresh_) {
      cached_.timestamp = latest_.timestamp;
      cached_.position = latest_.position;
      cached_.velocity = latest_.velocity;
      cached_.effort = latest_.effort;
      fresh_ = false;
      have_ = true;
    }
    mutex_.unlock();
  }
  if (!have_) return false;
  if (state.size() != joints_) state.resize(joints_);
  state.timestamp = cached_.timestamp;
  state.position = cached_.position;
  state.velocity = cached_.velocity;
  state.effort = cached_.effort;
  return true;
}

void UdpRemoteInterface::write(const control::Command& command) {
  Vector& v = std::get<Vector>(message_.value);
  v.segment(0, joints_) = command.effort;
  v.segment(joints_, joints_) = command.position;
  v.segment(2 * joints_, joints_) = command.velocity;
  param::wire::encode(message_, buffer_);
  try {
    socket_.sendTo(host_, plantPort_, buffer_);
  } catch (const std::exception&) {
    // dropped datagram; the plant holds its last command
  }
}

namespace {
double wallSeconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}
}  // namespace

RemotePlantServer::RemotePlantServer(Plant& plant, double period, int listenPort, std::string controllerHost,
                                     int controllerPort, double timeout)
    : plant_(plant),
      period_(period),
      timeout_(timeout),
      host_(std::move(controllerHost)),
      controllerPort_(controllerPort),
      socket_(listenPort) {
  effort_.setZero(plant.jointCount());
}

RemotePlantServer::~RemotePlantServer() { stop(); }

void RemotePlantServer::start() {
  if (running_.exchange(true)) return;
  lastCommand_ = wallSeconds();
  socket_.start([this](const std::uint8_t* data, std::size_t size, const std::string&, int) {
    auto m = param::wire::decode(data, size);
    if (!m || m->kind != param::wire::MessageKind::Publish || m->name != kCommandTopic ||
        param::kindOf(m->value) != param::ParamKind::Vector)
      return;
    control::Command c(plant_.jointCount());
    if (!unpackCommand(std::get<Vector>(m->value), c) || !c.effort.allFinite()) return;
    std::lock_guard lock(mutex_);
    effort_ = c.effort;
    lastCommand_ = wallSeconds();
    timedOut_ = false;
    ++received_;
  });
  thread_ = std::thread([this] {
    using clock = std::chrono::steady_clock;
    const auto step = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period_));
    auto next = clock::now();
    rbd::RobotState state(plant_.jointCount());
    param::wire::Message msg;
    msg.name = kStateTopic;
    while (running_.load()) {
      next += step;
      Vector effort;
      {
        std::lock_guard lock(mutex_);
        if (!timedOut_ && wallSeconds() - lastCommand_ > timeout_) {
          timedOut_ = true;
          ++timeouts_;
          spdlog::warn("remote plant: no command for {:.3f} s, holding the last one", timeout_);
        }
        effort = effort_;
      }
      plant_.step(effort, period_);
      plant_.state(state);
      msg.value = packState(state);
      try {
        socket_.sendTo(host_, controllerPort_, param::wire::encode(msg));
      } catch (const std::exception& e) {
        spdlog::warn("remote plant: {}", e.what());
      }
      std::this_thread::sleep_until(next);
    }
  });
}

void RemotePlantServer::stop() {
  running_.store(false);
  if (thread_.joinable()) thread_.join();
  socket_.stop();
}

}  // namespace wbc::sim
