#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wbc/param/parameter.hpp"
#include "wbc/param/transport.hpp"

namespace wbc::param {

enum class Direction { Input, Output };

std::string_view toString(Direction direction);
std::optional<Direction> directionFromString(std::string_view text);

struct BindingConfig {
  std::string parameter;
  Direction direction = Direction::Output;
  std::string transportType;
  std::string topic;
  Properties properties;

  bool operator==(const BindingConfig&) const = default;
};

/// Bounded queue between the servo loop and a publisher thread.
///
/// The producer fills a preallocated batch and hands it over with a
/// try-lock; if the publisher is still busy the batch keeps growing. When
/// the batch is full the oldest item is overwritten and counted as dropped.
/// Producer-side calls never block and never allocate once routes are set up
/// and strings fit the reserved capacity.
class PublishQueue {
 public:
  explicit PublishQueue(std::size_t capacity = 4096);
  ~PublishQueue();
  PublishQueue(const PublishQueue&) = delete;
  PublishQueue& operator=(const PublishQueue&) = delete;

  /// Setup only. maxVectorSize sizes the slot storage for vector values.
  int addRoute(std::unique_ptr<Endpoint> endpoint, Eigen::Index maxVectorSize = 0);
  /// Publishes immediately from the calling thread (setup, latched values).
  void publishNow(int route, const ParamValue& value);

  void push(int route, const Parameter& parameter);
  void push(int route, double value);
  void push(int route, const Eigen::Ref<const Vector>& value);
  void push(int route, bool value);
  void push(int route, std::string_view value);

  /// Offers the current batch to the publisher. Non-blocking. Without a
  /// running publisher thread the batch is delivered inline.
  void flush();
  /// Blocks until everything pushed so far was delivered.
  void drain();

  void start();
  void stop();
  bool running() const { return thread_.joinable(); }

  std::uint64_t dropped() const { return dropped_.load(std::memory_order_relaxed); }
  std::uint64_t delivered() const { return delivered_.load(std::memory_order_relaxed); }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Slot {
    int route = -1;
    ParamKind kind = ParamKind::Scalar;
    double scalar = 0.0;
    bool boolean = false;
    Vector vector;
    Eigen::Index length = 0;
    std::string text;
  };
  struct Batch {
    std::vector<Slot> slots;
    std::size_t head = 0, count = 0;
  };

  Slot& claim();
  void deliver(Batch& batch);
  void run();

  std::size_t capacity_;
  Batch batches_[2];
  Batch* producer_;
  Batch* consumer_;
  std::mutex mutex_;  // guards consumer_ handoff and routes_
  std::condition_variable wake_, idle_;
  bool busy_ = false;
  bool stop_ = false;
  std::deque<std::unique_ptr<Endpoint>> routes_;
  Eigen::Index maxVector_ = 0;
  std::thread thread_;
  std::atomic<std::uint64_t> dropped_{0}, delivered_{0};
};

/// Attaches parameters to transports.
class BindingManager {
 public:
  BindingManager(ParameterRegistry& registry, std::shared_ptr<TransportRegistry> transports,
                 std::size_t queueCapacity = 4096);
  ~BindingManager();
  BindingManager(const BindingManager&) = delete;
  BindingManager& operator=(const BindingManager&) = delete;

  /// Throws UnknownNameError (parameter, transport) or Error (direction,
  /// properties).
  void bind(const BindingConfig& config);
  const std::vector<BindingConfig>& bindings() const { return configs_; }

  /// Output route for a topic that is not a parameter (diagnostics, events).
  int openTopic(const std::string& transportType, const std::string& topic, const Properties& properties = {},
                Eigen::Index maxVectorSize = 0);

  /// Servo side: applies values received since the last call. Skips (and
  /// retries next cycle) if a receiver holds the staging lock.
  void applyInputs();
  PublishQueue& queue() { return queue_; }
  TransportRegistry& transports() { return *transports_; }
  ParameterRegistry& registry() { return registry_; }

  std::uint64_t inputContention() const { return contention_; }
  std::uint64_t rejectedInputs() const { return rejected_.load(); }
  /// Accepted input values, counted on arrival (before applyInputs).
  std::uint64_t receivedInputs() const { return received_.load(); }

 private:
  struct OutputBinding;
  struct Staged {
    Parameter* parameter;
    ParamValue value;
    bool dirty = false;
  };

  ParameterRegistry& registry_;
  std::shared_ptr<TransportRegistry> transports_;
  PublishQueue queue_;
  std::vector<BindingConfig> configs_;
  std::vector<std::unique_ptr<OutputBinding>> outputs_;
  std::vector<std::unique_ptr<Subscription>> subscriptions_;
  std::mutex stagingMutex_;
  std::deque<Staged> staged_;
  std::uint64_t contention_ = 0;
  std::atomic<std::uint64_t> rejected_{0}, received_{0};
};

}  // namespace wbc::param
