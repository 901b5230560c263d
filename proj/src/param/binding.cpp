#include "wbc/param/binding.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace wbc::param {

std::string_view toString(Direction d) { return d == Direction::Input ? "input" : "output"; }

std::optional<Direction> directionFromString(std::string_view text) {
  if (text == "input") return Direction::Input;
  if (text == "output") return Direction::Output;
  return std::nullopt;
}

// ---- queue

PublishQueue::PublishQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {
  for (auto& b : batches_) {
    b.slots.resize(capacity_);
    for (auto& s : b.slots) s.text.reserve(256);
  }
  producer_ = &batches_[0];
  consumer_ = &batches_[1];
}

PublishQueue::~PublishQueue() { stop(); }

int PublishQueue::addRoute(std::unique_ptr<Endpoint> endpoint, Eigen::Index maxVectorSize) {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [&] { return !busy_ && consumer_->count == 0; });
  if (maxVectorSize > maxVector_) {
    maxVector_ = maxVectorSize;
    for (auto& b : batches_)
      for (auto& s : b.slots) s.vector.resize(maxVector_);
  }
  routes_.push_back(std::move(endpoint));
  return static_cast<int>(routes_.size()) - 1;
}

void PublishQueue::publishNow(int route, const ParamValue& value) {
  std::lock_guard lock(mutex_);
  routes_.at(route)->publish(value);
  ++delivered_;
}

PublishQueue::Slot& PublishQueue::claim() {
  Batch& b = *producer_;
  if (b.count == capacity_) {
    b.head = (b.head + 1) % capacity_;
    --b.count;
    dropped_.fetch_add(1, std::memory_order_relaxed);
  }
  Slot& s = b.slots[(b.head + b.count) % capacity_];
  ++b.count;
  return s;
}

void PublishQueue::push(int route, const Parameter& p) {
  switch (p.kind()) {
    case ParamKind::Scalar: push(route, p.scalar()); break;
    case ParamKind::Vector: push(route, Eigen::Ref<const Vector>(p.vector())); break;
    case ParamKind::Bool: push(route, p.boolean()); break;
    case ParamKind::String: push(route, std::string_view(p.string())); break;
  }
}

void PublishQueue::push(int route, double value) {
  Slot& s = claim();
  s.route = route;
  s.kind = ParamKind::Scalar;
  s.scalar = value;
}

void PublishQueue::push(int route, const Eigen::Ref<const Vector>& value) {
  Slot& s = claim();
  s.route = route;
  s.kind = ParamKind::Vector;
  if (s.vector.size() < value.size()) s.vector.resize(value.size());  // only for undersized routes
  s.vector.head(value.size()) = value;
  s.length = value.size();
}

void PublishQueue::push(int route, bool value) {
  Slot& s = claim();
  s.route = route;
  s.kind = ParamKind::Bool;
  s.boolean = value;
}

void PublishQueue::push(int route, std::string_view value) {
  Slot& s = claim();
  s.route = route;
  s.kind = ParamKind::String;
  s.text.assign(value.data(), value.size());
}

void PublishQueue::flush() {
  if (producer_->count == 0) return;
  if (!thread_.joinable()) {
    std::lock_guard lock(mutex_);
    deliver(*producer_);
    return;
  }
  if (!mutex_.try_lock()) return;
  if (!busy_ && consumer_->count == 0) {
    std::swap(producer_, consumer_);
    mutex_.unlock();
    wake_.notify_one();
    return;
  }
  mutex_.unlock();
}

void PublishQueue::deliver(Batch& batch) {
  for (std::size_t i = 0; i < batch.count; ++i) {
    const Slot& s = batch.slots[(batch.head + i) % capacity_];
    ParamValue value;
    switch (s.kind) {
      case ParamKind::Scalar: value = s.scalar; break;
      case ParamKind::Vector: value = Vector(s.vector.head(s.length)); break;
      case ParamKind::Bool: value = s.boolean; break;
      case ParamKind::String: value = s.text; break;
    }
    try {
      routes_[s.route]->publish(value);
    } catch (const std::exception& e) {
      spdlog::warn("publish failed: {}", e.what());
    }
    delivered_.fetch_add(1, std::memory_order_relaxed);
  }
  batch.head = 0;
  batch.count = 0;
}

void PublishQueue::run() {
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [&] { return stop_ || consumer_->count > 0; });
    if (consumer_->count == 0 && stop_) break;
    busy_ = true;
    // routes_ is only appended while idle, so delivering without the lock is safe
    lock.unlock();
    deliver(*consumer_);
    lock.lock();
    busy_ = false;
    idle_.notify_all();
  }
}

void PublishQueue::drain() {
  if (!thread_.joinable()) {
    std::lock_guard lock(mutex_);
    deliver(*producer_);
    return;
  }
  while (true) {
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [&] { return !busy_ && consumer_->count == 0; });
    if (producer_->count == 0) return;
    std::swap(producer_, consumer_);
    lock.unlock();
    wake_.notify_one();
  }
}

void PublishQueue::start() {
  if (thread_.joinable()) return;
  stop_ = false;
  thread_ = std::thread([this] { run(); });
}

void PublishQueue::stop() {
  if (!thread_.joinable()) return;
  drain();
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  thread_.join();
}

// ---- bindings

struct BindingManager::OutputBinding : ParameterListener {
  OutputBinding(BindingManager& m, Parameter& p, int r, double rate) : manager(m), parameter(p), route(r) {
    minInterval = rate > 0.0 ? 1.0 / rate : 0.0;
  }
  ~OutputBinding() override { parameter.removeListener(this); }

  void parameterChanged(const Parameter& p) override {
    const double now = manager.registry_.now();
    if (minInterval > 0.0 && now - last < minInterval - 1e-9) return;
    last = now;
    manager.queue_.push(route, p);
  }

  BindingManager& manager;
  Parameter& parameter;
  int route;
  double minInterval;
  double last = -std::numeric_limits<double>::infinity();
};

BindingManager::BindingManager(ParameterRegistry& registry, std::shared_ptr<TransportRegistry> transports,
                               std::size_t queueCapacity)
    : registry_(registry), transports_(std::move(transports)), queue_(queueCapacity) {}

BindingManager::~BindingManager() {
  subscriptions_.clear();
  queue_.stop();
  outputs_.clear();
}

namespace {

double parseRate(const Properties& props) {
  auto it = props.find("publish_rate");
  if (it == props.end()) return 0.0;
  double rate;
  try {
    std::size_t used;
    rate = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error("publish_rate '" + it->second + "' is not a number");
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error("publish_rate must be positive");
  return rate;
}

bool accepts(const Parameter& p, const ParamValue& v) {
  if (kindOf(v) != p.kind()) return false;
  return p.kind() != ParamKind::Vector || std::get<Vector>(v).size() == p.vector().size();
}

}  // namespace

void BindingManager::bind(const BindingConfig& config) {
  Parameter* p = registry_.lookup(config.parameter);
  if (!p) throw UnknownNameError("parameter", config.parameter);
  auto transport = transports_->get(config.transportType);
  if (config.topic.empty()) throw Error("binding of '" + config.parameter + "' has an empty topic");
  if (auto it = config.properties.find("queue_size"); it != config.properties.end()) {
    try {
      if (std::stol(it->second) <= 0) throw Error("");
    } catch (const std::exception&) {
      throw Error("queue_size must be a positive integer");
    }
  }
  const double rate = parseRate(config.properties);

  if (config.direction == Direction::Output) {
    if (!transport->supportsOutput())
      throw Error("transport '" + config.transportType + "' does not support output bindings");
    const Eigen::Index size = p->kind() == ParamKind::Vector ? p->vector().size() : 0;
    const int route = queue_.addRoute(transport->openOutput(config.topic, config.properties), size);
    auto binding = std::make_unique<OutputBinding>(*this, *p, route, rate);
    p->addListener(binding.get());
    if (auto it = config.properties.find("latched");
        it != config.properties.end() && (it->second == "true" || it->second == "1"))
      queue_.publishNow(route, p->value());
    outputs_.push_back(std::move(binding));
  } else {
    if (!transport->supportsInput())
      throw Error("transport '" + config.transportType + "' does not support input bindings");
    std::size_t index;
    {
      std::lock_guard lock(stagingMutex_);
      staged_.push_back({p, p->value(), false});
      index = staged_.size() - 1;
    }
    subscriptions_.push_back(transport->openInput(
        config.topic, config.properties, [this, index](const std::string& topic, const ParamValue& value) {
          std::lock_guard lock(stagingMutex_);
          Staged& s = staged_[index];
          if (!accepts(*s.parameter, value)) {
            ++rejected_;
            spdlog::warn("input on '{}' does not match parameter '{}'", topic, s.parameter->name());
            return;
          }
          s.value = value;
          s.dirty = true;
          ++received_;
        }));
  }
  configs_.push_back(config);
}

int BindingManager::openTopic(const std::string& transportType, const std::string& topic,
                              const Properties& properties, Eigen::Index maxVectorSize) {
  auto transport = transports_->get(transportType);
  if (!transport->supportsOutput()) throw Error("transport '" + transportType + "' is input-only");
  return queue_.addRoute(transport->openOutput(topic, properties), maxVectorSize);
}

void BindingManager::applyInputs() {
  if (!stagingMutex_.try_lock()) {
    ++contention_;
    return;
  }
  std::lock_guard lock(stagingMutex_, std::adopt_lock);
  for (auto& s : staged_) {
    if (!s.dirty) continue;
    s.dirty = false;
    s.parameter->set(s.value);
  }
}

}  // namespace wbc::param
