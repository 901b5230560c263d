#include "wbc/param/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace wbc::param {

namespace {

const char* kSharedKeys[] = {"publish_rate", "queue_size", "latched"};

void rejectUnknown(std::string_view transport, const Properties& props, std::initializer_list<const char*> own) {
  for (const auto& [key, value] : props) {
    bool known = std::any_of(std::begin(kSharedKeys), std::end(kSharedKeys), [&](const char* k) { return key == k; }) ||
                 std::any_of(own.begin(), own.end(), [&](const char* k) { return key == k; });
    if (!known) throw Error("transport '" + std::string(transport) + "' does not understand property '" + key + "'");
  }
}

bool truthy(const Properties& props, const char* key) {
  auto it = props.find(key);
  return it != props.end() && (it->second == "true" || it->second == "1" || it->second == "yes");
}

sockaddr_in address(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) throw Error("invalid IPv4 address '" + host + "'");
  return addr;
}

std::string isoTimestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string formatValue(const ParamValue& value) {
  std::ostringstream os;
  os.precision(17);
  switch (kindOf(value)) {
    case ParamKind::Scalar: os << std::get<double>(value); break;
    case ParamKind::Vector: {
      const Vector& v = std::get<Vector>(value);
      for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      break;
    }
    case ParamKind::Bool: os << (std::get<bool>(value) ? 1 : 0); break;
    case ParamKind::String: os << std::get<std::string>(value); break;
  }
  return os.str();
}

// ---- bus

std::size_t TopicBus::publish(const std::string& topic, const ParamValue& value, bool latched) {
  std::vector<std::shared_ptr<Receiver>> targets;
  {
    std::lock_guard lock(mutex_);
    if (latched) latched_[topic] = value;
    for (const auto& s : subs_)
      if (s.topic == topic) targets.push_back(s.receiver);
  }
  for (const auto& r : targets) (*r)(topic, value);
  return targets.size();
}

int TopicBus::subscribe(const std::string& topic, Receiver receiver) {
  auto shared = std::make_shared<Receiver>(std::move(receiver));
  std::optional<ParamValue> last;
  int id;
  {
    std::lock_guard lock(mutex_);
    id = nextId_++;
    subs_.push_back({id, topic, shared});
    auto it = latched_.find(topic);
    if (it != latched_.end()) last = it->second;
  }
  if (last) (*shared)(topic, *last);
  return id;
}

void TopicBus::unsubscribe(int id) {
  std::lock_guard lock(mutex_);
  subs_.erase(std::remove_if(subs_.begin(), subs_.end(), [&](const Sub& s) { return s.id == id; }), subs_.end());
}

std::optional<ParamValue> TopicBus::latched(const std::string& topic) const {
  std::lock_guard lock(mutex_);
  auto it = latched_.find(topic);
  if (it == latched_.end()) return std::nullopt;
  return it->second;
}

namespace {

class BusEndpoint : public Endpoint {
 public:
  BusEndpoint(std::shared_ptr<TopicBus> bus, std::string topic, bool latched)
      : bus_(std::move(bus)), topic_(std::move(topic)), latched_(latched) {}
  void publish(const ParamValue& value) override { bus_->publish(topic_, value, latched_); }

 private:
  std::shared_ptr<TopicBus> bus_;
  std::string topic_;
  bool latched_;
};

class BusSubscription : public Subscription {
 public:
  BusSubscription(TopicBus* bus, int id) : bus_(bus), id_(id) {}
  ~BusSubscription() override { bus_->unsubscribe(id_); }

 private:
  TopicBus* bus_;
  int id_;
};

}  // namespace

std::unique_ptr<Endpoint> IntraTransport::openOutput(const std::string& topic, const Properties& properties) {
  rejectUnknown(type(), properties, {});
  return std::make_unique<BusEndpoint>(bus_, topic, truthy(properties, "latched"));
}

std::unique_ptr<Subscription> IntraTransport::openInput(const std::string& topic, const Properties& properties,
                                                        Receiver receiver) {
  rejectUnknown(type(), properties, {});
  return std::make_unique<BusSubscription>(bus_.get(), bus_->subscribe(topic, std::move(receiver)));
}

// ---- udp

UdpSocket::UdpSocket(int port, std::string bindHost) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = address(bindHost == "0.0.0.0" ? "0.0.0.0" : bindHost, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    throw Error("cannot bind UDP port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

UdpSocket::~UdpSocket() {
  stop();
  if (fd_ >= 0) ::close(fd_);
}

void UdpSocket::sendTo(const std::string& host, int port, const std::vector<std::uint8_t>& bytes) {
  const sockaddr_in addr = address(host, port);
  if (::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0)
    throw Error(std::string("sendto: ") + std::strerror(errno));
}

void UdpSocket::start(Handler handler) {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this, handler = std::move(handler)] {
    std::vector<std::uint8_t> buf(wire::kMaxDatagram);
    while (running_.load()) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      sockaddr_in from{};
      socklen_t len = sizeof from;
      const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
      if (n < 0) continue;
      char host[INET_ADDRSTRLEN] = {};
      ::inet_ntop(AF_INET, &from.sin_addr, host, sizeof host);
      try {
        handler(buf.data(), static_cast<std::size_t>(n), host, ntohs(from.sin_port));
      } catch (const std::exception& e) {
        spdlog::warn("udp handler: {}", e.what());
      }
    }
  });
}

void UdpSocket::stop() {
  running_.store(false);
  if (thread_.joinable()) thread_.join();
}

std::optional<std::vector<std::uint8_t>> UdpSocket::receive(double timeoutSeconds) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeoutSeconds * 1000.0)) <= 0) return std::nullopt;
  std::vector<std::uint8_t> buf(wire::kMaxDatagram);
  const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

namespace {

class UdpEndpoint : public Endpoint {
 public:
  UdpEndpoint(UdpTransport* transport, std::string topic, std::string host, int port)
      : transport_(transport), host_(std::move(host)), port_(port) {
    message_.name = std::move(topic);
  }
  void publish(const ParamValue& value) override {
    message_.value = value;
    transport_->send(host_, port_, message_);
  }

 private:
  UdpTransport* transport_;
  std::string host_;
  int port_;
  wire::Message message_;
};

}  // namespace

UdpTransport::UdpTransport(UdpOptions options) : options_(std::move(options)), socket_(options_.listenPort, options_.bindHost) {
  socket_.start([this](const std::uint8_t* d, std::size_t n, const std::string& host, int port) {
    dispatch(d, n, host, port);
  });
}

UdpTransport::~UdpTransport() { socket_.stop(); }

std::unique_ptr<Endpoint> UdpTransport::openOutput(const std::string& topic, const Properties& properties) {
  rejectUnknown(type(), properties, {"remote_host", "remote_port"});
  std::string host = options_.remoteHost;
  int port = options_.remotePort;
  if (auto it = properties.find("remote_host"); it != properties.end()) host = it->second;
  if (auto it = properties.find("remote_port"); it != properties.end()) port = std::stoi(it->second);
  if (port <= 0) throw Error("udp output binding on '" + topic + "' has no destination port");
  address(host, port);
  return std::make_unique<UdpEndpoint>(this, topic, host, port);
}

std::unique_ptr<Subscription> UdpTransport::openInput(const std::string& topic, const Properties& properties,
                                                      Receiver receiver) {
  rejectUnknown(type(), properties, {});
  return std::make_unique<BusSubscription>(&local_, local_.subscribe(topic, std::move(receiver)));
}

void UdpTransport::setServiceHandler(ServiceHandler handler) {
  std::lock_guard lock(serviceMutex_);
  service_ = std::move(handler);
}

void UdpTransport::send(const std::string& host, int port, const wire::Message& message) {
  std::lock_guard lock(sendMutex_);
  wire::encode(message, sendBuffer_);
  socket_.sendTo(host, port, sendBuffer_);
}

void UdpTransport::dispatch(const std::uint8_t* data, std::size_t size, const std::string& host, int port) {
  std::string error;
  auto message = wire::decode(data, size, &error);
  if (!message) {
    ++malformed_;
    spdlog::warn("udp: dropped malformed datagram from {}:{} ({})", host, port, error);
    return;
  }
  switch (message->kind) {
    case wire::MessageKind::Publish:
      if (local_.publish(message->name, message->value) == 0 && unrouted_.insert(message->name).second)
        spdlog::warn("udp: nothing is bound to topic '{}', value dropped", message->name);
      break;
    case wire::MessageKind::ServiceRequest: {
      ServiceHandler handler;
      {
        std::lock_guard lock(serviceMutex_);
        handler = service_;
      }
      wire::Message reply;
      reply.kind = wire::MessageKind::ServiceResponse;
      reply.requestId = message->requestId;
      reply.name = message->name;
      if (handler) {
        reply.value = handler(message->name, message->value);
      } else {
        reply.value = std::string(R"({"error":"no services on this endpoint"})");
      }
      send(host, port, reply);
      break;
    }
    case wire::MessageKind::ServiceResponse: break;
  }
}

// ---- file

namespace {

class FileEndpoint : public Endpoint {
 public:
  FileEndpoint(std::string path, std::string topic) : topic_(std::move(topic)), out_(path, std::ios::app) {
    if (!out_) throw Error("cannot open log file '" + path + "'");
  }
  void publish(const ParamValue& value) override {
    std::string row = isoTimestamp();
    row += ',';
    row += csvField(topic_);
    row += ',';
    row += kindOf(value) == ParamKind::String ? csvField(std::get<std::string>(value)) : formatValue(value);
    row += '\n';
    std::lock_guard lock(mutex_);
    out_.write(row.data(), static_cast<std::streamsize>(row.size()));
    out_.flush();
  }

 private:
  std::string topic_;
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace

std::string FileTransport::defaultPath(const std::string& topic) const {
  std::string name = topic;
  std::replace(name.begin(), name.end(), '/', '_');
  return (std::filesystem::path(directory_) / (name + ".csv")).string();
}

std::unique_ptr<Endpoint> FileTransport::openOutput(const std::string& topic, const Properties& properties) {
  rejectUnknown(type(), properties, {"path"});
  auto it = properties.find("path");
  const std::string path = it != properties.end() ? it->second : defaultPath(topic);
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  return std::make_unique<FileEndpoint>(path, topic);
}

std::unique_ptr<Subscription> FileTransport::openInput(const std::string&, const Properties&, Receiver) {
  throw Error("the file transport is output-only");
}

// ---- registry

void TransportRegistry::registerFactory(const std::string& type, Factory factory) {
  std::lock_guard lock(mutex_);
  factories_[type] = std::move(factory);
  instances_.erase(type);
}

bool TransportRegistry::has(const std::string& type) const {
  std::lock_guard lock(mutex_);
  return factories_.count(type) > 0;
}

std::shared_ptr<Transport> TransportRegistry::get(const std::string& type) {
  std::lock_guard lock(mutex_);
  if (auto it = instances_.find(type); it != instances_.end()) return it->second;
  auto f = factories_.find(type);
  if (f == factories_.end()) throw UnknownNameError("transport type", type);
  auto instance = f->second();
  instances_[type] = instance;
  return instance;
}

std::vector<std::string> TransportRegistry::types() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

std::shared_ptr<TransportRegistry> TransportRegistry::standard(std::shared_ptr<TopicBus> bus, UdpOptions udp,
                                                               std::string logDirectory) {
  auto registry = std::make_shared<TransportRegistry>();
  registry->registerFactory("intra", [bus] { return std::make_shared<IntraTransport>(bus); });
  registry->registerFactory("udp", [udp] { return std::make_shared<UdpTransport>(udp); });
  registry->registerFactory("file", [dir = std::move(logDirectory)] { return std::make_shared<FileTransport>(dir); });
  return registry;
}

// ---- clients

std::optional<std::string> udpRequest(const std::string& host, int port, const std::string& service,
                                      const ParamValue& args, double timeoutSeconds) {
  UdpSocket socket(0);
  wire::Message request;
  request.kind = wire::MessageKind::ServiceRequest;
  request.requestId = static_cast<std::uint32_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  request.name = service;
  request.value = args;
  socket.sendTo(host, port, wire::encode(request));
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeoutSeconds);
  while (true) {
    const double left = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0.0) return std::nullopt;
    auto bytes = socket.receive(left);
    if (!bytes) return std::nullopt;
    auto reply = wire::decode(*bytes);
    if (reply && reply->kind == wire::MessageKind::ServiceResponse && reply->requestId == request.requestId &&
        kindOf(reply->value) == ParamKind::String)
      return std::get<std::string>(reply->value);
  }
}

void udpSend(const std::string& host, int port, const std::string& topic, const ParamValue& value) {
  UdpSocket socket(0);
  wire::Message m;
  m.name = topic;
  m.value = value;
  socket.sendTo(host, port, wire::encode(m));
}

}  // namespace wbc::param
