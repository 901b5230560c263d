#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "wbc/param/parameter.hpp"
#include "wbc/param/wire.hpp"

namespace wbc::param {

using Properties = std::map<std::string, std::string>;
using Receiver = std::function<void(const std::string& topic, const ParamValue& value)>;

/// Output side of one binding.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void publish(const ParamValue& value) = 0;
};

/// Input side of one binding; unsubscribes on destruction.
class Subscription {
 public:
  virtual ~Subscription() = default;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string_view type() const = 0;
  virtual bool supportsInput() const { return true; }
  virtual bool supportsOutput() const { return true; }

  /// Properties not understood by the transport (besides the shared
  /// publish_rate / queue_size / latched keys) are rejected with Error.
  virtual std::unique_ptr<Endpoint> openOutput(const std::string& topic, const Properties& properties) = 0;
  /// Receiver runs in the transport's receive context.
  virtual std::unique_ptr<Subscription> openInput(const std::string& topic, const Properties& properties,
                                                  Receiver receiver) = 0;
};

/// In-process publish/subscribe with optional latching.
class TopicBus {
 public:
  /// Returns the number of subscribers reached.
  std::size_t publish(const std::string& topic, const ParamValue& value, bool latched = false);
  int subscribe(const std::string& topic, Receiver receiver);
  void unsubscribe(int id);
  std::optional<ParamValue> latched(const std::string& topic) const;

 private:
  struct Sub {
    int id;
    std::string topic;
    std::shared_ptr<Receiver> receiver;
  };
  mutable std::mutex mutex_;
  std::vector<Sub> subs_;
  std::unordered_map<std::string, ParamValue> latched_;
  int nextId_ = 1;
};

class IntraTransport : public Transport {
 public:
  explicit IntraTransport(std::shared_ptr<TopicBus> bus) : bus_(std::move(bus)) {}
  std::string_view type() const override { return "intra"; }
  std::unique_ptr<Endpoint> openOutput(const std::string& topic, const Properties& properties) override;
  std::unique_ptr<Subscription> openInput(const std::string& topic, const Properties& properties,
                                          Receiver receiver) override;
  const std::shared_ptr<TopicBus>& bus() const { return bus_; }

 private:
  std::shared_ptr<TopicBus> bus_;
};

/// Blocking IPv4 datagram socket with a receive thread.
class UdpSocket {
 public:
  using Handler = std::function<void(const std::uint8_t* data, std::size_t size, const std::string& host, int port)>;

  /// Binds to 0.0.0.0:port (0 picks a free port). Throws Error.
  explicit UdpSocket(int port = 0, std::string bindHost = "127.0.0.1");
  ~UdpSocket();
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  int port() const { return port_; }
  void sendTo(const std::string& host, int port, const std::vector<std::uint8_t>& bytes);
  /// Starts the receive thread; the handler sees every datagram.
  void start(Handler handler);
  void stop();
  /// Single blocking receive with timeout, for clients. Empty on timeout.
  std::optional<std::vector<std::uint8_t>> receive(double timeoutSeconds);

 private:
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

struct UdpOptions {
  int listenPort = 0;
  std::string bindHost = "127.0.0.1";
  std::string remoteHost = "127.0.0.1";
  int remotePort = 0;
};

/// Wire-format transport. Output properties remote_host / remote_port override
/// the default destination.
class UdpTransport : public Transport {
 public:
  using ServiceHandler = std::function<std::string(const std::string& service, const ParamValue& args)>;

  explicit UdpTransport(UdpOptions options);
  ~UdpTransport() override;
  std::string_view type() const override { return "udp"; }
  std::unique_ptr<Endpoint> openOutput(const std::string& topic, const Properties& properties) override;
  std::unique_ptr<Subscription> openInput(const std::string& topic, const Properties& properties,
                                          Receiver receiver) override;

  int port() const { return socket_.port(); }
  void setServiceHandler(ServiceHandler handler);
  void send(const std::string& host, int port, const wire::Message& message);
  std::uint64_t malformed() const { return malformed_.load(); }

 private:
  void dispatch(const std::uint8_t* data, std::size_t size, const std::string& host, int port);

  UdpOptions options_;
  UdpSocket socket_;
  TopicBus local_;  // receive-side fan-out by topic
  std::mutex serviceMutex_;
  ServiceHandler service_;
  std::mutex sendMutex_;
  std::vector<std::uint8_t> sendBuffer_;
  std::atomic<std::uint64_t> malformed_{0};
  std::set<std::string> unrouted_;  // receive thread only
};

/// Appends one CSV row per publish: ISO-8601 time, topic, values.
class FileTransport : public Transport {
 public:
  explicit FileTransport(std::string directory) : directory_(std::move(directory)) {}
  std::string_view type() const override { return "file"; }
  bool supportsInput() const override { return false; }
  std::unique_ptr<Endpoint> openOutput(const std::string& topic, const Properties& properties) override;
  std::unique_ptr<Subscription> openInput(const std::string&, const Properties&, Receiver) override;
  /// Path written for a topic when no "path" property is given.
  std::string defaultPath(const std::string& topic) const;

 private:
  std::string directory_;
};

/// Creates transports by type name; each type is instantiated once and shared.
class TransportRegistry {
 public:
  using Factory = std::function<std::shared_ptr<Transport>()>;

  void registerFactory(const std::string& type, Factory factory);
  bool has(const std::string& type) const;
  /// Throws UnknownNameError for unregistered types.
  std::shared_ptr<Transport> get(const std::string& type);
  std::vector<std::string> types() const;

  /// intra (on the given bus), udp and file.
  static std::shared_ptr<TransportRegistry> standard(std::shared_ptr<TopicBus> bus, UdpOptions udp,
                                                     std::string logDirectory);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Factory> factories_;
  std::map<std::string, std::shared_ptr<Transport>> instances_;
};

/// Sends one request over UDP and waits for the response document.
std::optional<std::string> udpRequest(const std::string& host, int port, const std::string& service,
                                      const ParamValue& args, double timeoutSeconds);
/// Publishes one value over UDP.
void udpSend(const std::string& host, int port, const std::string& topic, const ParamValue& value);

/// Formats a value as comma-joined text (CSV payload and CLI output).
std::string formatValue(const ParamValue& value);

}  // namespace wbc::param
