#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbc/param/parameter.hpp"

namespace wbc::param::wire {

/// Little-endian datagram layout:
///   "CIT1" | u8 kind | [u32 requestId, service kinds only] | u16 nameLength | name |
///   u8 valueKind | payload
/// Payloads: f64; u32 count + f64[count]; u8 bool; u32 length + UTF-8 bytes.
enum class MessageKind : std::uint8_t { Publish = 0, ServiceRequest = 1, ServiceResponse = 2 };

inline constexpr char kMagic[4] = {'C', 'I', 'T', '1'};
inline constexpr std::size_t kMaxDatagram = 65507;

struct Message {
  MessageKind kind = MessageKind::Publish;
  std::uint32_t requestId = 0;
  std::string name;  // topic or service
  ParamValue value = 0.0;
};

/// Appends the encoding to out (cleared first). Throws Error when the result
/// would not fit in one datagram.
void encode(const Message& message, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode(const Message& message);

/// Empty on malformed input; error receives the reason.
std::optional<Message> decode(const std::uint8_t* data, std::size_t size, std::string* error = nullptr);
inline std::optional<Message> decode(const std::vector<std::uint8_t>& bytes, std::string* error = nullptr) {
  return decode(bytes.data(), bytes.size(), error);
}

}  // namespace wbc::param::wire
