#include "wbc/param/wire.hpp"

#include <bit>
#include <cstring>

namespace wbc::param::wire {

namespace {

static_assert(std::endian::native == std::endian::little, "wire codec assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

struct Reader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  template <typename T>
  bool get(T& v) {
    if (size - pos < sizeof(T)) return false;
    std::memcpy(&v, data + pos, sizeof(T));
    pos += sizeof(T);
    return true;
  }
  bool bytes(std::string& s, std::size_t n) {
    if (size - pos < n) return false;
    s.assign(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return true;
  }
};

bool isService(MessageKind k) { return k == MessageKind::ServiceRequest || k == MessageKind::ServiceResponse; }

}  // namespace

void encode(const Message& m, std::vector<std::uint8_t>& out) {
  out.clear();
  if (m.name.size() > 0xFFFF) throw Error("wire: name too long");
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(m.kind));
  if (isService(m.kind)) put<std::uint32_t>(out, m.requestId);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(m.name.size()));
  out.insert(out.end(), m.name.begin(), m.name.end());
  put<std::uint8_t>(out, static_cast<std::uint8_t>(m.value.index()));
  switch (kindOf(m.value)) {
    case ParamKind::Scalar: put<double>(out, std::get<double>(m.value)); break;
    case ParamKind::Vector: {
      const Vector& v = std::get<Vector>(m.value);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) put<double>(out, v[i]);
      break;
    }
    case ParamKind::Bool: put<std::uint8_t>(out, std::get<bool>(m.value) ? 1 : 0); break;
    case ParamKind::String: {
      const std::string& s = std::get<std::string>(m.value);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
      out.insert(out.end(), s.begin(), s.end());
      break;
    }
  }
  if (out.size() > kMaxDatagram) throw Error("wire: message exceeds one datagram");
}

std::vector<std::uint8_t> encode(const Message& m) {
  std::vector<std::uint8_t> out;
  encode(m, out);
  return out;
}

std::optional<Message> decode(const std::uint8_t* data, std::size_t size, std::string* error) {
  auto fail = [&](const char* why) -> std::optional<Message> {
    if (error) *error = why;
    return std::nullopt;
  };
  Reader r{data, size};
  char magic[4];
  for (char& c : magic)
    if (!r.get(c)) return fail("truncated header");
  if (std::memcmp(magic, kMagic, 4) != 0) return fail("bad magic");
  std::uint8_t kind;
  if (!r.get(kind)) return fail("truncated header");
  if (kind > 2) return fail("unknown message kind");
  Message m;
  m.kind = static_cast<MessageKind>(kind);
  if (isService(m.kind) && !r.get(m.requestId)) return fail("truncated request id");
  std::uint16_t nameLength;
  if (!r.get(nameLength) || !r.bytes(m.name, nameLength)) return fail("truncated name");
  std::uint8_t valueKind;
  if (!r.get(valueKind)) return fail("truncated value kind");
  switch (valueKind) {
    case 0: {
      double v;
      if (!r.get(v)) return fail("truncated scalar");
      m.value = v;
      break;
    }
    case 1: {
      std::uint32_t count;
      if (!r.get(count)) return fail("truncated vector length");
      if ((size - r.pos) / sizeof(double) < count) return fail("truncated vector");
      Vector v(count);
      for (std::uint32_t i = 0; i < count; ++i) r.get(v[i]);
      m.value = std::move(v);
      break;
    }
    case 2: {
      std::uint8_t b;
      if (!r.get(b)) return fail("truncated bool");
      m.value = b != 0;
      break;
    }
    case 3: {
      std::uint32_t length;
      std::string s;
      if (!r.get(length) || !r.bytes(s, length)) return fail("truncated string");
      m.value = std::move(s);
      break;
    }
    default: return fail("unknown value kind");
  }
  if (r.pos != size) return fail("trailing bytes");
  return m;
}

}  // namespace wbc::param::wire
