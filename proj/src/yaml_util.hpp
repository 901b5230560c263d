#pragma once

// Small helpers shared by the YAML loaders. Internal to the library.

#include <yaml-cpp/yaml.h>

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/common.hpp"

namespace wbc::yaml {

[[noreturn]] inline void fail(const YAML::Node& node, const std::string& message) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ParseError(message, 0, 0);
  throw ParseError(message, mark.line + 1, mark.column + 1);
}

inline YAML::Node load(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

inline void requireMap(const YAML::Node& node, const std::string& what) {
  if (!node.IsMap()) fail(node, what + " must be a mapping");
}

inline void requireSequence(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) fail(node, what + " must be a list");
}

/// Rejects keys outside `allowed`.
inline void checkKeys(const YAML::Node& node, std::initializer_list<std::string_view> allowed,
                      const std::string& where) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

inline const YAML::Node required(const YAML::Node& map, const char* key, const std::string& where) {
  const YAML::Node child = map[key];
  if (!child) fail(map, "missing key '" + std::string(key) + "' in " + where);
  return child;
}

inline std::string asString(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  return node.Scalar();
}

inline double asDouble(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, what + " must be a number, got '" + node.Scalar() + "'");
  }
}

inline bool asBool(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a boolean");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(node, what + " must be a boolean, got '" + node.Scalar() + "'");
  }
}

inline std::vector<double> asDoubles(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) fail(node, what + " must be a list of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& item : node) out.push_back(asDouble(item, what));
  return out;
}

inline Vector3 asVector3(const YAML::Node& node, const std::string& what) {
  const auto values = asDoubles(node, what);
  if (values.size() != 3) fail(node, what + " must have 3 entries");
  return Vector3(values[0], values[1], values[2]);
}

}  // namespace wbc::yaml
