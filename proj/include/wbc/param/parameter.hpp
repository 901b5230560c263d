#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wbc/common.hpp"

namespace wbc::param {

enum class ParamKind { Scalar, Vector, Bool, String };

std::string_view toString(ParamKind kind);

using ParamValue = std::variant<double, Vector, bool, std::string>;

ParamKind kindOf(const ParamValue& value);

class Parameter;

/// Receives change notifications; output bindings implement this.
class ParameterListener {
 public:
  virtual ~ParameterListener() = default;
  virtual void parameterChanged(const Parameter& parameter) = 0;
};

/// A named view onto a variable owned by a controller object.
class Parameter {
 public:
  using Storage = std::variant<double*, Vector*, bool*, std::string*>;

  Parameter(std::string name, Storage storage) : name_(std::move(name)), storage_(storage) {}

  const std::string& name() const { return name_; }
  ParamKind kind() const { return static_cast<ParamKind>(storage_.index()); }

  /// Copies the current value out. Allocates for vectors and strings.
  ParamValue value() const;
  double scalar() const { return *std::get<double*>(storage_); }
  const Vector& vector() const { return *std::get<Vector*>(storage_); }
  bool boolean() const { return *std::get<bool*>(storage_); }
  const std::string& string() const { return *std::get<std::string*>(storage_); }

  /// Throws Error on kind mismatch and DimensionError when a vector changes size.
  /// Notifies listeners after storing.
  void set(const ParamValue& value);
  void setScalar(double value);
  void setVector(const Eigen::Ref<const Vector>& value);
  void setBool(bool value);

  /// Stores without notifying (used when the owner refreshes outputs in bulk).
  void assign(const ParamValue& value);

  /// Tells listeners that the underlying variable changed.
  void notifyChanged() const;

  void addListener(ParameterListener* listener) { listeners_.push_back(listener); }
  void removeListener(ParameterListener* listener);
  bool hasListeners() const { return !listeners_.empty(); }

 private:
  std::string name_;
  Storage storage_;
  std::vector<ParameterListener*> listeners_;
};

/// Registry of reflected parameters, addressed by "owner.name".
class ParameterRegistry {
 public:
  static std::string fullName(std::string_view owner, std::string_view name);

  /// Throws Error when the full name is already declared.
  Parameter& declare(std::string_view owner, std::string_view name, Parameter::Storage storage);
  Parameter& declare(std::string_view owner, std::string_view name, double* v) { return declare(owner, name, Parameter::Storage(v)); }
  Parameter& declare(std::string_view owner, std::string_view name, Vector* v) { return declare(owner, name, Parameter::Storage(v)); }
  Parameter& declare(std::string_view owner, std::string_view name, bool* v) { return declare(owner, name, Parameter::Storage(v)); }
  Parameter& declare(std::string_view owner, std::string_view name, std::string* v) { return declare(owner, name, Parameter::Storage(v)); }

  /// Null when absent.
  Parameter* lookup(std::string_view fullName) const;

  /// Parameters in declaration order.
  const std::vector<std::unique_ptr<Parameter>>& parameters() const { return parameters_; }
  std::vector<const Parameter*> withPrefix(std::string_view owner) const;
  /// Grows with every declaration; lets lazy resolvers skip repeated lookups.
  std::size_t generation() const { return parameters_.size(); }

  /// Time source used by rate-limited bindings; the runtime advances it each cycle.
  double now() const { return now_; }
  void setNow(double t) { now_ = t; }

 private:
  std::vector<std::unique_ptr<Parameter>> parameters_;
  std::unordered_map<std::string, Parameter*> byName_;
  double now_ = 0.0;
};

}  // namespace wbc::param
