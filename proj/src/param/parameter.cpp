#include "wbc/param/parameter.hpp"

#include <algorithm>

namespace wbc::param {

std::string_view toString(ParamKind kind) {
  switch (kind) {
    case ParamKind::Scalar: return "scalar";
    case ParamKind::Vector: return "vector";
    case ParamKind::Bool: return "bool";
    case ParamKind::String: return "string";
  }
  return "?";
}

ParamKind kindOf(const ParamValue& value) { return static_cast<ParamKind>(value.index()); }

ParamValue Parameter::value() const {
  return std::visit([](auto* p) { return ParamValue(*p); }, storage_);
}

void Parameter::assign(const ParamValue& value) {
  if (kindOf(value) != kind()) {
    throw Error("parameter '" + name_ + "' is a " + std::string(toString(kind())) + ", got a " +
                std::string(toString(kindOf(value))));
  }
  switch (kind()) {
    case ParamKind::Scalar: *std::get<double*>(storage_) = std::get<double>(value); break;
    case ParamKind::Vector: {
      Vector& target = *std::get<Vector*>(storage_);
      const Vector& source = std::get<Vector>(value);
      requireSize(source.size(), target.size(), name_.c_str());
      target = source;
      break;
    }
    case ParamKind::Bool: *std::get<bool*>(storage_) = std::get<bool>(value); break;
    case ParamKind::String: *std::get<std::string*>(storage_) = std::get<std::string>(value); break;
  }
}

void Parameter::set(const ParamValue& value) {
  assign(value);
  notifyChanged();
}

void Parameter::setScalar(double value) {
  if (kind() != ParamKind::Scalar) throw Error("parameter '" + name_ + "' is not a scalar");
  *std::get<double*>(storage_) = value;
  notifyChanged();
}

void Parameter::setVector(const Eigen::Ref<const Vector>& value) {
  if (kind() != ParamKind::Vector) throw Error("parameter '" + name_ + "' is not a vector");
  Vector& target = *std::get<Vector*>(storage_);
  requireSize(value.size(), target.size(), name_.c_str());
  target = value;
  notifyChanged();
}

void Parameter::setBool(bool value) {
  if (kind() != ParamKind::Bool) throw Error("parameter '" + name_ + "' is not a bool");
  *std::get<bool*>(storage_) = value;
  notifyChanged();
}

void Parameter::notifyChanged() const {
  for (auto* listener : listeners_) listener->parameterChanged(*this);
}

void Parameter::removeListener(ParameterListener* listener) {
  listeners_.erase(std::remove(listeners_.begin(), listeners_.end(), listener), listeners_.end());
}

std::string ParameterRegistry::fullName(std::string_view owner, std::string_view name) {
  if (owner.empty()) return std::string(name);
  std::string full(owner);
  full += '.';
  full += name;
  return full;
}

Parameter& ParameterRegistry::declare(std::string_view owner, std::string_view name, Parameter::Storage storage) {
  std::string full = fullName(owner, name);
  if (byName_.count(full)) throw Error("duplicate parameter '" + full + "'");
  parameters_.push_back(std::make_unique<Parameter>(full, storage));
  byName_.emplace(std::move(full), parameters_.back().get());
  return *parameters_.back();
}

Parameter* ParameterRegistry::lookup(std::string_view full) const {
  auto it = byName_.find(std::string(full));
  return it == byName_.end() ? nullptr : it->second;
}

std::vector<const Parameter*> ParameterRegistry::withPrefix(std::string_view owner) const {
  std::vector<const Parameter*> out;
  const std::string prefix = std::string(owner) + ".";
  for (const auto& p : parameters_) {
    if (p->name().compare(0, prefix.size(), prefix) == 0) out.push_back(p.get());
  }
  return out;
}

}  // namespace wbc::param
