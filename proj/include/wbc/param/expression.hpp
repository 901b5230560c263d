#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/param/parameter.hpp"

namespace wbc::param {

/// Syntax error; column() is the 1-based character offset of the problem
/// (one past the end for unexpected end of input).
class ExpressionError : public ParseError {
 public:
  ExpressionError(const std::string& what, int offset) : ParseError(what, 1, offset) {}
  int offset() const noexcept { return column(); }
};

/// Compiled arithmetic/logical expression over reflected parameters.
///
///   expr     := or
///   or       := and ('||' and)*
///   and      := equality ('&&' equality)*
///   equality := relation (('==' | '!=') relation)*
///   relation := sum (('<' | '<=' | '>' | '>=') sum)*
///   sum      := product (('+' | '-') product)*
///   product  := unary (('*' | '/') unary)*
///   unary    := ('-' | '!') unary | primary
///   primary  := number | name | name '(' expr ')' | '(' expr ')'
///
/// Functions are norm(x) and abs(x). Booleans evaluate as 1 and 0. Vectors
/// may only appear as the argument of norm(), or as a one-element value.
class Expression {
 public:
  static Expression compile(std::string_view text);

  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;
  ~Expression();

  const std::string& text() const { return text_; }
  std::vector<std::string> names() const;

  /// Evaluates against the registry. Names resolve on first use and are
  /// cached. Returns false (leaving message set) when a name is missing or a
  /// value has the wrong kind. Allocation-free once all names resolve.
  bool evaluate(const ParameterRegistry& registry, double& result, std::string* message = nullptr) const;

  /// Convenience for tests: throws Error on evaluation failure.
  double evaluate(const ParameterRegistry& registry) const;

  struct Node;

 private:
  Expression() = default;
  std::string text_;
  std::vector<std::unique_ptr<Node>> nodes_;
  Node* root_ = nullptr;
};

/// Fire-once events: an event fires when its expression goes from false to
/// true, evaluated once per call to emit().
class EventEngine {
 public:
  explicit EventEngine(const ParameterRegistry& registry) : registry_(registry) {}

  /// Throws ExpressionError on bad syntax and Error on a duplicate name.
  void add(const std::string& name, const std::string& expression);
  std::size_t size() const { return events_.size(); }
  const std::string& name(std::size_t i) const { return events_[i].name; }
  const std::string& expression(std::size_t i) const { return events_[i].expression.text(); }

  /// Evaluates every event once. The returned indices stay valid until the
  /// next call. No allocation in steady state.
  const std::vector<std::size_t>& emit();
  /// Events that failed to evaluate for the first time in the last emit().
  const std::vector<std::size_t>& newWarnings() const { return newWarnings_; }
  const std::string& warning(std::size_t i) const { return events_[i].warning; }
  /// Clears edge detectors (after reconfiguration).
  void reset();

 private:
  struct Event {
    std::string name;
    Expression expression;
    bool previous = false;
    bool warned = false;
    std::string warning;
  };
  const ParameterRegistry& registry_;
  std::vector<Event> events_;
  std::vector<std::size_t> fired_, newWarnings_;
};

}  // namespace wbc::param
