#include "wbc/param/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace wbc::param {

struct Expression::Node {
  enum class Op {
    Number, Name, Neg, Not, Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or, Norm, Abs
  };
  Op op = Op::Number;
  double number = 0.0;
  std::string name;
  Node* a = nullptr;
  Node* b = nullptr;
  // lazily resolved parameter
  mutable const Parameter* parameter = nullptr;
  mutable const ParameterRegistry* resolvedIn = nullptr;
  mutable std::size_t generation = std::numeric_limits<std::size_t>::max();
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

enum class Tok { Number, Name, LParen, RParen, Plus, Minus, Star, Slash, Lt, Le, Gt, Ge, Eq, Ne, Not, And, Or, End };

struct Token {
  Tok kind;
  int offset;  // 1-based
  std::string text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto isNameStart = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto isName = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  while (i < s.size()) {
    const char c = s[i];
    const int at = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const std::string rest(s.substr(i));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      const std::size_t used = static_cast<std::size_t>(end - rest.c_str());
      out.push_back({Tok::Number, at, rest.substr(0, used), v});
      i += used;
      if (i < s.size() && isNameStart(s[i])) throw ExpressionError("malformed number", static_cast<int>(i) + 1);
      continue;
    }
    if (isNameStart(c)) {
      std::size_t j = i;
      while (j < s.size() && isName(s[j])) ++j;
      std::string name(s.substr(i, j - i));
      if (name.back() == '.') throw ExpressionError("name ends with '.'", static_cast<int>(j));
      out.push_back({Tok::Name, at, std::move(name)});
      i = j;
      continue;
    }
    auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
    Tok kind;
    int width = 1;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '<': kind = two('=') ? (width = 2, Tok::Le) : Tok::Lt; break;
      case '>': kind = two('=') ? (width = 2, Tok::Ge) : Tok::Gt; break;
      case '=':
        if (!two('=')) throw ExpressionError("expected '=='", at);
        kind = Tok::Eq;
        width = 2;
        break;
      case '!': kind = two('=') ? (width = 2, Tok::Ne) : Tok::Not; break;
      case '&':
        if (!two('&')) throw ExpressionError("expected '&&'", at);
        kind = Tok::And;
        width = 2;
        break;
      case '|':
        if (!two('|')) throw ExpressionError("expected '||'", at);
        kind = Tok::Or;
        width = 2;
        break;
      default: throw ExpressionError(std::string("unexpected character '") + c + "'", at);
    }
    out.push_back({kind, at, std::string(s.substr(i, width))});
    i += width;
  }
  out.push_back({Tok::End, static_cast<int>(s.size()) + 1, ""});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<std::unique_ptr<Node>>& nodes)
      : tokens_(std::move(tokens)), nodes_(nodes) {}

  Node* parse() {
    Node* n = orExpr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return n;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError(peek().kind == Tok::End ? "unexpected end of expression" : what, peek().offset);
  }
  Node* make(Op op, Node* a = nullptr, Node* b = nullptr) {
    nodes_.push_back(std::make_unique<Node>());
    Node* n = nodes_.back().get();
    n->op = op;
    n->a = a;
    n->b = b;
    return n;
  }

  template <typename Next>
  Node* binary(Next next, std::initializer_list<std::pair<Tok, Op>> ops) {
    Node* left = (this->*next)();
    while (true) {
      bool matched = false;
      for (const auto& [tok, op] : ops) {
        if (accept(tok)) {
          left = make(op, left, (this->*next)());
          matched = true;
          break;
        }
      }
      if (!matched) return left;
    }
  }

  Node* orExpr() { return binary(&Parser::andExpr, {{Tok::Or, Op::Or}}); }
  Node* andExpr() { return binary(&Parser::equality, {{Tok::And, Op::And}}); }
  Node* equality() { return binary(&Parser::relation, {{Tok::Eq, Op::Eq}, {Tok::Ne, Op::Ne}}); }
  Node* relation() {
    return binary(&Parser::sum, {{Tok::Le, Op::Le}, {Tok::Lt, Op::Lt}, {Tok::Ge, Op::Ge}, {Tok::Gt, Op::Gt}});
  }
  Node* sum() { return binary(&Parser::product, {{Tok::Plus, Op::Add}, {Tok::Minus, Op::Sub}}); }
  Node* product() { return binary(&Parser::unary, {{Tok::Star, Op::Mul}, {Tok::Slash, Op::Div}}); }

  Node* unary() {
    if (accept(Tok::Minus)) return make(Op::Neg, unary());
    if (accept(Tok::Not)) return make(Op::Not, unary());
    return primary();
  }

  Node* primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        ++pos_;
        Node* n = make(Op::Number);
        n->number = t.number;
        return n;
      }
      case Tok::Name: {
        ++pos_;
        if (accept(Tok::LParen)) {
          Op op;
          if (t.text == "norm") {
            op = Op::Norm;
          } else if (t.text == "abs") {
            op = Op::Abs;
          } else {
            throw ExpressionError("unknown function '" + t.text + "'", t.offset);
          }
          Node* arg = orExpr();
          if (!accept(Tok::RParen)) fail("expected ')'");
          return make(op, arg);
        }
        if (t.text == "true" || t.text == "false") {
          Node* n = make(Op::Number);
          n->number = t.text == "true" ? 1.0 : 0.0;
          return n;
        }
        Node* n = make(Op::Name);
        n->name = t.text;
        return n;
      }
      case Tok::LParen: {
        ++pos_;
        Node* inner = orExpr();
        if (!accept(Tok::RParen)) fail("expected ')'");
        return inner;
      }
      default: fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::vector<std::unique_ptr<Node>>& nodes_;
  std::size_t pos_ = 0;
};

const Parameter* resolve(const Node* n, const ParameterRegistry& registry, std::string* message) {
  if (n->resolvedIn != &registry) {
    n->resolvedIn = &registry;
    n->parameter = nullptr;
    n->generation = std::numeric_limits<std::size_t>::max();
  }
  if (!n->parameter && n->generation != registry.generation()) {
    n->generation = registry.generation();
    n->parameter = registry.lookup(n->name);
  }
  if (!n->parameter && message) *message = "unknown parameter '" + n->name + "'";
  return n->parameter;
}

bool eval(const Node* n, const ParameterRegistry& registry, double& out, std::string* message) {
  double x, y;
  switch (n->op) {
    case Op::Number: out = n->number; return true;
    case Op::Name: {
      const Parameter* p = resolve(n, registry, message);
      if (!p) return false;
      switch (p->kind()) {
        case ParamKind::Scalar: out = p->scalar(); return true;
        case ParamKind::Bool: out = p->boolean() ? 1.0 : 0.0; return true;
        case ParamKind::Vector:
          if (p->vector().size() == 1) {
            out = p->vector()[0];
            return true;
          }
          if (message) *message = "vector '" + n->name + "' used as a scalar; wrap it in norm()";
          return false;
        case ParamKind::String:
          if (message) *message = "string parameter '" + n->name + "' in an expression";
          return false;
      }
      return false;
    }
    case Op::Norm:
      if (n->a->op == Op::Name) {
        const Parameter* p = resolve(n->a, registry, message);
        if (!p) return false;
        if (p->kind() == ParamKind::Vector) {
          out = p->vector().norm();
          return true;
        }
      }
      if (!eval(n->a, registry, x, message)) return false;
      out = std::abs(x);
      return true;
    default: break;
  }
  if (!eval(n->a, registry, x, message)) return false;
  switch (n->op) {
    case Op::Neg: out = -x; return true;
    case Op::Not: out = x == 0.0 ? 1.0 : 0.0; return true;
    case Op::Abs: out = std::abs(x); return true;
    case Op::And:
      if (x == 0.0) {
        out = 0.0;
        return true;
      }
      break;
    case Op::Or:
      if (x != 0.0) {
        out = 1.0;
        return true;
      }
      break;
    default: break;
  }
  if (!eval(n->b, registry, y, message)) return false;
  switch (n->op) {
    case Op::Add: out = x + y; break;
    case Op::Sub: out = x - y; break;
    case Op::Mul: out = x * y; break;
    case Op::Div: out = x / y; break;
    case Op::Lt: out = x < y; break;
    case Op::Le: out = x <= y; break;
    case Op::Gt: out = x > y; break;
    case Op::Ge: out = x >= y; break;
    case Op::Eq: out = x == y; break;
    case Op::Ne: out = x != y; break;
    case Op::And:
    case Op::Or: out = y != 0.0; break;
    default: return false;
  }
  return true;
}

}  // namespace

Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

Expression Expression::compile(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  Parser parser(tokenize(text), e.nodes_);
  e.root_ = parser.parse();
  return e;
}

std::vector<std::string> Expression::names() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (n->op == Node::Op::Name) out.push_back(n->name);
  return out;
}

bool Expression::evaluate(const ParameterRegistry& registry, double& result, std::string* message) const {
  return eval(root_, registry, result, message);
}

double Expression::evaluate(const ParameterRegistry& registry) const {
  double v;
  std::string message;
  if (!evaluate(registry, v, &message)) throw Error("cannot evaluate '" + text_ + "': " + message);
  return v;
}

void EventEngine::add(const std::string& name, const std::string& expression) {
  for (const auto& e : events_)
    if (e.name == name) throw Error("duplicate event '" + name + "'");
  events_.push_back(Event{name, Expression::compile(expression), false, false, {}});
  fired_.reserve(events_.size());
  newWarnings_.reserve(events_.size());
}

const std::vector<std::size_t>& EventEngine::emit() {
  fired_.clear();
  newWarnings_.clear();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    Event& e = events_[i];
    double value;
    const bool ok = e.expression.evaluate(registry_, value, e.warned ? nullptr : &e.warning);
    if (!ok) {
      if (!e.warned) {
        e.warned = true;
        e.warning = "event '" + e.name + "' skipped: " + e.warning;
        newWarnings_.push_back(i);
      }
      e.previous = false;
      continue;
    }
    const bool now = value != 0.0 && !std::isnan(value);
    if (now && !e.previous) fired_.push_back(i);
    e.previous = now;
  }
  return fired_;
}

void EventEngine::reset() {
  for (auto& e : events_) e.previous = false;
}

}  // namespace wbc::param
