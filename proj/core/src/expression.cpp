#include "eulergel/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace eulergel {

struct Expression::Node {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };
  Kind kind = Kind::number;
  double value = 0.0;
  int var = 0;  // 0 = t, 1..3 = x, y, z
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double t, const double* x) const {
    switch (kind) {
      case Kind::number:
        return value;
      case Kind::variable:
        return var == 0 ? t : x[var - 1];
      case Kind::negate:
        return -args[0]->eval(t, x);
      case Kind::add:
        return args[0]->eval(t, x) + args[1]->eval(t, x);
      case Kind::sub:
        return args[0]->eval(t, x) - args[1]->eval(t, x);
      case Kind::mul:
        return args[0]->eval(t, x) * args[1]->eval(t, x);
      case Kind::div:
        return args[0]->eval(t, x) / args[1]->eval(t, x);
      case Kind::pow:
        return std::pow(args[0]->eval(t, x), args[1]->eval(t, x));
      case Kind::call:
        break;
    }
    const double a = args[0]->eval(t, x);
    if (fn == "sin") return std::sin(a);
    if (fn == "cos") return std::cos(a);
    if (fn == "tan") return std::tan(a);
    if (fn == "exp") return std::exp(a);
    if (fn == "log") return std::log(a);
    if (fn == "sqrt") return std::sqrt(a);
    if (fn == "abs") return std::abs(a);
    if (fn == "tanh") return std::tanh(a);
    const double b = args[1]->eval(t, x);
    if (fn == "min") return std::min(a, b);
    if (fn == "max") return std::max(a, b);
    return std::pow(a, b);
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

int arity(const std::string& fn) {
  if (fn == "sin" || fn == "cos" || fn == "tan" || fn == "exp" || fn == "log" || fn == "sqrt" ||
      fn == "abs" || fn == "tanh")
    return 1;
  if (fn == "min" || fn == "max" || fn == "pow") return 2;
  return -1;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  bool constant = true;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError("cannot parse \"" + s_ + "\" at position " + std::to_string(pos_) +
                          ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = binary(Kind::add, n, term());
      else if (accept('-'))
        n = binary(Kind::sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = binary(Kind::mul, n, unary());
      else if (accept('/'))
        n = binary(Kind::div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::negate;
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Expression::Node>();
      if (accept('(')) {
        const int k = arity(id);
        if (k < 0) fail("unknown function '" + id + "'");
        n->kind = Kind::call;
        n->fn = id;
        n->args.push_back(expr());
        for (int i = 1; i < k; ++i) {
          if (!accept(',')) fail("function '" + id + "' takes " + std::to_string(k) + " arguments");
          n->args.push_back(expr());
        }
        if (!accept(')')) fail("expected ')' after arguments of '" + id + "'");
        return n;
      }
      if (id == "pi") {
        n->value = std::numbers::pi;
      } else if (id == "e") {
        n->value = std::numbers::e;
      } else if (id == "t" || id == "x" || id == "y" || id == "z") {
        n->kind = Kind::variable;
        n->var = id == "t" ? 0 : id == "x" ? 1 : id == "y" ? 2 : 3;
        constant = false;
      } else {
        fail("unknown identifier '" + id + "'");
      }
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : Expression(0.0) {}

Expression::Expression(double value) {
  auto n = std::make_shared<Node>();
  n->value = value;
  root_ = n;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  text_ = buf;
}

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse();
  e.text_ = text;
  e.constant_ = p.constant;
  return e;
}

double Expression::operator()(double t, const Vec& x) const {
  double c[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < x.dim() && a < 3; ++a) c[a] = x[a];
  return root_->eval(t, c);
}

double Expression::operator()(double t, double x, double y, double z) const {
  const double c[3] = {x, y, z};
  return root_->eval(t, c);
}

}  // namespace eulergel
