#pragma once

// Scalar expressions of (t, x, y, z) used for loads and initial data in
// scenario files, e.g. "0.1*sin(pi*x)*exp(-t)".
//
// Grammar: + - * / ^ (right associative), unary minus, parentheses,
// constants pi and e, and the functions sin cos tan exp log sqrt abs tanh
// min max pow.

#include <memory>
#include <string>

#include "eulergel/errors.hpp"
#include "eulergel/tensor.hpp"

namespace eulergel {

class ExpressionError : public Error {
 public:
  using Error::Error;
};

class Expression {
 public:
  /// The constant 0.
  Expression();
  explicit Expression(double value);

  /// Throws ExpressionError with the position of the first problem.
  static Expression parse(const std::string& text);

  /// Missing coordinates (beyond the point's dimension) evaluate to 0.
  double operator()(double t, const Vec& x) const;
  double operator()(double t, double x = 0.0, double y = 0.0, double z = 0.0) const;

  const std::string& text() const noexcept { return text_; }
  /// True when the expression references none of t, x, y, z.
  bool is_constant() const noexcept { return constant_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  bool constant_ = true;
};

}  // namespace eulergel
