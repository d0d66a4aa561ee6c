#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "anisofrac/point.hpp"

namespace anisofrac {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Source functions of x:
//   const(c)             c
//   sin(w[, phase])      sin(w x1 + phase)
//   bump(a, b)           exp(-1/(1-t^2)) with t mapping (a,b) to (-1,1); 0 outside
//   bump(a1, b1, a2, b2) product of bumps in x1 and x2
//   hat(c, w)            max(0, 1 - |x1 - c| / w); four arguments give a product
// combined with numbers, pi, + - * and parentheses. Arguments are constant
// expressions (numbers, pi, + - * /).
class Expression {
 public:
  static Expression parse(std::string_view text);
  [[nodiscard]] double operator()(const Point& x) const;
  [[nodiscard]] const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace anisofrac
