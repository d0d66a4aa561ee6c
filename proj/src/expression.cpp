#include "anisofrac/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <fmt/format.h>

namespace anisofrac {

struct Expression::Node {
  std::function<double(const Point&)> eval;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(std::function<double(const Point&)> f) {
  return std::make_shared<const Expression::Node>(Expression::Node{std::move(f)});
}

double bump1(double x, double a, double b) {
  if (!(x > a && x < b)) return 0.0;
  const double t = (2.0 * x - a - b) / (b - a);
  return std::exp(-1.0 / (1.0 - t * t));
}

double hat1(double x, double c, double w) { return std::max(0.0, 1.0 - std::abs(x - c) / w); }

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError(fmt::format("expression '{}': {} at column {}", s_, what, pos_ + 1));
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
  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }
  std::string identifier() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  bool number(double& out) {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.')) return false;
    const std::string tail(s_.substr(pos_));
    std::size_t used = 0;
    try {
      out = std::stod(tail, &used);
    } catch (...) {
      fail("malformed number");
    }
    pos_ += used;
    return true;
  }

  // constant expressions for function arguments
  double cexpr() {
    double v = cterm();
    for (;;) {
      if (accept('+')) v += cterm();
      else if (accept('-')) v -= cterm();
      else return v;
    }
  }
  double cterm() {
    double v = cfactor();
    for (;;) {
      if (accept('*')) v *= cfactor();
      else if (accept('/')) v /= cfactor();
      else return v;
    }
  }
  double cfactor() {
    if (accept('-')) return -cfactor();
    if (accept('+')) return cfactor();
    if (accept('(')) {
      const double v = cexpr();
      expect(')');
      return v;
    }
    double v;
    if (number(v)) return v;
    if (identifier() == "pi") return std::numbers::pi;
    fail("expected a constant");
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+')) {
        NodePtr r = term();
        e = make([e, r](const Point& x) { return e->eval(x) + r->eval(x); });
      } else if (accept('-')) {
        NodePtr r = term();
        e = make([e, r](const Point& x) { return e->eval(x) - r->eval(x); });
      } else {
        return e;
      }
    }
  }
  NodePtr term() {
    NodePtr e = factor();
    while (accept('*')) {
      NodePtr r = factor();
      e = make([e, r](const Point& x) { return e->eval(x) * r->eval(x); });
    }
    return e;
  }
  NodePtr factor() {
    if (accept('-')) {
      NodePtr e = factor();
      return make([e](const Point& x) { return -e->eval(x); });
    }
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    double v;
    if (number(v)) return make([v](const Point&) { return v; });
    const std::size_t at = pos_;
    const std::string name = identifier();
    if (name.empty()) fail("expected a number, function or '('");
    if (name == "pi") return make([](const Point&) { return std::numbers::pi; });
    std::vector<double> args;
    expect('(');
    if (!accept(')')) {
      do args.push_back(cexpr());
      while (accept(','));
      expect(')');
    }
    auto arity = [&](std::initializer_list<std::size_t> ok) {
      for (std::size_t n : ok)
        if (args.size() == n) return;
      pos_ = at;
      fail(fmt::format("wrong number of arguments to {}", name));
    };
    if (name == "const") {
      arity({1});
      const double c = args[0];
      return make([c](const Point&) { return c; });
    }
    if (name == "sin") {
      arity({1, 2});
      const double w = args[0], ph = args.size() > 1 ? args[1] : 0.0;
      return make([w, ph](const Point& x) { return std::sin(w * x[0] + ph); });
    }
    if (name == "bump" || name == "hat") {
      arity({2, 4});
      for (std::size_t k = 0; k + 1 < args.size(); k += 2) {
        if (name == "bump" && !(args[k + 1] > args[k])) fail("bump needs a < b");
        if (name == "hat" && !(args[k + 1] > 0.0)) fail("hat needs a positive width");
      }
      auto f = name == "bump" ? bump1 : hat1;
      if (args.size() == 2) return make([f, a = args[0], b = args[1]](const Point& x) { return f(x[0], a, b); });
      return make([f, args](const Point& x) { return f(x[0], args[0], args[1]) * f(x[1], args[2], args[3]); });
    }
    pos_ = at;
    fail(fmt::format("unknown function '{}'", name));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::operator()(const Point& x) const { return root_->eval(x); }

}  // namespace anisofrac
