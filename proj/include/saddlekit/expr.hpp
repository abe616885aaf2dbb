#pragma once

// Tiny recursive-descent parser for height expressions in x and y, used by the
// graph generator on the CLI side ("x^2-y^2", "0.5*x*y", ...). Supports
// + - * / ^, parentheses, unary minus, the variables x, y, r (= sqrt(x^2+y^2)),
// the constants pi and e, and one-argument functions.

#include <cctype>
#include <functional>
#include <memory>

#include "core.hpp"

namespace saddlekit {

using HeightFn = std::function<double(double, double)>;

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct ExprParser {
  const std::string& src;
  size_t pos = 0;

  explicit ExprParser(const std::string& s) : src(s) {}

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) pos++;
  }
  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) { pos++; return true; }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ExprError("expression error at offset " + std::to_string(pos) + ": " + what);
  }

  HeightFn parse() {
    HeightFn e = expr();
    skip();
    if (pos != src.size()) fail("trailing input");
    return e;
  }

  HeightFn expr() {
    HeightFn lhs = term();
    for (;;) {
      if (eat('+')) {
        HeightFn rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) + rhs(x, y); };
      } else if (eat('-')) {
        HeightFn rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) - rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  HeightFn term() {
    HeightFn lhs = factor();
    for (;;) {
      if (eat('*')) {
        HeightFn rhs = factor();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) * rhs(x, y); };
      } else if (eat('/')) {
        HeightFn rhs = factor();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) / rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  HeightFn factor() {  // unary minus binds looser than '^': -x^2 == -(x^2)
    if (eat('-')) {
      HeightFn inner = factor();
      return [inner](double x, double y) { return -inner(x, y); };
    }
    return power();
  }

  HeightFn power() {  // right-associative; the exponent may carry its own sign
    HeightFn base = primary();
    if (eat('^')) {
      HeightFn exp = factor();
      return [base, exp](double x, double y) { return std::pow(base(x, y), exp(x, y)); };
    }
    return base;
  }

  HeightFn primary() {
    skip();
    if (pos >= src.size()) fail("unexpected end of expression");
    char c = src[pos];
    if (c == '(') {
      pos++;
      HeightFn e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(src.substr(pos), &used);
      pos += used;
      return [v](double, double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) pos++;
      std::string name = src.substr(start, pos - start);
      if (name == "x") return [](double x, double) { return x; };
      if (name == "y") return [](double, double y) { return y; };
      if (name == "r") return [](double x, double y) { return std::hypot(x, y); };
      if (name == "pi") return [](double, double) { return kPi; };
      if (name == "e") return [](double, double) { return std::exp(1.0); };
      static const std::pair<const char*, double (*)(double)> fns[] = {
          {"sin", std::sin}, {"cos", std::cos}, {"tan", std::tan},
          {"exp", std::exp}, {"log", std::log}, {"sqrt", std::sqrt},
          {"abs", std::fabs}, {"sinh", std::sinh}, {"cosh", std::cosh},
          {"tanh", std::tanh}};
      for (const auto& [fname, fp] : fns) {
        if (name == fname) {
          if (!eat('(')) fail(name + " needs an argument list");
          HeightFn arg = expr();
          if (!eat(')')) fail("missing ')'");
          return [fp, arg](double x, double y) { return fp(arg(x, y)); };
        }
      }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace detail

inline HeightFn parse_height_expression(const std::string& text) {
  detail::ExprParser p(text);
  return p.parse();
}

}  // namespace saddlekit
