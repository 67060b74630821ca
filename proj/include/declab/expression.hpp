#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

namespace declab {

/// Truncated Taylor series in t: c[k] = f^(k)(t0) / k!, k = 0..3.
/// Arithmetic on jets gives exact derivatives of composed expressions.
struct Jet {
  std::array<double, 4> c{};

  static Jet constant(double v) { return Jet{{v, 0.0, 0.0, 0.0}}; }
  static Jet variable(double t) { return Jet{{t, 1.0, 0.0, 0.0}}; }

  double value() const { return c[0]; }
  /// k-th derivative, k <= 3.
  double derivative(int k) const;
  bool is_constant() const { return c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0; }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet pow(const Jet& a, const Jet& b);

/// Arithmetic expression in one variable `t`.
///
/// Grammar: sums and products of numbers, `t`, `pi`, parenthesised terms,
/// unary minus, right-associative `^`, and calls to sin, cos, exp, log, pow.
/// Evaluation is on jets, so first to third derivatives come for free.
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);

  double operator()(double t) const;
  Jet jet(double t) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace declab
