#include "declab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "declab/errors.hpp"

namespace declab {

double Jet::derivative(int k) const {
  static constexpr std::array<double, 4> factorial{1.0, 1.0, 2.0, 6.0};
  return c.at(static_cast<std::size_t>(k)) * factorial[static_cast<std::size_t>(k)];
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < 4; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < 4; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

Jet operator-(const Jet& a) {
  Jet r;
  for (int k = 0; k < 4; ++k) r.c[k] = -a.c[k];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < 4; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.c[0] == 0.0) throw DomainError("expression: division by zero");
  Jet q;
  for (int k = 0; k < 4; ++k) {
    double s = a.c[k];
    for (int i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

Jet exp(const Jet& a) {
  Jet e;
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k < 4; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * a.c[i] * e.c[k - i];
    e.c[k] = s / k;
  }
  return e;
}

Jet log(const Jet& a) {
  if (a.c[0] <= 0.0) throw DomainError("expression: log of a nonpositive value");
  Jet l;
  l.c[0] = std::log(a.c[0]);
  for (int k = 1; k < 4; ++k) {
    double s = 0.0;
    for (int i = 1; i < k; ++i) s += i * l.c[i] * a.c[k - i];
    l.c[k] = (a.c[k] - s / k) / a.c[0];
  }
  return l;
}

namespace {

void sincos_jet(const Jet& a, Jet& s, Jet& c) {
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (int k = 1; k < 4; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int i = 1; i <= k; ++i) {
      ss += i * a.c[i] * c.c[k - i];
      cc += i * a.c[i] * s.c[k - i];
    }
    s.c[k] = ss / k;
    c.c[k] = -cc / k;
  }
}

}  // namespace

Jet sin(const Jet& a) {
  Jet s, c;
  sincos_jet(a, s, c);
  return s;
}

Jet cos(const Jet& a) {
  Jet s, c;
  sincos_jet(a, s, c);
  return c;
}

Jet pow(const Jet& a, double exponent) {
  // Small nonnegative integer powers by repeated products: valid at a = 0.
  if (exponent >= 0.0 && exponent <= 16.0 && exponent == std::floor(exponent)) {
    Jet r = Jet::constant(1.0);
    for (int i = 0; i < static_cast<int>(exponent); ++i) r = r * a;
    return r;
  }
  if (a.c[0] == 0.0) throw DomainError("expression: non-integer power of zero");
  Jet p;
  p.c[0] = std::pow(a.c[0], exponent);
  for (int k = 1; k < 4; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += (exponent * j - (k - j)) * a.c[j] * p.c[k - j];
    p.c[k] = s / (k * a.c[0]);
  }
  return p;
}

Jet pow(const Jet& a, const Jet& b) {
  if (b.is_constant()) return pow(a, b.c[0]);
  return exp(b * log(a));
}

// ---------------------------------------------------------------------------

struct Expression::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string function;
  std::vector<std::shared_ptr<const Node>> args;

  Jet eval(const Jet& t) const {
    switch (kind) {
      case Kind::Number: return Jet::constant(number);
      case Kind::Variable: return t;
      case Kind::Neg: return -args[0]->eval(t);
      case Kind::Add: return args[0]->eval(t) + args[1]->eval(t);
      case Kind::Sub: return args[0]->eval(t) - args[1]->eval(t);
      case Kind::Mul: return args[0]->eval(t) * args[1]->eval(t);
      case Kind::Div: return args[0]->eval(t) / args[1]->eval(t);
      case Kind::Pow: return pow(args[0]->eval(t), args[1]->eval(t));
      case Kind::Call: {
        if (function == "sin") return sin(args[0]->eval(t));
        if (function == "cos") return cos(args[0]->eval(t));
        if (function == "exp") return exp(args[0]->eval(t));
        if (function == "log") return log(args[0]->eval(t));
        if (function == "pow") return pow(args[0]->eval(t), args[1]->eval(t));
        break;
      }
    }
    throw DomainError("expression: corrupt node");
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + std::string(s_) + "': " + msg + " at offset " +
                      std::to_string(pos_));
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

  static NodePtr make(Kind k, std::vector<NodePtr> args, double number = 0.0,
                      std::string fn = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->number = number;
    n->function = std::move(fn);
    n->args = std::move(args);
    return n;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::Add, {lhs, product()});
      else if (accept('-'))
        lhs = make(Kind::Sub, {lhs, product()});
      else
        return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::Mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Kind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string tok(s_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("bad number '" + tok + "'");
    }
    if (used != tok.size()) fail("bad number '" + tok + "'");
    return make(Kind::Number, {}, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    if (name == "t") return make(Kind::Variable, {});
    if (name == "pi") return make(Kind::Number, {}, std::numbers::pi);
    const int arity = name == "pow" ? 2
                      : (name == "sin" || name == "cos" || name == "exp" || name == "log") ? 1
                                                                                           : 0;
    if (arity == 0) fail("unknown identifier '" + name + "'");
    if (!accept('(')) fail("expected '(' after " + name);
    std::vector<NodePtr> args{sum()};
    if (arity == 2) {
      if (!accept(',')) fail("pow expects two arguments");
      args.push_back(sum());
    }
    if (!accept(')')) fail("expected ')'");
    return make(Kind::Call, std::move(args), 0.0, name);
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

double Expression::operator()(double t) const { return root_->eval(Jet::constant(t)).value(); }

Jet Expression::jet(double t) const { return root_->eval(Jet::variable(t)); }

}  // namespace declab
