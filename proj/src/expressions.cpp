#include "scriwave/expressions.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace scriwave::expr {

namespace {

Dual make_const(double v) { return Dual{v, {0, 0, 0}}; }

Dual make_var(int i, double v) {
  Dual d{v, {0, 0, 0}};
  d.d[i] = 1.0;
  return d;
}

Dual operator+(const Dual& a, const Dual& b) {
  return {a.v + b.v, {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]}};
}
Dual operator-(const Dual& a, const Dual& b) {
  return {a.v - b.v, {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]}};
}
Dual operator-(const Dual& a) { return {-a.v, {-a.d[0], -a.d[1], -a.d[2]}}; }
Dual operator*(const Dual& a, const Dual& b) {
  return {a.v * b.v,
          {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1],
           a.d[2] * b.v + a.v * b.d[2]}};
}
Dual operator/(const Dual& a, const Dual& b) {
  const double inv = 1.0 / b.v;
  Dual r;
  r.v = a.v * inv;
  for (int i = 0; i < 3; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  return r;
}

Dual chain(const Dual& a, double f, double df) {
  return {f, {df * a.d[0], df * a.d[1], df * a.d[2]}};
}

}  // namespace

struct Expression::Node {
  enum class Kind { constant, variable, add, sub, mul, div, neg, pow, sin, cos, exp, sqrt, gauss };
  Kind kind;
  double value = 0.0;  // constant
  int var = 0;         // variable index or integer exponent
  std::shared_ptr<const Node> a, b, c;

  Dual eval(const double x[3]) const {
    switch (kind) {
      case Kind::constant: return make_const(value);
      case Kind::variable: return make_var(var, x[var]);
      case Kind::add: return a->eval(x) + b->eval(x);
      case Kind::sub: return a->eval(x) - b->eval(x);
      case Kind::mul: return a->eval(x) * b->eval(x);
      case Kind::div: return a->eval(x) / b->eval(x);
      case Kind::neg: return -a->eval(x);
      case Kind::pow: {
        Dual base = a->eval(x);
        const double f = std::pow(base.v, var);
        const double df = var * std::pow(base.v, var - 1);
        return chain(base, f, df);
      }
      case Kind::sin: {
        Dual u = a->eval(x);
        return chain(u, std::sin(u.v), std::cos(u.v));
      }
      case Kind::cos: {
        Dual u = a->eval(x);
        return chain(u, std::cos(u.v), -std::sin(u.v));
      }
      case Kind::exp: {
        Dual u = a->eval(x);
        const double e = std::exp(u.v);
        return chain(u, e, e);
      }
      case Kind::sqrt: {
        Dual u = a->eval(x);
        const double s = std::sqrt(u.v);
        return chain(u, s, 0.5 / s);
      }
      case Kind::gauss: {
        // gauss(x, center, width) = exp(-((x-center)/width)^2)
        Dual u = a->eval(x), cen = b->eval(x), wid = c->eval(x);
        Dual z = (u - cen) / wid;
        Dual z2 = z * z;
        const double e = std::exp(-z2.v);
        return chain(z2, e, -e);
      }
    }
    return make_const(0.0);
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  using Node = Expression::Node;
  using Kind = Node::Kind;

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("expression parse error at position " + std::to_string(pos_) + ": " + what +
                      " in \"" + s_ + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, NodePtr c = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->c = std::move(c);
    return n;
  }

  NodePtr expression() {
    NodePtr e = term();
    for (;;) {
      if (consume('+'))
        e = make(Kind::add, e, term());
      else if (consume('-'))
        e = make(Kind::sub, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (consume('*'))
        e = make(Kind::mul, e, unary());
      else if (consume('/'))
        e = make(Kind::div, e, unary());
      else
        return e;
    }
  }

  NodePtr unary() {
    if (consume('-')) return make(Kind::neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (consume('^')) {
      skip_ws();
      bool neg = consume('-');
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("integer exponent expected");
      auto n = std::make_shared<Node>();
      n->kind = Kind::pow;
      n->a = base;
      n->var = (neg ? -1 : 1) * std::stoi(s_.substr(start, pos_ - start));
      return n;
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (consume('(')) {
      NodePtr e = expression();
      if (!consume(')')) fail("')' expected");
      return e;
    }
    const char ch = peek();
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch))) return ident();
    fail("atom expected");
  }

  NodePtr number() {
    size_t used = 0;
    double v;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->value = v;
    return n;
  }

  NodePtr ident() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "rho" || name == "theta" || name == "phi") {
      auto n = std::make_shared<Node>();
      n->kind = Kind::variable;
      n->var = name == "rho" ? 0 : name == "theta" ? 1 : 2;
      return n;
    }
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->kind = Kind::constant;
      n->value = M_PI;
      return n;
    }
    Kind k;
    int arity = 1;
    if (name == "sin")
      k = Kind::sin;
    else if (name == "cos")
      k = Kind::cos;
    else if (name == "exp")
      k = Kind::exp;
    else if (name == "sqrt")
      k = Kind::sqrt;
    else if (name == "gauss") {
      k = Kind::gauss;
      arity = 3;
    } else
      fail("unknown identifier '" + name + "'");
    if (!consume('(')) fail("'(' expected after function name");
    NodePtr a = expression(), b, c;
    if (arity == 3) {
      if (!consume(',')) fail("',' expected");
      b = expression();
      if (!consume(',')) fail("',' expected");
      c = expression();
    }
    if (!consume(')')) fail("')' expected");
    return make(k, a, b, c);
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::eval(double rho, double theta, double phi) const {
  return eval_dual(rho, theta, phi).v;
}

Dual Expression::eval_dual(double rho, double theta, double phi) const {
  if (!root_) return Dual{};
  const double x[3] = {rho, theta, phi};
  return root_->eval(x);
}

}  // namespace scriwave::expr
