#include "stab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace stab {

namespace {

// Second-order forward-mode scalar: value, gradient, Hessian.
struct D2 {
  double v;
  Vec g;
  Mat h;

  static D2 constant(double c, Index n) {
    return {c, Vec::Zero(n), Mat::Zero(n, n)};
  }
  static D2 variable(double x, Index i, Index n) {
    D2 d = constant(x, n);
    d.g(i) = 1.0;
    return d;
  }
};

D2 operator+(const D2& a, const D2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
D2 operator-(const D2& a, const D2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
D2 operator-(const D2& a) { return {-a.v, -a.g, -a.h}; }

D2 operator*(const D2& a, const D2& b) {
  D2 r;
  r.v = a.v * b.v;
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

// f(u) with f', f'' supplied.
D2 apply(const D2& u, double f, double fp, double fpp) {
  return {f, fp * u.g, fp * u.h + fpp * (u.g * u.g.transpose())};
}

}  // namespace

struct Expr::Node {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, IntPow, Fn };
  enum class Fun { Sin, Cos, Exp, Log, Sqrt };

  Kind kind;
  double cval = 0.0;   // Const
  Index var = 0;       // Var (0-based)
  int ipow = 0;        // IntPow
  Fun fun = Fun::Sin;  // Fn
  std::shared_ptr<const Node> a, b;
  std::string span;  // source text of this subexpression, for diagnostics

  D2 eval(const Vec& x) const {
    const Index n = x.size();
    switch (kind) {
      case Kind::Const:
        return D2::constant(cval, n);
      case Kind::Var:
        return D2::variable(x(var), var, n);
      case Kind::Add:
        return a->eval(x) + b->eval(x);
      case Kind::Sub:
        return a->eval(x) - b->eval(x);
      case Kind::Mul:
        return a->eval(x) * b->eval(x);
      case Kind::Div: {
        const D2 den = b->eval(x);
        if (den.v == 0.0) throw EvalError("division by zero", span);
        const double iv = 1.0 / den.v;
        return a->eval(x) * apply(den, iv, -iv * iv, 2.0 * iv * iv * iv);
      }
      case Kind::Neg:
        return -a->eval(x);
      case Kind::IntPow: {
        const D2 base = a->eval(x);
        int k = ipow;
        if (k == 0) return D2::constant(1.0, n);
        bool inv = k < 0;
        if (inv) k = -k;
        D2 r = base;
        for (int i = 1; i < k; ++i) r = r * base;
        if (!inv) return r;
        if (r.v == 0.0) throw EvalError("zero raised to a negative power", span);
        const double iv = 1.0 / r.v;
        return apply(r, iv, -iv * iv, 2.0 * iv * iv * iv);
      }
      case Kind::Pow: {
        const D2 base = a->eval(x);
        const D2 expo = b->eval(x);
        if (base.v <= 0.0)
          throw EvalError("real power of a nonpositive base", span);
        // u^w = exp(w * log u)
        const D2 lg = apply(base, std::log(base.v), 1.0 / base.v,
                            -1.0 / (base.v * base.v));
        const D2 prod = expo * lg;
        const double e = std::exp(prod.v);
        return apply(prod, e, e, e);
      }
      case Kind::Fn: {
        const D2 u = a->eval(x);
        switch (fun) {
          case Fun::Sin:
            return apply(u, std::sin(u.v), std::cos(u.v), -std::sin(u.v));
          case Fun::Cos:
            return apply(u, std::cos(u.v), -std::sin(u.v), -std::cos(u.v));
          case Fun::Exp: {
            const double e = std::exp(u.v);
            return apply(u, e, e, e);
          }
          case Fun::Log:
            if (u.v <= 0.0)
              throw EvalError("log of a nonpositive value", span);
            return apply(u, std::log(u.v), 1.0 / u.v, -1.0 / (u.v * u.v));
          case Fun::Sqrt: {
            if (u.v <= 0.0)
              throw EvalError("sqrt of a nonpositive value", span);
            const double s = std::sqrt(u.v);
            return apply(u, s, 0.5 / s, -0.25 / (s * u.v));
          }
        }
        throw InternalError("unreachable function kind");
      }
    }
    throw InternalError("unreachable node kind");
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;
using Fun = Expr::Node::Fun;

class Parser {
 public:
  Parser(const std::string& text, Index n) : text_(text), n_(n) {}

  NodePtr run() {
    if (text_.find_first_not_of(" \t\r\n") == std::string::npos)
      throw ParseError("empty expression", 0);
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  NodePtr make(Kind k, size_t begin, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto node = std::make_shared<Expr::Node>();
    node->kind = k;
    node->a = std::move(a);
    node->b = std::move(b);
    node->span = text_.substr(begin, pos_ - begin);
    return node;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    skip_ws();
    const size_t begin = pos_;
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make(Kind::Add, begin, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make(Kind::Sub, begin, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    skip_ws();
    const size_t begin = pos_;
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = make(Kind::Mul, begin, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = make(Kind::Div, begin, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const size_t begin = pos_;
    if (eat('-')) return make(Kind::Neg, begin, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    skip_ws();
    const size_t begin = pos_;
    NodePtr base = parse_atom();
    if (!eat('^')) return base;
    NodePtr expo = parse_unary();  // right-associative
    // Constant integral exponents with |k| <= 16 use repeated
    // multiplication, which keeps negative bases legal.
    double c;
    if (constant_value(expo, c)) {
      const double rounded = std::nearbyint(c);
      if (std::abs(c - rounded) < 1e-12 && std::abs(rounded) <= 16.0) {
        auto node = std::make_shared<Expr::Node>();
        node->kind = Kind::IntPow;
        node->ipow = static_cast<int>(rounded);
        node->a = std::move(base);
        node->span = text_.substr(begin, pos_ - begin);
        return node;
      }
    }
    return make(Kind::Pow, begin, base, expo);
  }

  static bool constant_value(const NodePtr& node, double& out) {
    if (node->kind == Kind::Const) {
      out = node->cval;
      return true;
    }
    if (node->kind == Kind::Neg) {
      double inner;
      if (constant_value(node->a, inner)) {
        out = -inner;
        return true;
      }
    }
    return false;
  }

  NodePtr parse_atom() {
    skip_ws();
    const size_t begin = pos_;
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!eat(')')) throw ParseError("missing ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number(begin);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return parse_ident(begin);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number(size_t begin) {
    const char* start = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) throw ParseError("malformed number", pos_);
    pos_ += static_cast<size_t>(end - start);
    auto node = std::make_shared<Expr::Node>();
    node->kind = Kind::Const;
    node->cval = v;
    node->span = text_.substr(begin, pos_ - begin);
    return node;
  }

  NodePtr parse_ident(size_t begin) {
    size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      ++end;
    const std::string name = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (name.size() >= 2 && name[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
      if (idx < 1 || idx > n_)
        throw ParseError("variable index out of range: " + name, begin);
      auto node = std::make_shared<Expr::Node>();
      node->kind = Kind::Var;
      node->var = static_cast<Index>(idx - 1);
      node->span = name;
      return node;
    }
    Fun fun;
    if (name == "sin") fun = Fun::Sin;
    else if (name == "cos") fun = Fun::Cos;
    else if (name == "exp") fun = Fun::Exp;
    else if (name == "log") fun = Fun::Log;
    else if (name == "sqrt") fun = Fun::Sqrt;
    else throw ParseError("unknown identifier: " + name, begin);
    if (!eat('(')) throw ParseError("expected '(' after " + name, pos_);
    NodePtr arg = parse_expr();
    if (!eat(')')) throw ParseError("missing ')'", pos_);
    auto node = std::make_shared<Expr::Node>();
    node->kind = Kind::Fn;
    node->fun = fun;
    node->a = std::move(arg);
    node->span = text_.substr(begin, pos_ - begin);
    return node;
  }

  const std::string& text_;
  Index n_;
  size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(const std::string& text, Index n) {
  Parser parser(text, n);
  return Expr(parser.run(), n, text);
}

Eval2Result Expr::eval2(const Vec& x) const {
  if (x.size() != n_)
    throw ValidationError("eval2: point dimension does not match variable count");
  if (!x.allFinite()) throw ValidationError("eval2: nonfinite point");
  D2 d = root_->eval(x);
  // Symmetrize exactly; forward mode keeps this at rounding level already.
  Mat h = 0.5 * (d.h + d.h.transpose());
  return {d.v, std::move(d.g), std::move(h)};
}

}  // namespace stab
