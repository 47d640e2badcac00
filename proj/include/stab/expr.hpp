#ifndef STAB_EXPR_HPP
#define STAB_EXPR_HPP

#include <memory>
#include <string>

#include "stab/common.hpp"

namespace stab {

/// Syntax error with the offending position in the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  size_t position;
};

/// Domain violation during evaluation (log of a nonpositive value, division
/// by zero, ...), reported with the offending subexpression.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& msg, const std::string& subexpr)
      : std::runtime_error(msg + " in subexpression '" + subexpr + "'") {}
};

/// Value, gradient and Hessian of a scalar expression at a point.
struct Eval2Result {
  double value;
  Vec grad;
  Mat hess;
};

/// Parsed scalar expression in variables x1..xn.  Immutable and shareable.
class Expr {
 public:
  /// Parses `text` against the grammar
  ///   expr   := term (('+'|'-') term)*
  ///   term   := unary (('*'|'/') unary)*
  ///   unary  := '-' unary | power
  ///   power  := atom ('^' unary)?
  ///   atom   := number | 'x'k | fn '(' expr ')' | '(' expr ')'
  /// with fn in {sin, cos, exp, log, sqrt}.  Variable indices must lie in
  /// 1..n.
  static Expr parse(const std::string& text, Index n);

  /// Value, gradient and Hessian at x via second-order forward mode; the
  /// Hessian is exactly symmetric.
  Eval2Result eval2(const Vec& x) const;

  double value(const Vec& x) const { return eval2(x).value; }
  Index num_vars() const { return n_; }
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expr(std::shared_ptr<const Node> root, Index n, std::string text)
      : root_(std::move(root)), n_(n), text_(std::move(text)) {}
  std::shared_ptr<const Node> root_;
  Index n_ = 0;
  std::string text_;
};

}  // namespace stab

#endif  // STAB_EXPR_HPP
