#ifndef STAB_PROBLEM_HPP
#define STAB_PROBLEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "stab/expr.hpp"
#include "stab/gspec.hpp"

namespace stab {

/// Composite problem min f(x) + g(F(x)) with a validated reference pair:
/// grad_x L(xbar, ybar_star) = 0 and ybar_star in the subdifferential of g
/// at F(xbar).  Immutable.
class ProblemInstance {
 public:
  ProblemInstance(Index n, Index m, Expr f, std::vector<Expr> big_f, GSpec g,
                  Vec xbar, Vec ybar_star);

  Index n() const { return n_; }
  Index m() const { return m_; }
  const Expr& f() const { return f_; }
  const std::vector<Expr>& big_f() const { return big_f_; }
  const GSpec& g() const { return g_; }
  const Vec& xbar() const { return xbar_; }
  const Vec& ybar_star() const { return ybar_star_; }
  const Vec& ybar() const { return ybar_; }            // F(xbar)
  const Vec& xbar_star() const { return xbar_star_; }  // JF(xbar)' ybar_star

  Vec eval_big_f(const Vec& x) const;
  Mat jacobian_big_f(const Vec& x) const;
  /// Objective of the perturbed problem f(x) - <astar,x> + g(F(x)+b);
  /// +infinity off dom g.
  double perturbed_objective(const Vec& x, const Vec& astar, const Vec& b) const;

 private:
  Index n_, m_;
  Expr f_;
  std::vector<Expr> big_f_;
  GSpec g_;
  Vec xbar_, ybar_star_, ybar_, xbar_star_;
};

/// Hessian of the Lagrangian in x: hess f + sum_i ystar_i hess F_i.
Mat lagrangian_hessian(const ProblemInstance& inst, const Vec& x, const Vec& ystar);

/// sum_i ystar_i hess F_i, the curvature contributed by F alone.
Mat hessian_yf(const ProblemInstance& inst, const Vec& x, const Vec& ystar);

/// Residual of the canonically perturbed KKT system: first block
/// grad_x L(x,y*) - a*, second block the Minty reformulation
/// F(x)+b - prox(g, F(x)+b+y*), which vanishes iff y* is a subgradient at
/// F(x)+b.
Vec kkt_residual(const ProblemInstance& inst, const Vec& x, const Vec& ystar,
                 const Vec& astar, const Vec& b);

struct MultiplierSetResult {
  bool feasible = false;               // M(x,x*,b) nonempty
  Vec element;                         // one multiplier when feasible
  std::optional<bool> unique;          // singleton?
  std::optional<bool> bounded;         // all coordinate ranges finite?
  std::string note;
};

/// Description of M(x,x*,b) = {y* in subdiff g(F(x)+b) : JF(x)' y* = x*}.
MultiplierSetResult multiplier_set(const ProblemInstance& inst, const Vec& x,
                                   const Vec& xstar, const Vec& b);

}  // namespace stab

#endif  // STAB_PROBLEM_HPP
