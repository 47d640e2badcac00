#ifndef STAB_LP_HPP
#define STAB_LP_HPP

#include <vector>

#include "stab/common.hpp"

namespace stab {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status;
  Vec x;             // primal point (meaningful for Optimal)
  double objective;  // c'x at the returned point
};

/// min c'x  s.t.  a_eq x = b_eq,  a_in x <= b_in,  x_j >= 0 for j with
/// nonneg[j], x_j free otherwise.  Dense two-phase simplex with Bland's
/// rule; intended for desk-scale problems (tens of rows).
struct LpProblem {
  Vec c;
  Mat a_eq;
  Vec b_eq;
  Mat a_in;
  Vec b_in;
  std::vector<bool> nonneg;  // size = #vars; empty means all free

  Index num_vars() const { return c.size(); }
};

LpResult solve_lp(const LpProblem& problem);

/// Phase-1 only: is {x : a_eq x = b_eq, a_in x <= b_in, sign constraints}
/// nonempty?  Returns a feasible point through `point` when provided.
bool lp_feasible(const LpProblem& problem, Vec* point = nullptr);

}  // namespace stab

#endif  // STAB_LP_HPP
