#ifndef STAB_QP_HPP
#define STAB_QP_HPP

#include <string>
#include <vector>

#include "stab/common.hpp"

namespace stab {

enum class ProjStatus { Optimal, Infeasible, Failure };

struct ProjectionResult {
  ProjStatus status = ProjStatus::Failure;
  Vec x;
  // Indices of active constraints: 0..p-1 equalities, p..p+q-1 inequalities.
  std::vector<Index> active;
  // Multipliers aligned with `active` (inequality entries >= 0).
  Vec lambda;
  std::string diagnostic;
};

/// Euclidean projection of z onto {x : a_eq x = b_eq, a_in x <= b_in} by a
/// dual active-set method.  Needs no feasible starting point and certifies
/// infeasibility.  Desk scale only (tens of rows).
ProjectionResult project_polyhedron(const Vec& z, const Mat& a_eq, const Vec& b_eq,
                                    const Mat& a_in, const Vec& b_in);

}  // namespace stab

#endif  // STAB_QP_HPP
