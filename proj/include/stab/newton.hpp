#ifndef STAB_NEWTON_HPP
#define STAB_NEWTON_HPP

#include <string>
#include <vector>

#include "stab/problem.hpp"

namespace stab {

struct KKTPoint {
  Vec x;
  Vec ystar;
  double residual = 0.0;
};

struct SolveOptions {
  int max_iter = 50;
  double tolerance = 1e-10;
  bool damping = true;
};

struct SolveOutcome {
  bool ok = false;
  KKTPoint point;
  int iterations = 0;
  std::string message;
};

/// Solves the perturbed KKT system for (a*, b) by semismooth Newton on the
/// Minty residual.  Newton data comes from one SC-derivative pair taken at
/// the current prox point; the pair whose subspace is nearest (in the
/// projection metric) to a finite-difference tangent of the prox is used.
SolveOutcome solve_perturbed(const ProblemInstance& inst, const Vec& astar,
                             const Vec& b, const Vec& x0, const Vec& y0,
                             const SolveOptions& opts = {});

/// Multistart wrapper: distinct solutions (pairwise distance > 1e-6),
/// sorted by distance to the reference pair.
std::vector<KKTPoint> find_all_local(const ProblemInstance& inst, const Vec& astar,
                                     const Vec& b,
                                     const std::vector<std::pair<Vec, Vec>>& starts,
                                     const SolveOptions& opts = {});

}  // namespace stab

#endif  // STAB_NEWTON_HPP
