#ifndef STAB_HARNESS_HPP
#define STAB_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "stab/newton.hpp"

namespace stab {

/// Deterministic multistart pattern around the reference pair: the
/// reference itself plus +-spread pokes in every primal and dual
/// coordinate.
std::vector<std::pair<Vec, Vec>> default_starts(const ProblemInstance& inst,
                                                double spread);

struct LipschitzEstimate {
  double kappa_hat = 0.0;
  int pairs_used = 0;
  int failures = 0;
  bool inconclusive = false;
  // Worst pair for reproduction.
  Vec pert_a_1, pert_b_1, pert_a_2, pert_b_2;
  KKTPoint sol_1, sol_2;
};

/// Solves the perturbed system at seeded uniform perturbations in the
/// (a*,b)-ball and returns the largest solution-to-perturbation ratio over
/// sample pairs at least radius/100 apart.  Inconclusive when more than
/// 20% of the solves fail.
LipschitzEstimate estimate_lipschitz(const ProblemInstance& inst, double radius,
                                     int samples, uint64_t seed);

struct DerivativeCheck {
  double max_rel_error = 0.0;
  std::vector<std::string> notes;
};

/// Central finite differences of the solved localization against the
/// predicted derivative, over the canonical perturbation directions (or
/// the given ones), with the h ladder {1e-5, 1e-6, 1e-7} per direction.
DerivativeCheck verify_localization_derivative(const ProblemInstance& inst,
                                               const Mat& jacobian,
                                               const std::vector<Vec>& directions = {});

struct MultiplierProbe {
  int samples = 0;
  int unique_count = 0;
  int nonunique_count = 0;
  int infeasible_count = 0;
  double max_ratio = 0.0;  // empirical multiplier Lipschitz ratio
  bool inconclusive = false;
};

/// Samples (x, x*, b) in dom M near the reference (feasibility by prox
/// construction) and reports the uniqueness flags plus the empirical
/// Lipschitz ratio of the multipliers.
MultiplierProbe probe_multiplier_uniqueness(const ProblemInstance& inst, double radius,
                                            int samples, uint64_t seed);

struct SingleValuednessViolation {
  Vec astar, b;
  KKTPoint first, second;
};

struct SingleValuednessProbe {
  int samples = 0;
  int samples_with_solution = 0;
  std::vector<SingleValuednessViolation> violations;
};

/// Looks for two distinct KKT solutions inside the localization window for
/// the same sampled perturbation; any hit refutes single-valuedness of the
/// localized KKT map.  Both recorded points re-pass the residual check.
SingleValuednessProbe probe_single_valuedness(const ProblemInstance& inst,
                                              double radius, int samples,
                                              uint64_t seed,
                                              double loc_radius = -1.0);

struct FullStabilityReport {
  int samples = 0;
  int argmin_without_kkt = 0;   // localized argmin that matches no KKT pair
  int empty_count = 0;          // no qualifying pair at all
  std::vector<SingleValuednessViolation> violations;
  double modulus = 0.0;         // empirical modulus of the selected pair
  bool inconclusive = false;
};

/// Minimizes the perturbed objective over the delta-ball by multistart
/// derivative-free descent, filters KKT pairs within the delta
/// localization, and reports single-valuedness violations and the
/// empirical modulus.
FullStabilityReport check_full_stability(const ProblemInstance& inst, double delta,
                                         double radius, int samples, uint64_t seed);

}  // namespace stab

#endif  // STAB_HARNESS_HPP
