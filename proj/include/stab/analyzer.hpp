#ifndef STAB_ANALYZER_HPP
#define STAB_ANALYZER_HPP

#include <optional>
#include <string>
#include <vector>

#include "stab/problem.hpp"

namespace stab {

enum class TriState { Yes, No, NotComputed };

std::string to_string(TriState t);

/// Witness attached to a failed check: a direction (or pair of directions)
/// violating the condition, plus a human-readable origin.
struct Certificate {
  Vec u;      // primal direction (may be empty)
  Vec vstar;  // dual direction (may be empty)
  std::string description;
};

struct CheckResult {
  bool ok = false;
  std::optional<Certificate> certificate;
};

struct SingletonRegularity {
  bool applicable = false;
  bool regular = false;
  std::optional<Certificate> certificate;
};

struct StabilityReport {
  CheckResult soqc;
  CheckResult bcq;
  CheckResult necessary_vs;
  CheckResult strong_vs;
  bool sc_singleton = false;
  std::optional<bool> singleton_regular;        // singleton route, when applicable
  std::optional<bool> mordukhovich_polyhedral;  // polyhedral route, when applicable
  TriState mordukhovich_aubin = TriState::NotComputed;  // aggregated Aubin verdict
  TriState sll = TriState::NotComputed;
  TriState tilt_stable = TriState::NotComputed;
  TriState full_stability = TriState::NotComputed;
  std::optional<Mat> localization_jacobian;  // (n+m) x (n+m)
  std::optional<Certificate> aubin_certificate;
  std::vector<std::string> notes;
};

/// Second-order qualification condition: for every SC pair (P,W) at the
/// reference point, ker JF' meets (rge P)^perp only at zero.
CheckResult check_soqc(const ProblemInstance& inst);

/// Nondegeneracy rank test; must agree with check_soqc on polyhedral g.
bool check_soqc_polyhedral_crosscheck(const ProblemInstance& inst);

/// Basic constraint qualification: ker JF' meets N_{dom g}(F(xbar)) only
/// at zero.
CheckResult check_bcq(const ProblemInstance& inst);

/// Nonnegativity of <u, hess_L u> + d2_q g(JF u) for all u: per SC pair,
/// positive semidefiniteness of Z'(hess_L + JF' W JF)Z on the feasibility
/// subspace Z = ker (I-P)JF.  Exact; no sampling needed because the
/// pointwise minimum of finitely many branches is nonnegative iff each
/// branch is nonnegative on its own region.
CheckResult check_necessary_vs(const ProblemInstance& inst);

/// Strict positivity version of the same test (strong variational
/// sufficiency).
CheckResult check_strong_vs(const ProblemInstance& inst);

/// Strong second-order sufficient condition on the span of the critical
/// cone; must agree with check_strong_vs on polyhedral g.
bool check_strong_vs_polyhedral_crosscheck(const ProblemInstance& inst);

/// When the SC derivative is a singleton rge(P,W): regularity of the
/// bordered system hess_L u + JF' v* = 0, (JF u, v*) in rge(P,W).
SingletonRegularity check_singleton_regularity(const ProblemInstance& inst);

/// Derivative of the single-valued localization of the KKT map, as the
/// (n+m)x(n+m) matrix sending (u*, v) to (u, v*).  Requires the singleton
/// regularity test to pass.
Mat localization_derivative(const ProblemInstance& inst);

/// Mordukhovich criterion for polyhedral-indicator g, decided exactly per
/// coderivative face pair.
CheckResult mordukhovich_polyhedral(const ProblemInstance& inst);

/// Whether the SC chain rule for g o F is certified at the reference point:
/// JF has full row rank, or SOQC holds and the SC derivative is a singleton.
bool chain_rule_certified(const ProblemInstance& inst);

/// SC derivative of the composite g o F through the chain rule, one
/// n-dimensional subspace of R^{2n} per pair.
std::vector<Subspace> sc_chain_rule(const ProblemInstance& inst);

/// Tilt stability through the q-subderivative chain rule; NotComputed when
/// the chain rule is not certified.
TriState check_tilt_stability(const ProblemInstance& inst);

/// Runs every check and aggregates the verdicts along the implication
/// graph; throws InconsistencyError when certified routes disagree.
StabilityReport analyze(const ProblemInstance& inst);

}  // namespace stab

#endif  // STAB_ANALYZER_HPP
