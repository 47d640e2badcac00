#ifndef STAB_GSPEC_HPP
#define STAB_GSPEC_HPP

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "stab/polyhedral.hpp"
#include "stab/subspace.hpp"

namespace stab {

/// q_{P,W}: u -> 1/2 <u,Wu> on rge P, +infinity elsewhere.
struct GeneralizedQuadraticForm {
  PWPair pair;

  double value(const Vec& u) const;
  bool in_domain(const Vec& u, double tolerance = 1e-9) const;
};

/// Finitely generated cone {R mu + S lambda : mu >= 0, lambda free}.
struct ConeGenerators {
  Index ambient = 0;
  Mat nonneg;  // generator columns with nonnegative coefficients
  Mat free_;   // generator columns with free coefficients

  bool is_trivial() const { return nonneg.cols() == 0 && free_.cols() == 0; }
};

/// A catalog lsc convex function with evaluable prox, subgradient tests,
/// SC derivatives (finite sets of (P,W) pairs), quadratic bundles and
/// q-subderivatives.  Immutable; all operations are pure.
class GSpec {
 public:
  enum class Kind { Polyhedral, Box, L1, Quadratic, Separable };

  /// Indicator of {y : A_i y = c_i (i in eq_rows), A_i y <= c_i otherwise}.
  /// Nonemptiness is certified by a feasibility solve.
  static GSpec polyhedral(Mat a, Vec c, std::vector<Index> eq_rows);
  /// Indicator of [l, u]; -infinity / +infinity entries allowed.
  static GSpec box(Vec lower, Vec upper);
  /// Weighted l1 norm, all weights positive.
  static GSpec l1(Vec weights);
  /// y -> 1/2 <y,Qy> + <c,y>, Q symmetric positive semidefinite.
  static GSpec quadratic(Mat q, Vec c);
  /// Sum of independent one-dimensional catalog functions.
  static GSpec separable(std::vector<GSpec> parts);

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }

  /// Function value; +infinity off the domain (within tolerance for
  /// indicator variants).
  double value(const Vec& y) const;

  /// The unique minimizer of 1/2|x-z|^2 + g(x).
  Vec prox(const Vec& z) const;

  /// Minty test: y = prox(y + y*).
  bool in_subdifferential(const Vec& y, const Vec& ystar,
                          double tolerance = tol::membership) const;

  /// The full finite SC-derivative set at a graph point, as (P,W) pairs.
  /// Deterministically ordered.
  std::vector<PWPair> sc_derivative(const Vec& y, const Vec& ystar) const;

  /// One generalized quadratic form per SC-derivative pair.
  std::vector<GeneralizedQuadraticForm> quad_bundle(const Vec& y, const Vec& ystar) const;

  /// min{<w,Ww> : (P,W) in the SC derivative, w in rge P}; +infinity when
  /// no pair admits w.
  double q_subderivative(const Vec& y, const Vec& ystar, const Vec& w) const;

  /// Normal cone of dom g at y, as generators.
  ConeGenerators normal_cone_dom(const Vec& y) const;

  /// H-form view when g is the indicator of a polyhedron (Polyhedral, Box,
  /// or a separable sum of such); nullopt otherwise.
  std::optional<PolyhedronH> as_polyhedron() const;

  // Variant accessors (valid for the matching kind only).
  const Mat& quad_q() const { return q_; }
  const Vec& quad_c() const { return c_; }
  const Vec& l1_weights() const { return w_; }
  const Vec& box_lower() const { return l_; }
  const Vec& box_upper() const { return u_; }
  const PolyhedronH& polyhedron() const { return poly_; }
  const std::vector<GSpec>& parts() const { return parts_; }

  static constexpr Index kPairCap = 4096;

 private:
  GSpec() = default;

  // One-dimensional SC pair set as (p,w) scalars, for separable variants.
  std::vector<std::pair<double, double>> sc_pairs_1d(double y, double ystar) const;

  Kind kind_ = Kind::Quadratic;
  Index dim_ = 0;
  PolyhedronH poly_;        // Polyhedral
  Vec l_, u_;               // Box
  Vec w_;                   // L1
  Mat q_;                   // Quadratic
  Vec c_;                   // Quadratic
  std::vector<GSpec> parts_;  // Separable
};

constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();

}  // namespace stab

#endif  // STAB_GSPEC_HPP
