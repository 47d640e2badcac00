#ifndef STAB_SUBSPACE_HPP
#define STAB_SUBSPACE_HPP

#include <optional>
#include <vector>

#include "stab/common.hpp"

namespace stab {

/// A linear subspace of R^k held as an orthonormal basis plus the
/// orthogonal projection onto it.  Immutable after construction.
class Subspace {
 public:
  /// Span of the given vectors (columns of equal length).  An empty list
  /// with explicit ambient dimension yields the zero subspace.
  static Subspace span(const std::vector<Vec>& vectors, Index ambient_dim = -1);
  static Subspace span_cols(const Mat& columns);
  static Subspace zero(Index ambient_dim);

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const Mat& basis() const { return basis_; }
  const Mat& proj() const { return proj_; }

  bool contains(const Vec& v, double tolerance = tol::subspace) const;
  Subspace orthogonal_complement() const;

 private:
  explicit Subspace(Mat basis);
  Mat basis_;  // ambient x dim, orthonormal columns
  Mat proj_;   // ambient x ambient, symmetric idempotent
};

/// Metric on subspaces of equal ambient dimension: the operator norm of
/// the difference of the orthogonal projections.
double dz_metric(const Subspace& l1, const Subspace& l2);

/// Equality of subspaces under the projection metric.
bool subspace_equal(const Subspace& l1, const Subspace& l2,
                    double tolerance = tol::subspace);

/// Adjoint of a subspace of R^{2d}: L* = {(y*,x*) : (x*,-y*) in L^perp}.
/// An involution; maps dim k to dim 2d-k.
Subspace adjoint(const Subspace& l);

/// Basis pair of a subspace L = rge(P,W) with P,W symmetric, P^2 = P and
/// W(I-P) = I-P; the subspace is {(Pp, Wp) : p in R^d} and the pair is
/// unique when it exists.
struct PWPair {
  Mat p;
  Mat w;

  Index dim() const { return p.rows(); }
  /// Residuals of the defining identities; all must be ~0 for a valid pair.
  double invariant_residual() const;
  void validate(double tolerance = 1e-10) const;
};

/// Recovers the unique (P,W) basis of a d-dimensional subspace of R^{2d},
/// or nullopt when the subspace admits none.
std::optional<PWPair> pw_decompose(const Subspace& l);

/// The subspace rge(P,W) of R^{2d}.
Subspace pw_to_subspace(const PWPair& pair);

}  // namespace stab

#endif  // STAB_SUBSPACE_HPP
