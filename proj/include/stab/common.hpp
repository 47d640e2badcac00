#ifndef STAB_COMMON_HPP
#define STAB_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace stab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when an input violates a documented precondition or an
/// instance fails validation at construction.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when two certified computation routes disagree.  Carries both
/// certificates in the message; the CLI maps it to exit code 3.
class InconsistencyError : public std::runtime_error {
 public:
  explicit InconsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Combinatorial cap exceeded (face enumeration, separable pair products).
class CapExceededError : public std::runtime_error {
 public:
  explicit CapExceededError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Internal solver failure that contradicts an already-verified condition.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace tol {
// Numerical rank: singular values above rank_tol * sigma_max.
inline constexpr double rank = 1e-9;
// Subspace equality threshold on the projection metric.
inline constexpr double subspace = 1e-8;
// Active-constraint detection for polyhedra.
inline constexpr double active = 1e-8;
// Graph membership via the prox residual.
inline constexpr double membership = 1e-9;
// Instance validation at construction.
inline constexpr double validation = 1e-8;
// Strict-positivity margin, relative to the largest |eigenvalue|.
inline constexpr double psd = 1e-9;
}  // namespace tol

/// Numerical rank of a matrix: count of singular values > rank_tol * sigma_max.
Index numerical_rank(const Mat& a, double rank_tol = tol::rank);

/// Orthonormal basis of the column space (columns) of `a`.
Mat orth_basis(const Mat& a, double rank_tol = tol::rank);

/// Orthonormal basis of the null space of `a` (basis vectors as columns).
Mat null_basis(const Mat& a, double rank_tol = tol::rank);

/// Operator 2-norm (largest singular value).
double op_norm(const Mat& a);

}  // namespace stab

#endif  // STAB_COMMON_HPP
