#include "stab/subspace.hpp"

#include <Eigen/Eigenvalues>

namespace stab {

Subspace::Subspace(Mat basis) : basis_(std::move(basis)) {
  proj_ = basis_ * basis_.transpose();
  if (basis_.cols() == 0) proj_ = Mat::Zero(basis_.rows(), basis_.rows());
}

Subspace Subspace::span(const std::vector<Vec>& vectors, Index ambient_dim) {
  if (vectors.empty()) {
    if (ambient_dim < 0)
      throw ValidationError("span: empty vector list needs an ambient dimension");
    return zero(ambient_dim);
  }
  const Index k = vectors.front().size();
  if (ambient_dim >= 0 && ambient_dim != k)
    throw ValidationError("span: ambient dimension mismatch");
  Mat cols(k, static_cast<Index>(vectors.size()));
  for (Index j = 0; j < cols.cols(); ++j) {
    if (vectors[static_cast<size_t>(j)].size() != k)
      throw ValidationError("span: input vectors have mixed dimensions");
    cols.col(j) = vectors[static_cast<size_t>(j)];
  }
  return Subspace(orth_basis(cols));
}

Subspace Subspace::span_cols(const Mat& columns) {
  return Subspace(orth_basis(columns));
}

Subspace Subspace::zero(Index ambient_dim) { return Subspace(Mat(ambient_dim, 0)); }

bool Subspace::contains(const Vec& v, double tolerance) const {
  if (v.size() != ambient_dim()) return false;
  const double scale = std::max(1.0, v.norm());
  return (v - proj_ * v).norm() <= tolerance * scale;
}

Subspace Subspace::orthogonal_complement() const {
  return Subspace(null_basis(basis_.transpose()));
}

double dz_metric(const Subspace& l1, const Subspace& l2) {
  if (l1.ambient_dim() != l2.ambient_dim())
    throw ValidationError("dz_metric: ambient dimensions differ");
  // The difference of two orthogonal projections is symmetric.
  Eigen::SelfAdjointEigenSolver<Mat> es(l1.proj() - l2.proj(),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool subspace_equal(const Subspace& l1, const Subspace& l2, double tolerance) {
  return l1.ambient_dim() == l2.ambient_dim() && dz_metric(l1, l2) <= tolerance;
}

Subspace adjoint(const Subspace& l) {
  const Index two_d = l.ambient_dim();
  if (two_d % 2 != 0)
    throw ValidationError("adjoint: ambient dimension must be even");
  const Index d = two_d / 2;
  // (y*,x*) in L* iff (x*,-y*) in L^perp; so L* = R(L^perp) with
  // R(a,b) = (-b,a).
  const Mat perp = null_basis(l.basis().transpose());
  Mat rotated(two_d, perp.cols());
  rotated.topRows(d) = -perp.bottomRows(d);
  rotated.bottomRows(d) = perp.topRows(d);
  return Subspace::span_cols(rotated);
}

double PWPair::invariant_residual() const {
  const Index d = p.rows();
  const Mat i = Mat::Identity(d, d);
  double r = (p * p - p).norm();
  r = std::max(r, (w * (i - p) - (i - p)).norm());
  r = std::max(r, (w - (p * w * p + (i - p))).norm());
  r = std::max(r, (p - p.transpose()).norm());
  r = std::max(r, (w - w.transpose()).norm());
  return r;
}

void PWPair::validate(double tolerance) const {
  if (p.rows() != p.cols() || w.rows() != w.cols() || p.rows() != w.rows())
    throw ValidationError("PWPair: P and W must be square of equal size");
  if (invariant_residual() > tolerance)
    throw ValidationError("PWPair: defining identities violated");
}

std::optional<PWPair> pw_decompose(const Subspace& l) {
  const Index two_d = l.ambient_dim();
  if (two_d % 2 != 0)
    throw ValidationError("pw_decompose: ambient dimension must be even");
  const Index d = two_d / 2;
  if (l.dim() != d) return std::nullopt;

  const Mat b1 = l.basis().topRows(d);
  const Mat b2 = l.basis().bottomRows(d);

  // P projects onto the image of the first block.
  const Mat u = orth_basis(b1);
  const Index r = u.cols();
  const Mat p = u * u.transpose();
  const Mat i = Mat::Identity(d, d);

  // W = S + (I-P) with S = PWP symmetric, supported on rge P, determined by
  // P v* = S v over the basis pairs (v, v*) of L.  Solve the symmetric
  // least-squares system in the reduced coordinates of rge P.
  Mat s = Mat::Zero(d, d);
  if (r > 0) {
    const Mat v_red = u.transpose() * b1;   // r x dim
    const Mat rhs_red = u.transpose() * b2; // r x dim
    const Index nsym = r * (r + 1) / 2;
    Mat a(static_cast<Index>(r * b1.cols()), nsym);
    Vec rhs(static_cast<Index>(r * b1.cols()));
    for (Index col = 0; col < b1.cols(); ++col) {
      for (Index row = 0; row < r; ++row) {
        const Index eq = col * r + row;
        rhs(eq) = rhs_red(row, col);
        Index k = 0;
        for (Index ii = 0; ii < r; ++ii) {
          for (Index jj = ii; jj < r; ++jj) {
            double coeff = 0.0;
            if (ii == row) coeff += v_red(jj, col);
            if (jj == row && jj != ii) coeff += v_red(ii, col);
            a(eq, k++) = coeff;
          }
        }
      }
    }
    const Vec sol = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    Mat s_red(r, r);
    Index k = 0;
    for (Index ii = 0; ii < r; ++ii)
      for (Index jj = ii; jj < r; ++jj) {
        s_red(ii, jj) = sol(k);
        s_red(jj, ii) = sol(k);
        ++k;
      }
    s = u * s_red * u.transpose();
  }

  PWPair pair{p, s + (i - p)};
  if (pair.invariant_residual() > 1e-8) return std::nullopt;
  if (!subspace_equal(pw_to_subspace(pair), l, 1e-8)) return std::nullopt;
  return pair;
}

Subspace pw_to_subspace(const PWPair& pair) {
  pair.validate();
  const Index d = pair.dim();
  Mat cols(2 * d, d);
  cols.topRows(d) = pair.p;
  cols.bottomRows(d) = pair.w;
  Subspace l = Subspace::span_cols(cols);
  if (l.dim() != d)
    throw ValidationError("pw_to_subspace: rge(P,W) is rank deficient");
  return l;
}

}  // namespace stab
