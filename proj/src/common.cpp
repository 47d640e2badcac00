#include "stab/common.hpp"

#include <Eigen/SVD>

namespace stab {

Index numerical_rank(const Mat& a, double rank_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rank_tol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

Mat orth_basis(const Mat& a, double rank_tol) {
  if (a.size() == 0 || a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Mat(a.rows(), 0);
  const double cut = rank_tol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

Mat null_basis(const Mat& a, double rank_tol) {
  if (a.rows() == 0) return Mat::Identity(a.cols(), a.cols());
  if (a.cols() == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double cut = rank_tol * (smax > 0 ? smax : 1.0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace stab
