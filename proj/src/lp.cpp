#include "stab/lp.hpp"

#include <cmath>
#include <limits>

namespace stab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-8;

// Dense tableau simplex in canonical form: basic columns stay unit vectors.
class Tableau {
 public:
  // A z = b, z >= 0, b >= 0 assumed; artificial columns appended by caller.
  Tableau(Mat a, Vec b, std::vector<int> basis)
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)) {}

  // Minimizes c'z with Bland's rule.  Returns false when unbounded.
  bool minimize(const Vec& c, const std::vector<bool>& usable) {
    for (;;) {
      // Reduced costs d_j = c_j - sum_r c_basis[r] * a(r,j).
      Vec y = Vec::Zero(a_.rows());
      for (Index r = 0; r < a_.rows(); ++r) y(r) = c(basis_[static_cast<size_t>(r)]);
      Index enter = -1;
      for (Index j = 0; j < a_.cols(); ++j) {
        if (!usable[static_cast<size_t>(j)] || is_basic(j)) continue;
        const double d = c(j) - y.dot(a_.col(j));
        if (d < -kPivotTol) {
          enter = j;
          break;  // Bland: smallest eligible index
        }
      }
      if (enter < 0) return true;  // optimal
      Index leave_row = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < a_.rows(); ++r) {
        const double pivot = a_(r, enter);
        if (pivot > kPivotTol) {
          const double ratio = b_(r) / pivot;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               (leave_row < 0 || basis_[static_cast<size_t>(r)] <
                                     basis_[static_cast<size_t>(leave_row)]))) {
            best_ratio = ratio;
            leave_row = r;
          }
        }
      }
      if (leave_row < 0) return false;  // unbounded
      pivot(leave_row, enter);
    }
  }

  void pivot(Index row, Index col) {
    const double p = a_(row, col);
    a_.row(row) /= p;
    b_(row) /= p;
    for (Index r = 0; r < a_.rows(); ++r) {
      if (r == row) continue;
      const double f = a_(r, col);
      if (f != 0.0) {
        a_.row(r) -= f * a_.row(row);
        b_(r) -= f * b_(row);
        if (b_(r) < 0.0 && b_(r) > -1e-11) b_(r) = 0.0;
      }
    }
    basis_[static_cast<size_t>(row)] = static_cast<int>(col);
  }

  bool is_basic(Index j) const {
    for (int bj : basis_)
      if (bj == static_cast<int>(j)) return true;
    return false;
  }

  double objective(const Vec& c) const {
    double v = 0.0;
    for (Index r = 0; r < a_.rows(); ++r)
      v += c(basis_[static_cast<size_t>(r)]) * b_(r);
    return v;
  }

  Vec primal(Index n) const {
    Vec z = Vec::Zero(n);
    for (Index r = 0; r < a_.rows(); ++r) {
      const int j = basis_[static_cast<size_t>(r)];
      if (j < static_cast<int>(n)) z(j) = b_(r);
    }
    return z;
  }

  const Mat& matrix() const { return a_; }
  const std::vector<int>& basis() const { return basis_; }

 private:
  Mat a_;
  Vec b_;
  std::vector<int> basis_;
};

struct StandardForm {
  Mat a;  // rows x cols, all variables >= 0
  Vec b;  // >= 0
  Vec c;
  Index n_orig;                 // original variable count
  std::vector<Index> pos_col;   // column of x_j^+ (or the variable itself)
  std::vector<Index> neg_col;   // column of x_j^- (-1 when x_j >= 0)
};

StandardForm to_standard(const LpProblem& p) {
  const Index n = p.num_vars();
  const Index me = p.a_eq.rows();
  const Index mi = p.a_in.rows();
  std::vector<bool> nonneg = p.nonneg;
  if (nonneg.empty()) nonneg.assign(static_cast<size_t>(n), false);

  Index cols = 0;
  std::vector<Index> pos(static_cast<size_t>(n)), neg(static_cast<size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    pos[static_cast<size_t>(j)] = cols++;
    if (!nonneg[static_cast<size_t>(j)]) neg[static_cast<size_t>(j)] = cols++;
  }
  const Index slack0 = cols;
  cols += mi;

  Mat a = Mat::Zero(me + mi, cols);
  Vec b(me + mi);
  for (Index r = 0; r < me; ++r) {
    for (Index j = 0; j < n; ++j) {
      a(r, pos[static_cast<size_t>(j)]) = p.a_eq(r, j);
      if (neg[static_cast<size_t>(j)] >= 0) a(r, neg[static_cast<size_t>(j)]) = -p.a_eq(r, j);
    }
    b(r) = p.b_eq(r);
  }
  for (Index r = 0; r < mi; ++r) {
    for (Index j = 0; j < n; ++j) {
      a(me + r, pos[static_cast<size_t>(j)]) = p.a_in(r, j);
      if (neg[static_cast<size_t>(j)] >= 0) a(me + r, neg[static_cast<size_t>(j)]) = -p.a_in(r, j);
    }
    a(me + r, slack0 + r) = 1.0;
    b(me + r) = p.b_in(r);
  }

  Vec c = Vec::Zero(cols);
  for (Index j = 0; j < n; ++j) {
    c(pos[static_cast<size_t>(j)]) = p.c(j);
    if (neg[static_cast<size_t>(j)] >= 0) c(neg[static_cast<size_t>(j)]) = -p.c(j);
  }

  // Row scaling, then flip rows to make b >= 0.
  for (Index r = 0; r < a.rows(); ++r) {
    const double row_max = a.cols() > 0 ? a.row(r).cwiseAbs().maxCoeff() : 0.0;
    double s = std::max(row_max, std::abs(b(r)));
    if (s > 0) {
      a.row(r) /= s;
      b(r) /= s;
    }
    if (b(r) < 0) {
      a.row(r) = -a.row(r);
      b(r) = -b(r);
    }
  }
  return {std::move(a), std::move(b), std::move(c), n, std::move(pos), std::move(neg)};
}

LpResult solve_impl(const LpProblem& p, bool feasibility_only) {
  StandardForm sf = to_standard(p);
  const Index rows = sf.a.rows();
  const Index cols = sf.a.cols();

  // Phase 1 with artificial basis.
  Mat a1(rows, cols + rows);
  a1 << sf.a, Mat::Identity(rows, rows);
  std::vector<int> basis(static_cast<size_t>(rows));
  for (Index r = 0; r < rows; ++r) basis[static_cast<size_t>(r)] = static_cast<int>(cols + r);
  Tableau tab(a1, sf.b, basis);

  Vec c1 = Vec::Zero(cols + rows);
  c1.tail(rows).setOnes();
  std::vector<bool> usable(static_cast<size_t>(cols + rows), true);
  if (!tab.minimize(c1, usable))
    throw InternalError("phase-1 simplex reported unbounded");
  if (tab.objective(c1) > kFeasTol)
    return {LpStatus::Infeasible, Vec::Zero(p.num_vars()), 0.0};

  // Pivot artificials out of the basis where possible.
  for (Index r = 0; r < rows; ++r) {
    if (tab.basis()[static_cast<size_t>(r)] >= static_cast<int>(cols)) {
      for (Index j = 0; j < cols; ++j) {
        if (std::abs(tab.matrix()(r, j)) > 1e-7) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }
  // Lock any artificial still in the basis (degenerate zero row) at zero.
  for (Index j = cols; j < cols + rows; ++j) usable[static_cast<size_t>(j)] = false;

  auto extract = [&](double obj) {
    Vec z = tab.primal(cols);
    Vec x(sf.n_orig);
    for (Index j = 0; j < sf.n_orig; ++j) {
      x(j) = z(sf.pos_col[static_cast<size_t>(j)]);
      if (sf.neg_col[static_cast<size_t>(j)] >= 0) x(j) -= z(sf.neg_col[static_cast<size_t>(j)]);
    }
    return LpResult{LpStatus::Optimal, std::move(x), obj};
  };

  if (feasibility_only) return extract(0.0);

  Vec c2 = Vec::Zero(cols + rows);
  c2.head(cols) = sf.c;
  if (!tab.minimize(c2, usable))
    return {LpStatus::Unbounded, Vec::Zero(p.num_vars()), 0.0};
  LpResult res = extract(tab.objective(c2));
  res.objective = p.c.dot(res.x);
  return res;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem) { return solve_impl(problem, false); }

bool lp_feasible(const LpProblem& problem, Vec* point) {
  LpProblem q = problem;
  q.c = Vec::Zero(problem.num_vars());
  LpResult r = solve_impl(q, true);
  if (r.status != LpStatus::Optimal) return false;
  if (point) *point = r.x;
  return true;
}

}  // namespace stab
