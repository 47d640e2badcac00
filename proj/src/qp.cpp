#include "stab/qp.hpp"

#include <limits>
#include <sstream>

namespace stab {

namespace {

constexpr double kTol = 1e-10;
constexpr double kViolTol = 1e-11;

struct ActiveData {
  std::vector<Index> rows;  // constraint indices (eq first by convention)
  Mat normals;              // n x |A|
  Vec rhs;                  // |A|
};

// Exact solution of min 1/2|x-z|^2 s.t. N'x = d, plus least-squares
// multipliers; assumes N has full column rank.
void resolve(const Vec& z, const ActiveData& act, Vec& x, Vec& lambda) {
  if (act.rows.empty()) {
    x = z;
    lambda.resize(0);
    return;
  }
  const Mat& n = act.normals;
  const Mat gram = n.transpose() * n;
  lambda = gram.ldlt().solve(n.transpose() * z - act.rhs);
  x = z - n * lambda;
}

}  // namespace

ProjectionResult project_polyhedron(const Vec& z, const Mat& a_eq, const Vec& b_eq,
                                    const Mat& a_in, const Vec& b_in) {
  const Index dim = z.size();
  const Index p = a_eq.rows();
  const Index q = a_in.rows();
  if ((p > 0 && a_eq.cols() != dim) || (q > 0 && a_in.cols() != dim))
    throw ValidationError("project_polyhedron: constraint dimension mismatch");

  auto normal_of = [&](Index i) -> Vec {
    return i < p ? Vec(a_eq.row(i)) : Vec(a_in.row(i - p));
  };
  auto rhs_of = [&](Index i) -> double { return i < p ? b_eq(i) : b_in(i - p); };
  auto is_eq = [&](Index i) { return i < p; };

  ActiveData act;
  act.normals = Mat(dim, 0);
  act.rhs = Vec(0);
  Vec x = z;
  Vec lambda(0);

  auto add_active = [&](Index row, const Vec& n, double d) {
    act.rows.push_back(row);
    act.normals.conservativeResize(dim, act.normals.cols() + 1);
    act.normals.col(act.normals.cols() - 1) = n;
    act.rhs.conservativeResize(act.rhs.size() + 1);
    act.rhs(act.rhs.size() - 1) = d;
  };
  auto drop_active = [&](Index pos) {
    const Index k = static_cast<Index>(act.rows.size());
    for (Index j = pos; j + 1 < k; ++j) {
      act.rows[static_cast<size_t>(j)] = act.rows[static_cast<size_t>(j + 1)];
      act.normals.col(j) = act.normals.col(j + 1);
      act.rhs(j) = act.rhs(j + 1);
    }
    act.rows.pop_back();
    act.normals.conservativeResize(dim, k - 1);
    act.rhs.conservativeResize(k - 1);
  };
  auto trace = [&]() {
    std::ostringstream os;
    os << "active set:";
    for (Index i : act.rows) os << ' ' << i;
    return os.str();
  };

  const int max_outer = static_cast<int>(4 * (p + q) + 16);
  for (int outer = 0; outer < max_outer; ++outer) {
    // Most violated constraint; equalities count with either sign.
    Index cand = -1;
    double worst = kViolTol * std::max(1.0, z.norm());
    double sign = 1.0;
    for (Index i = 0; i < p + q; ++i) {
      bool already = false;
      for (Index r : act.rows) already = already || (r == i);
      if (already) continue;
      const double resid = normal_of(i).dot(x) - rhs_of(i);
      const double v = is_eq(i) ? std::abs(resid) : resid;
      if (v > worst) {
        worst = v;
        cand = i;
        sign = (is_eq(i) && resid < 0) ? -1.0 : 1.0;
      }
    }
    if (cand < 0) {
      ProjectionResult res;
      res.status = ProjStatus::Optimal;
      res.x = x;
      res.active = act.rows;
      res.lambda = lambda;
      return res;
    }

    const Vec n = sign * normal_of(cand);
    const double d = sign * rhs_of(cand);
    double lam_cand = 0.0;

    const int max_inner = static_cast<int>(2 * (p + q) + 8);
    bool added = false;
    for (int inner = 0; inner < max_inner; ++inner) {
      // Decompose n against the active normals.
      Vec r(act.rows.size());
      Vec w = n;
      if (!act.rows.empty()) {
        const Mat gram = act.normals.transpose() * act.normals;
        r = gram.ldlt().solve(act.normals.transpose() * n);
        w = n - act.normals * r;
      }
      const double w2 = w.squaredNorm();
      const double viol = n.dot(x) - d;
      if (viol <= kViolTol * std::max(1.0, std::abs(d))) {
        added = true;  // became satisfied during dual steps
        break;
      }

      // Ratio test over active inequality multipliers.
      double t1 = std::numeric_limits<double>::infinity();
      Index block = -1;
      for (Index k = 0; k < static_cast<Index>(act.rows.size()); ++k) {
        if (is_eq(act.rows[static_cast<size_t>(k)])) continue;
        if (r(k) > kTol) {
          const double t = lambda(k) / r(k);
          if (t < t1) {
            t1 = t;
            block = k;
          }
        }
      }

      if (w2 <= kTol) {
        if (block < 0) {
          ProjectionResult res;
          res.status = ProjStatus::Infeasible;
          res.diagnostic = "inconsistent constraints; " + trace();
          return res;
        }
        lambda -= t1 * r;
        lam_cand += t1;
        drop_active(block);
        Vec lam_new(act.rows.size());
        for (Index k = 0, kk = 0; k < lambda.size(); ++k)
          if (k != block) lam_new(kk++) = lambda(k);
        lambda = lam_new;
        continue;
      }

      const double t2 = viol / w2;
      if (t2 < t1) {
        x -= t2 * w;
        lambda -= t2 * r;
        lam_cand += t2;
        add_active(cand, n, d);
        Vec lam_new(act.rows.size());
        lam_new.head(lambda.size()) = lambda;
        lam_new(lam_new.size() - 1) = lam_cand;
        lambda = lam_new;
        resolve(z, act, x, lambda);
        added = true;
        break;
      }
      x -= t1 * w;
      lambda -= t1 * r;
      lam_cand += t1;
      drop_active(block);
      Vec lam_new(act.rows.size());
      for (Index k = 0, kk = 0; k < lambda.size(); ++k)
        if (k != block) lam_new(kk++) = lambda(k);
      lambda = lam_new;
    }
    if (!added) {
      ProjectionResult res;
      res.status = ProjStatus::Failure;
      res.diagnostic = "inner iteration cap; " + trace();
      return res;
    }
  }

  ProjectionResult res;
  res.status = ProjStatus::Failure;
  res.diagnostic = "outer iteration cap; " + trace();
  return res;
}

}  // namespace stab
