#include "stab/newton.hpp"

#include <algorithm>
#include <cmath>

namespace stab {

namespace {

constexpr double kDedupTol = 1e-6;

// B-differential element of prox corresponding to an SC pair:
// rge(B, I-B) = rge(P, W) gives B = P (P + W)^{-1}.
Mat prox_jacobian_of_pair(const PWPair& pair) {
  const Index m = pair.p.rows();
  return pair.p * (pair.p + pair.w).partialPivLu().solve(Mat::Identity(m, m));
}

// Finite-difference tangent subspace of gph of the subdifferential at the
// prox point, used only to select among SC pairs.
Subspace fd_tangent(const GSpec& g, const Vec& z) {
  const Index m = g.dim();
  const double h = 1e-6 * std::max(1.0, z.norm());
  Mat b(m, m);
  for (Index j = 0; j < m; ++j) {
    const Vec plus = g.prox(z + h * Vec::Unit(m, j));
    const Vec minus = g.prox(z - h * Vec::Unit(m, j));
    b.col(j) = (plus - minus) / (2.0 * h);
  }
  Mat cols(2 * m, m);
  cols.topRows(m) = b;
  cols.bottomRows(m) = Mat::Identity(m, m) - b;
  return Subspace::span_cols(cols);
}

const PWPair& select_pair(const std::vector<PWPair>& pairs, const GSpec& g,
                          const Vec& z) {
  if (pairs.size() == 1) return pairs.front();
  size_t best = 0;
  try {
    const Subspace target = fd_tangent(g, z);
    double best_d = kPlusInfinity;
    for (size_t k = 0; k < pairs.size(); ++k) {
      const double d = dz_metric(pw_to_subspace(pairs[k]), target);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = k;
      }
    }
  } catch (const std::exception&) {
    best = 0;  // fall back to the first pair
  }
  return pairs[best];
}

}  // namespace

SolveOutcome solve_perturbed(const ProblemInstance& inst, const Vec& astar,
                             const Vec& b, const Vec& x0, const Vec& y0,
                             const SolveOptions& opts) {
  const Index n = inst.n(), m = inst.m();
  if (astar.size() != n || b.size() != m || x0.size() != n || y0.size() != m)
    throw ValidationError("solve_perturbed: dimension mismatch");
  if (!astar.allFinite() || !b.allFinite() || !x0.allFinite() || !y0.allFinite())
    throw ValidationError("solve_perturbed: nonfinite input");

  Vec x = x0, y = y0;
  Vec r = kkt_residual(inst, x, y, astar, b);
  double rnorm = r.norm();

  SolveOutcome out;
  for (int it = 0; it < opts.max_iter; ++it) {
    if (rnorm <= opts.tolerance) {
      out.ok = true;
      out.point = {x, y, kkt_residual(inst, x, y, astar, b).norm()};
      out.iterations = it;
      return out;
    }

    const Vec z = inst.eval_big_f(x) + b + y;
    const Vec up = inst.g().prox(z);
    const auto pairs = inst.g().sc_derivative(up, z - up);
    const Mat bmat = prox_jacobian_of_pair(select_pair(pairs, inst.g(), z));

    const Mat jf = inst.jacobian_big_f(x);
    Mat newton(n + m, n + m);
    newton.topLeftCorner(n, n) = lagrangian_hessian(inst, x, y);
    newton.topRightCorner(n, m) = jf.transpose();
    newton.bottomLeftCorner(m, n) = (Mat::Identity(m, m) - bmat) * jf;
    newton.bottomRightCorner(m, m) = -bmat;

    Eigen::ColPivHouseholderQR<Mat> qr(newton);
    Vec step;
    if (qr.rank() < n + m) {
      // One regularized retry with a small diagonal shift.
      Mat shifted = newton + 1e-8 * Mat::Identity(n + m, n + m);
      Eigen::ColPivHouseholderQR<Mat> qr2(shifted);
      if (qr2.rank() < n + m) {
        out.message = "singular Newton matrix after regularization";
        out.iterations = it;
        return out;
      }
      step = qr2.solve(-r);
    } else {
      step = qr.solve(-r);
    }

    double t = 1.0;
    Vec best_x = x + step.head(n), best_y = y + step.tail(m);
    double best_norm = kkt_residual(inst, best_x, best_y, astar, b).norm();
    if (opts.damping) {
      int halvings = 0;
      double cur = best_norm;
      Vec cx = best_x, cy = best_y;
      while (cur > (1.0 - 1e-4 * t) * rnorm && halvings < 30) {
        t *= 0.5;
        ++halvings;
        cx = x + t * step.head(n);
        cy = y + t * step.tail(m);
        cur = kkt_residual(inst, cx, cy, astar, b).norm();
        if (cur < best_norm) {
          best_norm = cur;
          best_x = cx;
          best_y = cy;
        }
      }
    }
    x = best_x;
    y = best_y;
    r = kkt_residual(inst, x, y, astar, b);
    rnorm = r.norm();
  }
  if (rnorm <= opts.tolerance) {
    out.ok = true;
    out.point = {x, y, rnorm};
    out.iterations = opts.max_iter;
    return out;
  }
  out.message = "max_iter exceeded (residual " + std::to_string(rnorm) + ")";
  out.iterations = opts.max_iter;
  out.point = {x, y, rnorm};
  return out;
}

std::vector<KKTPoint> find_all_local(const ProblemInstance& inst, const Vec& astar,
                                     const Vec& b,
                                     const std::vector<std::pair<Vec, Vec>>& starts,
                                     const SolveOptions& opts) {
  if (starts.empty()) throw ValidationError("find_all_local: empty start list");
  std::vector<KKTPoint> found;
  for (const auto& [x0, y0] : starts) {
    SolveOutcome res = solve_perturbed(inst, astar, b, x0, y0, opts);
    if (!res.ok) continue;
    bool duplicate = false;
    for (const KKTPoint& p : found) {
      const double d = std::sqrt((p.x - res.point.x).squaredNorm() +
                                 (p.ystar - res.point.ystar).squaredNorm());
      if (d <= kDedupTol) duplicate = true;
    }
    if (!duplicate) found.push_back(res.point);
  }
  std::sort(found.begin(), found.end(), [&](const KKTPoint& a, const KKTPoint& c) {
    const double da = std::sqrt((a.x - inst.xbar()).squaredNorm() +
                                (a.ystar - inst.ybar_star()).squaredNorm());
    const double dc = std::sqrt((c.x - inst.xbar()).squaredNorm() +
                                (c.ystar - inst.ybar_star()).squaredNorm());
    return da < dc;
  });
  return found;
}

}  // namespace stab
