#include "stab/problem.hpp"

#include <cmath>

#include "stab/lp.hpp"

namespace stab {

ProblemInstance::ProblemInstance(Index n, Index m, Expr f, std::vector<Expr> big_f,
                                 GSpec g, Vec xbar, Vec ybar_star)
    : n_(n),
      m_(m),
      f_(std::move(f)),
      big_f_(std::move(big_f)),
      g_(std::move(g)),
      xbar_(std::move(xbar)),
      ybar_star_(std::move(ybar_star)) {
  if (n_ <= 0 || m_ <= 0) throw ValidationError("instance: n and m must be positive");
  if (static_cast<Index>(big_f_.size()) != m_)
    throw ValidationError("instance: F must have m components");
  if (g_.dim() != m_) throw ValidationError("instance: g dimension differs from m");
  if (xbar_.size() != n_ || ybar_star_.size() != m_)
    throw ValidationError("instance: reference point dimensions are wrong");

  ybar_ = eval_big_f(xbar_);
  const Mat jf = jacobian_big_f(xbar_);
  xbar_star_ = jf.transpose() * ybar_star_;

  const Vec stat = f_.eval2(xbar_).grad + xbar_star_;
  if (stat.norm() > tol::validation)
    throw ValidationError("instance: grad_x L(xbar, ybar_star) = " +
                          std::to_string(stat.norm()) + " exceeds 1e-8");
  if (!g_.in_subdifferential(ybar_, ybar_star_, tol::validation))
    throw ValidationError("instance: ybar_star is not a subgradient of g at F(xbar)");
}

Vec ProblemInstance::eval_big_f(const Vec& x) const {
  Vec out(m_);
  for (Index i = 0; i < m_; ++i) out(i) = big_f_[static_cast<size_t>(i)].value(x);
  return out;
}

Mat ProblemInstance::jacobian_big_f(const Vec& x) const {
  Mat jf(m_, n_);
  for (Index i = 0; i < m_; ++i)
    jf.row(i) = big_f_[static_cast<size_t>(i)].eval2(x).grad.transpose();
  return jf;
}

double ProblemInstance::perturbed_objective(const Vec& x, const Vec& astar,
                                            const Vec& b) const {
  const double gv = g_.value(eval_big_f(x) + b);
  if (gv == kPlusInfinity) return kPlusInfinity;
  return f_.value(x) - astar.dot(x) + gv;
}

Mat lagrangian_hessian(const ProblemInstance& inst, const Vec& x, const Vec& ystar) {
  Mat h = inst.f().eval2(x).hess;
  for (Index i = 0; i < inst.m(); ++i)
    h += ystar(i) * inst.big_f()[static_cast<size_t>(i)].eval2(x).hess;
  return 0.5 * (h + h.transpose());
}

Mat hessian_yf(const ProblemInstance& inst, const Vec& x, const Vec& ystar) {
  Mat h = Mat::Zero(inst.n(), inst.n());
  for (Index i = 0; i < inst.m(); ++i)
    h += ystar(i) * inst.big_f()[static_cast<size_t>(i)].eval2(x).hess;
  return 0.5 * (h + h.transpose());
}

Vec kkt_residual(const ProblemInstance& inst, const Vec& x, const Vec& ystar,
                 const Vec& astar, const Vec& b) {
  Vec r(inst.n() + inst.m());
  r.head(inst.n()) =
      inst.f().eval2(x).grad + inst.jacobian_big_f(x).transpose() * ystar - astar;
  const Vec u = inst.eval_big_f(x) + b;
  r.tail(inst.m()) = u - inst.g().prox(u + ystar);
  return r;
}

namespace {

// Affine description of the subdifferential of g at u: the set
// {map t + offset : rows on t hold}.  `feasible` is false when u is
// outside dom g.
struct SubdiffDesc {
  bool feasible = true;
  Mat map;
  Vec offset;
  Mat a_eq;
  Vec b_eq;
  Mat a_in;
  Vec b_in;
  std::vector<bool> nonneg;
  std::string note;
};

void append_eq(SubdiffDesc& d, const Vec& row, double rhs) {
  d.a_eq.conservativeResize(d.a_eq.rows() + 1, Eigen::NoChange);
  d.a_eq.row(d.a_eq.rows() - 1) = row.transpose();
  d.b_eq.conservativeResize(d.b_eq.size() + 1);
  d.b_eq(d.b_eq.size() - 1) = rhs;
}

void append_in(SubdiffDesc& d, const Vec& row, double rhs) {
  d.a_in.conservativeResize(d.a_in.rows() + 1, Eigen::NoChange);
  d.a_in.row(d.a_in.rows() - 1) = row.transpose();
  d.b_in.conservativeResize(d.b_in.size() + 1);
  d.b_in(d.b_in.size() - 1) = rhs;
}

// 1-D interval subdifferential rows on coordinate i of t.
bool interval_subdiff_rows(SubdiffDesc& d, Index dim_t, Index i, double lo, double hi,
                           double u) {
  const double at = tol::active;
  if (u < lo - 1e-8 || u > hi + 1e-8) return false;
  const bool at_lo = std::isfinite(lo) && std::abs(u - lo) <= at;
  const bool at_hi = std::isfinite(hi) && std::abs(u - hi) <= at;
  const Vec e = Vec::Unit(dim_t, i);
  if (at_lo && at_hi) return true;                    // y*_i free
  if (at_lo) append_in(d, e, 0.0);                    // y*_i <= 0
  else if (at_hi) append_in(d, -e, 0.0);              // y*_i >= 0
  else append_eq(d, e, 0.0);                          // interior: y*_i = 0
  return true;
}

SubdiffDesc subdiff_description(const GSpec& g, const Vec& u) {
  const Index m = g.dim();
  SubdiffDesc d;
  switch (g.kind()) {
    case GSpec::Kind::Quadratic: {
      d.map = Mat(m, 0);
      d.offset = g.quad_q() * u + g.quad_c();
      d.a_eq = Mat(0, 0);
      d.b_eq = Vec(0);
      d.a_in = Mat(0, 0);
      d.b_in = Vec(0);
      return d;
    }
    case GSpec::Kind::Polyhedral: {
      const PolyhedronH& poly = g.polyhedron();
      if (!contains_point(poly, u, 1e-8)) {
        d.feasible = false;
        return d;
      }
      const std::vector<Index> act = active_rows(poly, u);
      const Index k = static_cast<Index>(act.size());
      d.map = Mat(m, k);
      d.nonneg.assign(static_cast<size_t>(k), false);
      for (Index j = 0; j < k; ++j) {
        d.map.col(j) = poly.a.row(act[static_cast<size_t>(j)]).transpose();
        if (!poly.is_eq_row(act[static_cast<size_t>(j)]))
          d.nonneg[static_cast<size_t>(j)] = true;
      }
      d.offset = Vec::Zero(m);
      d.a_eq = Mat(0, k);
      d.b_eq = Vec(0);
      d.a_in = Mat(0, k);
      d.b_in = Vec(0);
      return d;
    }
    default:
      break;
  }
  // Componentwise variants: y* = t with rows per coordinate.
  d.map = Mat::Identity(m, m);
  d.offset = Vec::Zero(m);
  d.a_eq = Mat(0, m);
  d.b_eq = Vec(0);
  d.a_in = Mat(0, m);
  d.b_in = Vec(0);
  for (Index i = 0; i < m; ++i) {
    const GSpec& part = g.kind() == GSpec::Kind::Separable
                            ? g.parts()[static_cast<size_t>(i)]
                            : g;
    switch (part.kind()) {
      case GSpec::Kind::L1: {
        const double w = g.kind() == GSpec::Kind::Separable ? part.l1_weights()(0)
                                                            : g.l1_weights()(i);
        const Vec e = Vec::Unit(m, i);
        if (u(i) > tol::active) append_eq(d, e, w);
        else if (u(i) < -tol::active) append_eq(d, e, -w);
        else {
          append_in(d, e, w);
          append_in(d, -e, w);
        }
        break;
      }
      case GSpec::Kind::Box: {
        const double lo = g.kind() == GSpec::Kind::Separable ? part.box_lower()(0)
                                                             : g.box_lower()(i);
        const double hi = g.kind() == GSpec::Kind::Separable ? part.box_upper()(0)
                                                             : g.box_upper()(i);
        if (!interval_subdiff_rows(d, m, i, lo, hi, u(i))) d.feasible = false;
        break;
      }
      case GSpec::Kind::Quadratic:
        append_eq(d, Vec::Unit(m, i), part.quad_q()(0, 0) * u(i) + part.quad_c()(0));
        break;
      case GSpec::Kind::Polyhedral: {
        auto sub = part.as_polyhedron();
        double lo = -kPlusInfinity, hi = kPlusInfinity;
        for (Index r = 0; r < sub->a.rows(); ++r) {
          const double a = sub->a(r, 0), c = sub->c(r);
          if (sub->is_eq_row(r)) {
            if (a != 0) {
              lo = std::max(lo, c / a);
              hi = std::min(hi, c / a);
            }
          } else if (a > 0) {
            hi = std::min(hi, c / a);
          } else if (a < 0) {
            lo = std::max(lo, c / a);
          }
        }
        // Normal cone of an interval, scaled: the generator direction is
        // still +-e_i, so interval rows apply.
        if (!interval_subdiff_rows(d, m, i, lo, hi, u(i))) d.feasible = false;
        break;
      }
      case GSpec::Kind::Separable:
        throw ValidationError("nested separable g is not supported");
    }
    if (!d.feasible) return d;
  }
  return d;
}

}  // namespace

MultiplierSetResult multiplier_set(const ProblemInstance& inst, const Vec& x,
                                   const Vec& xstar, const Vec& b) {
  MultiplierSetResult out;
  const Vec u = inst.eval_big_f(x) + b;
  const Mat jf = inst.jacobian_big_f(x);
  SubdiffDesc d = subdiff_description(inst.g(), u);
  if (!d.feasible) {
    out.note = "F(x)+b is outside dom g";
    return out;
  }
  const Index nt = d.map.cols();
  const double scale = std::max(1.0, xstar.norm());

  if (nt == 0) {
    // Singleton subdifferential.
    if ((jf.transpose() * d.offset - xstar).norm() > 1e-7 * scale) {
      out.note = "the unique subgradient does not match x*";
      return out;
    }
    out.feasible = true;
    out.element = d.offset;
    out.unique = true;
    out.bounded = true;
    return out;
  }

  // Stationarity rows: JF' (map t + offset) = x*.
  Mat a_eq(d.a_eq.rows() + inst.n(), nt);
  Vec b_eq(d.b_eq.size() + inst.n());
  if (d.a_eq.rows() > 0) {
    a_eq.topRows(d.a_eq.rows()) = d.a_eq;
    b_eq.head(d.b_eq.size()) = d.b_eq;
  }
  a_eq.bottomRows(inst.n()) = jf.transpose() * d.map;
  b_eq.tail(inst.n()) = xstar - jf.transpose() * d.offset;

  LpProblem lp;
  lp.c = Vec::Zero(nt);
  lp.a_eq = a_eq;
  lp.b_eq = b_eq;
  lp.a_in = d.a_in;
  lp.b_in = d.b_in;
  lp.nonneg = d.nonneg;

  Vec t0;
  if (!lp_feasible(lp, &t0)) {
    out.note = "M(x,x*,b) is empty";
    return out;
  }
  out.feasible = true;
  out.element = d.map * t0 + d.offset;

  // Coordinate ranges of y* decide uniqueness and boundedness.
  bool unique = true;
  bool bounded = true;
  const double range_tol = 1e-7 * std::max(1.0, out.element.norm());
  for (Index j = 0; j < inst.m() && (unique || bounded); ++j) {
    double lo = 0, hi = 0;
    for (int sign : {+1, -1}) {
      LpProblem range = lp;
      range.c = static_cast<double>(sign) * d.map.row(j).transpose();
      LpResult r = solve_lp(range);
      if (r.status == LpStatus::Unbounded) {
        bounded = false;
        unique = false;
        break;
      }
      if (r.status != LpStatus::Optimal)
        throw InternalError("multiplier_set: range LP failed unexpectedly");
      (sign > 0 ? lo : hi) = sign * r.objective;
    }
    if (!bounded) break;
    if (hi - lo > range_tol) unique = false;
  }
  out.unique = unique;
  out.bounded = bounded;
  return out;
}

}  // namespace stab
