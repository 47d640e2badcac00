#include "stab/gspec.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "stab/qp.hpp"

namespace stab {

double GeneralizedQuadraticForm::value(const Vec& u) const {
  if (!in_domain(u)) return kPlusInfinity;
  return 0.5 * u.dot(pair.w * u);
}

bool GeneralizedQuadraticForm::in_domain(const Vec& u, double tolerance) const {
  return (u - pair.p * u).norm() <= tolerance * std::max(1.0, u.norm());
}

GSpec GSpec::polyhedral(Mat a, Vec c, std::vector<Index> eq_rows) {
  if (a.rows() != c.size())
    throw ValidationError("polyhedral g: row count of A and c differ");
  std::sort(eq_rows.begin(), eq_rows.end());
  for (Index i : eq_rows)
    if (i < 0 || i >= a.rows())
      throw ValidationError("polyhedral g: equality row index out of range");
  GSpec g;
  g.kind_ = Kind::Polyhedral;
  g.dim_ = a.cols();
  g.poly_ = {std::move(a), std::move(c), std::move(eq_rows)};
  // Certify nonemptiness by projecting the origin.
  if (g.prox(Vec::Zero(g.dim_)).size() != g.dim_)
    throw InternalError("polyhedral g: feasibility solve returned garbage");
  return g;
}

GSpec GSpec::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size())
    throw ValidationError("box g: bound dimensions differ");
  for (Index i = 0; i < lower.size(); ++i)
    if (!(lower(i) <= upper(i)))
      throw ValidationError("box g: requires l <= u componentwise");
  GSpec g;
  g.kind_ = Kind::Box;
  g.dim_ = lower.size();
  g.l_ = std::move(lower);
  g.u_ = std::move(upper);
  return g;
}

GSpec GSpec::l1(Vec weights) {
  for (Index i = 0; i < weights.size(); ++i)
    if (!(weights(i) > 0))
      throw ValidationError("l1 g: weights must be positive");
  GSpec g;
  g.kind_ = Kind::L1;
  g.dim_ = weights.size();
  g.w_ = std::move(weights);
  return g;
}

GSpec GSpec::quadratic(Mat q, Vec c) {
  if (q.rows() != q.cols() || q.rows() != c.size())
    throw ValidationError("quadratic g: dimension mismatch");
  if ((q - q.transpose()).norm() > 1e-10 * std::max(1.0, q.norm()))
    throw ValidationError("quadratic g: Q must be symmetric");
  Mat qs = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(qs, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError("quadratic g: Q must be positive semidefinite");
  GSpec g;
  g.kind_ = Kind::Quadratic;
  g.dim_ = c.size();
  g.q_ = std::move(qs);
  g.c_ = std::move(c);
  return g;
}

GSpec GSpec::separable(std::vector<GSpec> parts) {
  GSpec g;
  g.kind_ = Kind::Separable;
  g.dim_ = 0;
  for (const GSpec& part : parts) {
    if (part.dim() != 1)
      throw ValidationError("separable g: every part must be one-dimensional");
    if (part.kind() == Kind::Separable)
      throw ValidationError("separable g: nesting is not supported");
    g.dim_ += 1;
  }
  g.parts_ = std::move(parts);
  return g;
}

double GSpec::value(const Vec& y) const {
  if (y.size() != dim_) throw ValidationError("g.value: dimension mismatch");
  switch (kind_) {
    case Kind::Polyhedral:
      return contains_point(poly_, y, 1e-8) ? 0.0 : kPlusInfinity;
    case Kind::Box:
      for (Index i = 0; i < dim_; ++i)
        if (y(i) < l_(i) - 1e-8 || y(i) > u_(i) + 1e-8) return kPlusInfinity;
      return 0.0;
    case Kind::L1:
      return w_.dot(y.cwiseAbs());
    case Kind::Quadratic:
      return 0.5 * y.dot(q_ * y) + c_.dot(y);
    case Kind::Separable: {
      double v = 0.0;
      for (Index i = 0; i < dim_; ++i) {
        const double pv = parts_[static_cast<size_t>(i)].value(y.segment(i, 1));
        if (pv == kPlusInfinity) return kPlusInfinity;
        v += pv;
      }
      return v;
    }
  }
  throw InternalError("unreachable g kind");
}

Vec GSpec::prox(const Vec& z) const {
  if (z.size() != dim_) throw ValidationError("prox: dimension mismatch");
  switch (kind_) {
    case Kind::Polyhedral: {
      const auto& eq_rows = poly_.eq_rows;
      std::vector<Index> in_rows;
      for (Index i = 0; i < poly_.a.rows(); ++i)
        if (!poly_.is_eq_row(i)) in_rows.push_back(i);
      Mat a_eq(static_cast<Index>(eq_rows.size()), dim_);
      Vec b_eq(static_cast<Index>(eq_rows.size()));
      Mat a_in(static_cast<Index>(in_rows.size()), dim_);
      Vec b_in(static_cast<Index>(in_rows.size()));
      for (size_t r = 0; r < eq_rows.size(); ++r) {
        a_eq.row(static_cast<Index>(r)) = poly_.a.row(eq_rows[r]);
        b_eq(static_cast<Index>(r)) = poly_.c(eq_rows[r]);
      }
      for (size_t r = 0; r < in_rows.size(); ++r) {
        a_in.row(static_cast<Index>(r)) = poly_.a.row(in_rows[r]);
        b_in(static_cast<Index>(r)) = poly_.c(in_rows[r]);
      }
      ProjectionResult res = project_polyhedron(z, a_eq, b_eq, a_in, b_in);
      if (res.status == ProjStatus::Infeasible)
        throw ValidationError("polyhedral g: the set C is empty");
      if (res.status != ProjStatus::Optimal)
        throw InternalError("polyhedral prox failed: " + res.diagnostic);
      return res.x;
    }
    case Kind::Box:
      return z.cwiseMax(l_).cwiseMin(u_);
    case Kind::L1: {
      Vec out(dim_);
      for (Index i = 0; i < dim_; ++i) {
        const double shrunk = std::max(std::abs(z(i)) - w_(i), 0.0);
        out(i) = (z(i) >= 0 ? shrunk : -shrunk);
      }
      return out;
    }
    case Kind::Quadratic: {
      Mat m = q_ + Mat::Identity(dim_, dim_);
      return m.ldlt().solve(z - c_);
    }
    case Kind::Separable: {
      Vec out(dim_);
      for (Index i = 0; i < dim_; ++i)
        out(i) = parts_[static_cast<size_t>(i)].prox(z.segment(i, 1))(0);
      return out;
    }
  }
  throw InternalError("unreachable g kind");
}

bool GSpec::in_subdifferential(const Vec& y, const Vec& ystar, double tolerance) const {
  if (y.size() != dim_ || ystar.size() != dim_)
    throw ValidationError("in_subdifferential: dimension mismatch");
  const double scale = std::max(1.0, y.norm() + ystar.norm());
  return (y - prox(y + ystar)).norm() <= tolerance * scale;
}

namespace {

// One-dimensional interval pair sets shared by Box and 1-D polyhedra.
std::vector<std::pair<double, double>> interval_pairs(double lo, double hi, double y,
                                                      double ystar) {
  const double at = tol::active;
  if (hi - lo <= at) return {{0.0, 1.0}};  // K = {0}
  const bool at_lo = std::isfinite(lo) && std::abs(y - lo) <= at;
  const bool at_hi = std::isfinite(hi) && std::abs(y - hi) <= at;
  if (!at_lo && !at_hi) return {{1.0, 0.0}};  // interior, y* = 0
  if (std::abs(ystar) <= at) return {{0.0, 1.0}, {1.0, 0.0}};  // weakly active
  return {{0.0, 1.0}};  // strict complementarity: K = {0}
}

}  // namespace

std::vector<std::pair<double, double>> GSpec::sc_pairs_1d(double y, double ystar) const {
  switch (kind_) {
    case Kind::Box:
      return interval_pairs(l_(0), u_(0), y, ystar);
    case Kind::L1: {
      const double w = w_(0);
      if (std::abs(y) > tol::active) return {{1.0, 0.0}};
      if (std::abs(std::abs(ystar) - w) <= tol::active)
        return {{0.0, 1.0}, {1.0, 0.0}};  // kink of the soft threshold
      return {{0.0, 1.0}};
    }
    case Kind::Quadratic:
      return {{1.0, q_(0, 0)}};
    case Kind::Polyhedral: {
      // A one-dimensional polyhedron is an interval.
      double lo = -kPlusInfinity, hi = kPlusInfinity;
      for (Index i = 0; i < poly_.a.rows(); ++i) {
        const double a = poly_.a(i, 0), c = poly_.c(i);
        if (poly_.is_eq_row(i)) {
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
      return interval_pairs(lo, hi, y, ystar);
    }
    case Kind::Separable:
      break;
  }
  throw InternalError("sc_pairs_1d: unsupported variant");
}

std::vector<PWPair> GSpec::sc_derivative(const Vec& y, const Vec& ystar) const {
  if (!in_subdifferential(y, ystar))
    throw ValidationError("sc_derivative: (y, y*) is not in gph of the subdifferential");
  switch (kind_) {
    case Kind::Quadratic:
      return {PWPair{Mat::Identity(dim_, dim_), q_}};
    case Kind::Polyhedral: {
      const PolyCone k = critical_cone(poly_, y, ystar);
      const std::vector<Face> faces = enumerate_faces(k);
      std::vector<PWPair> pairs;
      const Mat identity = Mat::Identity(dim_, dim_);
      for (const Face& f : faces) {
        const Mat p = f.span_basis * f.span_basis.transpose();
        pairs.push_back(PWPair{p, identity - p});
      }
      return pairs;
    }
    case Kind::Box:
    case Kind::L1:
    case Kind::Separable: {
      std::vector<std::vector<std::pair<double, double>>> per_coord;
      for (Index i = 0; i < dim_; ++i) {
        const GSpec& part =
            kind_ == Kind::Separable ? parts_[static_cast<size_t>(i)] : *this;
        if (kind_ == Kind::Separable)
          per_coord.push_back(part.sc_pairs_1d(y(i), ystar(i)));
        else if (kind_ == Kind::Box)
          per_coord.push_back(interval_pairs(l_(i), u_(i), y(i), ystar(i)));
        else {  // L1
          GSpec one = GSpec::l1(Vec::Constant(1, w_(i)));
          per_coord.push_back(one.sc_pairs_1d(y(i), ystar(i)));
        }
      }
      Index count = 1;
      for (const auto& set : per_coord) {
        count *= static_cast<Index>(set.size());
        if (count > kPairCap)
          throw CapExceededError("sc_derivative: separable pair product exceeds " +
                                 std::to_string(kPairCap));
      }
      std::vector<PWPair> pairs;
      pairs.reserve(static_cast<size_t>(count));
      std::vector<size_t> digit(static_cast<size_t>(dim_), 0);
      for (Index idx = 0; idx < count; ++idx) {
        Mat p = Mat::Zero(dim_, dim_), w = Mat::Zero(dim_, dim_);
        for (Index i = 0; i < dim_; ++i) {
          const auto& pw = per_coord[static_cast<size_t>(i)][digit[static_cast<size_t>(i)]];
          p(i, i) = pw.first;
          w(i, i) = pw.second;
        }
        pairs.push_back(PWPair{std::move(p), std::move(w)});
        // Mixed-radix increment, last coordinate fastest.
        for (Index i = dim_ - 1; i >= 0; --i) {
          auto& d = digit[static_cast<size_t>(i)];
          if (++d < per_coord[static_cast<size_t>(i)].size()) break;
          d = 0;
        }
      }
      return pairs;
    }
  }
  throw InternalError("unreachable g kind");
}

std::vector<GeneralizedQuadraticForm> GSpec::quad_bundle(const Vec& y,
                                                         const Vec& ystar) const {
  std::vector<GeneralizedQuadraticForm> forms;
  for (PWPair& pair : sc_derivative(y, ystar)) forms.push_back({std::move(pair)});
  return forms;
}

double GSpec::q_subderivative(const Vec& y, const Vec& ystar, const Vec& w) const {
  double best = kPlusInfinity;
  for (const PWPair& pair : sc_derivative(y, ystar)) {
    if ((w - pair.p * w).norm() > tol::membership * std::max(1.0, w.norm())) continue;
    best = std::min(best, w.dot(pair.w * w));
  }
  return best;
}

ConeGenerators GSpec::normal_cone_dom(const Vec& y) const {
  ConeGenerators cone;
  cone.ambient = dim_;
  cone.nonneg = Mat(dim_, 0);
  cone.free_ = Mat(dim_, 0);
  auto push = [&](const Vec& gen, bool is_free) {
    Mat& target = is_free ? cone.free_ : cone.nonneg;
    target.conservativeResize(dim_, target.cols() + 1);
    target.col(target.cols() - 1) = gen;
  };
  switch (kind_) {
    case Kind::L1:
    case Kind::Quadratic:
      return cone;  // full domain
    case Kind::Polyhedral: {
      if (!contains_point(poly_, y, 1e-8))
        throw ValidationError("normal_cone_dom: y is outside dom g");
      for (Index i : active_rows(poly_, y))
        push(poly_.a.row(i).transpose(), poly_.is_eq_row(i));
      return cone;
    }
    case Kind::Box: {
      for (Index i = 0; i < dim_; ++i) {
        if (y(i) < l_(i) - 1e-8 || y(i) > u_(i) + 1e-8)
          throw ValidationError("normal_cone_dom: y is outside dom g");
        const bool at_lo = std::isfinite(l_(i)) && std::abs(y(i) - l_(i)) <= tol::active;
        const bool at_hi = std::isfinite(u_(i)) && std::abs(y(i) - u_(i)) <= tol::active;
        if (at_lo && at_hi)
          push(Vec::Unit(dim_, i), true);
        else if (at_lo)
          push(-Vec::Unit(dim_, i), false);
        else if (at_hi)
          push(Vec::Unit(dim_, i), false);
      }
      return cone;
    }
    case Kind::Separable: {
      for (Index i = 0; i < dim_; ++i) {
        ConeGenerators part =
            parts_[static_cast<size_t>(i)].normal_cone_dom(y.segment(i, 1));
        for (Index j = 0; j < part.nonneg.cols(); ++j)
          push(part.nonneg(0, j) * Vec::Unit(dim_, i), false);
        for (Index j = 0; j < part.free_.cols(); ++j)
          push(part.free_(0, j) * Vec::Unit(dim_, i), true);
      }
      return cone;
    }
  }
  throw InternalError("unreachable g kind");
}

std::optional<PolyhedronH> GSpec::as_polyhedron() const {
  switch (kind_) {
    case Kind::Polyhedral:
      return poly_;
    case Kind::Box: {
      std::vector<Vec> rows;
      std::vector<double> rhs;
      std::vector<Index> eq;
      for (Index i = 0; i < dim_; ++i) {
        if (l_(i) == u_(i)) {
          rows.push_back(Vec::Unit(dim_, i));
          rhs.push_back(u_(i));
          eq.push_back(static_cast<Index>(rows.size()) - 1);
          continue;
        }
        if (std::isfinite(u_(i))) {
          rows.push_back(Vec::Unit(dim_, i));
          rhs.push_back(u_(i));
        }
        if (std::isfinite(l_(i))) {
          rows.push_back(-Vec::Unit(dim_, i));
          rhs.push_back(-l_(i));
        }
      }
      PolyhedronH p;
      p.a = Mat(static_cast<Index>(rows.size()), dim_);
      p.c = Vec(static_cast<Index>(rows.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        p.a.row(static_cast<Index>(r)) = rows[r].transpose();
        p.c(static_cast<Index>(r)) = rhs[r];
      }
      p.eq_rows = std::move(eq);
      return p;
    }
    case Kind::Separable: {
      std::vector<Vec> rows;
      std::vector<double> rhs;
      std::vector<Index> eq;
      for (Index i = 0; i < dim_; ++i) {
        auto sub = parts_[static_cast<size_t>(i)].as_polyhedron();
        if (!sub) return std::nullopt;
        for (Index r = 0; r < sub->a.rows(); ++r) {
          rows.push_back(sub->a(r, 0) * Vec::Unit(dim_, i));
          rhs.push_back(sub->c(r));
          if (sub->is_eq_row(r)) eq.push_back(static_cast<Index>(rows.size()) - 1);
        }
      }
      PolyhedronH p;
      p.a = Mat(static_cast<Index>(rows.size()), dim_);
      p.c = Vec(static_cast<Index>(rows.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        p.a.row(static_cast<Index>(r)) = rows[r].transpose();
        p.c(static_cast<Index>(r)) = rhs[r];
      }
      p.eq_rows = std::move(eq);
      return p;
    }
    case Kind::L1:
    case Kind::Quadratic:
      return std::nullopt;
  }
  throw InternalError("unreachable g kind");
}

}  // namespace stab
