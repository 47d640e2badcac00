#include "stab/polyhedral.hpp"

#include <algorithm>

#include "stab/lp.hpp"
#include "stab/qp.hpp"

namespace stab {

bool PolyhedronH::is_eq_row(Index i) const {
  return std::find(eq_rows.begin(), eq_rows.end(), i) != eq_rows.end();
}

bool contains_point(const PolyhedronH& c, const Vec& y, double tolerance) {
  for (Index i = 0; i < c.a.rows(); ++i) {
    const double r = c.a.row(i).dot(y) - c.c(i);
    if (c.is_eq_row(i) ? std::abs(r) > tolerance : r > tolerance) return false;
  }
  return true;
}

std::vector<Index> active_rows(const PolyhedronH& c, const Vec& y, double act_tol) {
  std::vector<Index> act;
  for (Index i = 0; i < c.a.rows(); ++i)
    if (std::abs(c.a.row(i).dot(y) - c.c(i)) <= act_tol) act.push_back(i);
  return act;
}

PolyCone tangent_cone(const PolyhedronH& c, const Vec& y) {
  if (!contains_point(c, y, 1e-9))
    throw ValidationError("tangent_cone: point is not in the polyhedron");
  const Index m = c.dim();
  std::vector<Index> eq, in;
  for (Index i : active_rows(c, y))
    (c.is_eq_row(i) ? eq : in).push_back(i);
  // Inactive equality rows cannot occur for a member point.
  Mat e(static_cast<Index>(eq.size()), m), g(static_cast<Index>(in.size()), m);
  for (size_t r = 0; r < eq.size(); ++r) e.row(static_cast<Index>(r)) = c.a.row(eq[r]);
  for (size_t r = 0; r < in.size(); ++r) g.row(static_cast<Index>(r)) = c.a.row(in[r]);
  return {std::move(e), std::move(g)};
}

PolyCone critical_cone(const PolyhedronH& c, const Vec& y, const Vec& ystar) {
  // y* in N_C(y) iff proj_C(y + y*) = y.
  Mat a_eq(static_cast<Index>(c.eq_rows.size()), c.dim());
  Vec b_eq(static_cast<Index>(c.eq_rows.size()));
  std::vector<Index> in_rows;
  for (Index i = 0; i < c.a.rows(); ++i)
    if (!c.is_eq_row(i)) in_rows.push_back(i);
  Mat a_in(static_cast<Index>(in_rows.size()), c.dim());
  Vec b_in(static_cast<Index>(in_rows.size()));
  for (size_t r = 0; r < c.eq_rows.size(); ++r) {
    a_eq.row(static_cast<Index>(r)) = c.a.row(c.eq_rows[r]);
    b_eq(static_cast<Index>(r)) = c.c(c.eq_rows[r]);
  }
  for (size_t r = 0; r < in_rows.size(); ++r) {
    a_in.row(static_cast<Index>(r)) = c.a.row(in_rows[r]);
    b_in(static_cast<Index>(r)) = c.c(in_rows[r]);
  }
  ProjectionResult proj = project_polyhedron(y + ystar, a_eq, b_eq, a_in, b_in);
  if (proj.status != ProjStatus::Optimal)
    throw InternalError("critical_cone: projection failed: " + proj.diagnostic);
  if ((proj.x - y).norm() > 1e-8 * std::max(1.0, y.norm() + ystar.norm()))
    throw ValidationError("critical_cone: y* is not a normal vector at y");

  PolyCone t = tangent_cone(c, y);
  Mat e(t.eq.rows() + 1, c.dim());
  if (t.eq.rows() > 0) e.topRows(t.eq.rows()) = t.eq;
  e.row(t.eq.rows()) = ystar.transpose();
  return {std::move(e), t.ineq};
}

namespace {

// Relative-interior certificate for the active subset: E v = 0, G_S v = 0,
// G_j v <= -1 off S.
bool relative_interior_point(const PolyCone& k, const std::vector<bool>& in_set,
                             Vec* point) {
  const Index m = k.dim();
  const Index ni = k.ineq.rows();
  Index n_forced = k.eq.rows();
  for (Index i = 0; i < ni; ++i)
    if (in_set[static_cast<size_t>(i)]) ++n_forced;
  Mat a_eq(n_forced, m);
  Index r = 0;
  for (Index i = 0; i < k.eq.rows(); ++i) a_eq.row(r++) = k.eq.row(i);
  Index n_strict = 0;
  for (Index i = 0; i < ni; ++i) {
    if (in_set[static_cast<size_t>(i)])
      a_eq.row(r++) = k.ineq.row(i);
    else
      ++n_strict;
  }
  Mat a_in(n_strict, m);
  Vec b_in = Vec::Constant(n_strict, -1.0);
  r = 0;
  for (Index i = 0; i < ni; ++i)
    if (!in_set[static_cast<size_t>(i)]) a_in.row(r++) = k.ineq.row(i);

  LpProblem lp;
  lp.c = Vec::Zero(m);
  lp.a_eq = std::move(a_eq);
  lp.b_eq = Vec::Zero(n_forced);
  lp.a_in = std::move(a_in);
  lp.b_in = std::move(b_in);
  return lp_feasible(lp, point);
}

Mat face_span(const PolyCone& k, const std::vector<bool>& in_set) {
  const Index m = k.dim();
  Index rows = k.eq.rows();
  for (size_t i = 0; i < in_set.size(); ++i)
    if (in_set[i]) ++rows;
  Mat stacked(rows, m);
  Index r = 0;
  for (Index i = 0; i < k.eq.rows(); ++i) stacked.row(r++) = k.eq.row(i);
  for (Index i = 0; i < k.ineq.rows(); ++i)
    if (in_set[static_cast<size_t>(i)]) stacked.row(r++) = k.ineq.row(i);
  return null_basis(stacked);
}

}  // namespace

std::vector<Face> enumerate_faces(const PolyCone& k, Index face_cap) {
  const Index ni = k.ineq.rows();
  if (ni > face_cap)
    throw CapExceededError("enumerate_faces: " + std::to_string(ni) +
                           " inequality rows exceed the cap of " +
                           std::to_string(face_cap));
  std::vector<Face> faces;
  const uint64_t total = uint64_t{1} << ni;
  for (uint64_t mask = 0; mask < total; ++mask) {
    std::vector<bool> in_set(static_cast<size_t>(ni));
    std::vector<Index> act;
    for (Index i = 0; i < ni; ++i)
      if (mask & (uint64_t{1} << i)) {
        in_set[static_cast<size_t>(i)] = true;
        act.push_back(i);
      }
    Vec point;
    if (!relative_interior_point(k, in_set, &point)) continue;
    Mat span = face_span(k, in_set);
    // Distinct feasible active subsets give distinct faces; the span test
    // is a numerical safety net against scaled duplicate rows.
    bool dup = false;
    for (const Face& f : faces) {
      if (f.span_basis.cols() == span.cols() &&
          subspace_equal(Subspace::span_cols(f.span_basis), Subspace::span_cols(span)))
        dup = true;
    }
    if (dup) continue;
    faces.push_back({std::move(act), std::move(span), std::move(point)});
  }
  std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
    return a.active_set < b.active_set;
  });
  return faces;
}

Subspace lineality_space(const PolyCone& k) {
  Mat stacked(k.eq.rows() + k.ineq.rows(), k.dim());
  if (k.eq.rows() > 0) stacked.topRows(k.eq.rows()) = k.eq;
  if (k.ineq.rows() > 0) stacked.bottomRows(k.ineq.rows()) = k.ineq;
  return Subspace::span_cols(null_basis(stacked));
}

bool FaceLattice::face_contains(Index outer, Index inner) const {
  const auto& ao = faces[static_cast<size_t>(outer)].active_set;
  const auto& ai = faces[static_cast<size_t>(inner)].active_set;
  // Inclusion of faces reverses inclusion of exact active sets.
  return std::includes(ai.begin(), ai.end(), ao.begin(), ao.end());
}

FaceLattice enumerate_face_lattice(const PolyCone& k, Index face_cap) {
  FaceLattice lat;
  lat.faces = enumerate_faces(k, face_cap);
  lat.lineality = lineality_space(k).basis();
  const Index lin_dim = lat.lineality.cols();

  for (size_t i = 0; i < lat.faces.size(); ++i)
    if (lat.faces[i].span_basis.cols() == lin_dim) lat.minimal_face = static_cast<Index>(i);
  if (lat.minimal_face < 0)
    throw InternalError("face lattice: lineality space missing from the faces");

  // Unit ray of each face one dimension above the lineality space.
  std::vector<Vec> face_ray(lat.faces.size());
  for (size_t i = 0; i < lat.faces.size(); ++i) {
    if (lat.faces[i].span_basis.cols() != lin_dim + 1) continue;
    Vec r = lat.faces[i].rel_interior;
    r -= lat.lineality * (lat.lineality.transpose() * r);
    const double nrm = r.norm();
    if (nrm <= 1e-12)
      throw InternalError("face lattice: degenerate ray certificate");
    face_ray[i] = r / nrm;
  }

  lat.rays.resize(lat.faces.size());
  for (size_t i = 0; i < lat.faces.size(); ++i) {
    for (size_t j = 0; j < lat.faces.size(); ++j) {
      if (lat.faces[j].span_basis.cols() != lin_dim + 1) continue;
      if (lat.face_contains(static_cast<Index>(i), static_cast<Index>(j)))
        lat.rays[i].push_back(face_ray[j]);
    }
  }
  return lat;
}

NondegeneracyResult nondegeneracy(const Mat& jf, const PolyhedronH& c, const Vec& y) {
  const Index m = c.dim();
  if (jf.rows() != m) throw ValidationError("nondegeneracy: Jacobian row count mismatch");
  PolyCone t = tangent_cone(c, y);
  const Mat lin = lineality_space(t).basis();
  Mat combined(m, jf.cols() + lin.cols());
  if (jf.cols() > 0) combined.leftCols(jf.cols()) = jf;
  if (lin.cols() > 0) combined.rightCols(lin.cols()) = lin;
  if (numerical_rank(combined) == m) return {true, Vec()};
  // Certificate: unit vector orthogonal to both column spaces.
  const Mat left_null = null_basis(combined.transpose());
  return {false, left_null.col(0)};
}

bool CoderivPiece::d1_contains(const Vec& v, double tolerance) const {
  // v = d1_rays * alpha + d1_lin * beta with alpha >= 0: feasibility LP.
  const Index nr = d1_rays.cols();
  const Index nl = d1_lin.cols();
  LpProblem lp;
  lp.c = Vec::Zero(nr + nl);
  Mat a(v.size(), nr + nl);
  if (nr > 0) a.leftCols(nr) = d1_rays;
  if (nl > 0) a.rightCols(nl) = d1_lin;
  lp.a_eq = std::move(a);
  lp.b_eq = v;
  lp.a_in = Mat(0, nr + nl);
  lp.b_in = Vec(0);
  lp.nonneg.assign(static_cast<size_t>(nr + nl), false);
  for (Index i = 0; i < nr; ++i) lp.nonneg[static_cast<size_t>(i)] = true;
  Vec sol;
  if (!lp_feasible(lp, &sol)) return false;
  Vec recon = Vec::Zero(v.size());
  if (nr > 0) recon += d1_rays * sol.head(nr);
  if (nl > 0) recon += d1_lin * sol.tail(nl);
  return (recon - v).norm() <= std::max(tolerance, 1e-7 * std::max(1.0, v.norm()));
}

bool CoderivPiece::d2_contains(const Vec& vstar, double tolerance) const {
  const double scale = std::max(1.0, vstar.norm());
  for (Index i = 0; i < d2_ge.rows(); ++i)
    if (d2_ge.row(i).dot(vstar) < -tolerance * scale) return false;
  for (Index i = 0; i < d2_le.rows(); ++i)
    if (d2_le.row(i).dot(vstar) > tolerance * scale) return false;
  for (Index i = 0; i < d2_eq.rows(); ++i)
    if (std::abs(d2_eq.row(i).dot(vstar)) > tolerance * scale) return false;
  return true;
}

std::vector<CoderivPiece> coderivative_face_pairs(const FaceLattice& lattice) {
  std::vector<CoderivPiece> pieces;
  const Index m = lattice.lineality.rows();
  const Index nf = static_cast<Index>(lattice.faces.size());
  for (Index i1 = 0; i1 < nf; ++i1) {
    for (Index i2 = 0; i2 < nf; ++i2) {
      if (!lattice.face_contains(i1, i2)) continue;  // need F2 <= F1
      const auto& rays1 = lattice.rays[static_cast<size_t>(i1)];
      const auto& rays2 = lattice.rays[static_cast<size_t>(i2)];
      CoderivPiece piece;
      piece.f1 = i1;
      piece.f2 = i2;
      // F1 - F2 = cone(rays(F1) u -rays(F2)) + lineality.
      piece.d1_rays = Mat(m, static_cast<Index>(rays1.size() + rays2.size()));
      Index col = 0;
      for (const Vec& r : rays1) piece.d1_rays.col(col++) = r;
      for (const Vec& r : rays2) piece.d1_rays.col(col++) = -r;
      piece.d1_lin = lattice.lineality;
      // (F2 - F1)^polar: <r,v*> >= 0 for rays of F1, <= 0 for rays of F2,
      // zero on the lineality space.
      piece.d2_ge = Mat(static_cast<Index>(rays1.size()), m);
      for (size_t r = 0; r < rays1.size(); ++r)
        piece.d2_ge.row(static_cast<Index>(r)) = rays1[r].transpose();
      piece.d2_le = Mat(static_cast<Index>(rays2.size()), m);
      for (size_t r = 0; r < rays2.size(); ++r)
        piece.d2_le.row(static_cast<Index>(r)) = rays2[r].transpose();
      piece.d2_eq = lattice.lineality.transpose();
      pieces.push_back(std::move(piece));
    }
  }
  return pieces;
}

}  // namespace stab
