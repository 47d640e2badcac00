#ifndef STAB_POLYHEDRAL_HPP
#define STAB_POLYHEDRAL_HPP

#include <vector>

#include "stab/subspace.hpp"

namespace stab {

/// Polyhedron {y : A_i y = c_i (i in eq_rows), A_i y <= c_i otherwise}.
struct PolyhedronH {
  Mat a;
  Vec c;
  std::vector<Index> eq_rows;

  Index dim() const { return a.cols(); }
  bool is_eq_row(Index i) const;
};

/// Polyhedral cone {v : E v = 0, G v <= 0}.
struct PolyCone {
  Mat eq;    // E
  Mat ineq;  // G

  Index dim() const { return eq.cols() > 0 ? eq.cols() : ineq.cols(); }
};

/// Face of a polyhedral cone, identified by the exact set of inequality
/// rows active on all of it.  rel_interior satisfies the remaining
/// inequalities strictly.
struct Face {
  std::vector<Index> active_set;
  Mat span_basis;  // orthonormal basis of F - F
  Vec rel_interior;
};

/// All faces of a cone plus the data needed for coderivative pieces:
/// the lineality space and the extreme rays of every face.
struct FaceLattice {
  std::vector<Face> faces;               // sorted lexicographically by active set
  Index minimal_face = -1;               // index of the lineality-space face
  Mat lineality;                         // orthonormal columns
  std::vector<std::vector<Vec>> rays;    // unit rays per face, lineality removed

  /// faces[inner] is a face of faces[outer].
  bool face_contains(Index outer, Index inner) const;
};

/// One piece of the limiting-coderivative graph of the normal-cone map,
/// attached to a face pair F2 <= F1 of the critical cone: the set
/// {(v,v*) : v in F1-F2, v* in (F2-F1)^polar}.
struct CoderivPiece {
  Index f1 = -1, f2 = -1;
  Mat d1_rays;  // columns; v in F1-F2 iff v = d1_rays*alpha + d1_lin*beta, alpha >= 0
  Mat d1_lin;   // free generator columns (lineality)
  // v* membership: d2_ge v* >= 0 rowwise, d2_le v* <= 0, d2_eq v* = 0.
  Mat d2_ge, d2_le, d2_eq;

  bool d1_contains(const Vec& v, double tolerance = 1e-9) const;
  bool d2_contains(const Vec& vstar, double tolerance = 1e-9) const;
};

bool contains_point(const PolyhedronH& c, const Vec& y, double tolerance = 1e-9);
std::vector<Index> active_rows(const PolyhedronH& c, const Vec& y,
                               double act_tol = tol::active);

/// Tangent cone at a point of C: active constraints become homogeneous.
PolyCone tangent_cone(const PolyhedronH& c, const Vec& y);

/// Critical cone K_C(y,y*): the tangent cone intersected with the
/// hyperplane orthogonal to y*.  Requires y* in N_C(y), checked by
/// projecting y + y* back onto C.
PolyCone critical_cone(const PolyhedronH& c, const Vec& y, const Vec& ystar);

/// All distinct faces; every candidate active subset is certified by a
/// relative-interior LP.  Errors when the cone has more than `face_cap`
/// inequality rows.
std::vector<Face> enumerate_faces(const PolyCone& k, Index face_cap = 20);

FaceLattice enumerate_face_lattice(const PolyCone& k, Index face_cap = 20);

/// {v : Ev = 0, Gv = 0}.
Subspace lineality_space(const PolyCone& k);

struct NondegeneracyResult {
  bool ok;
  Vec certificate;  // unit vector orthogonal to rge(JF) + lin T_C(y) on failure
};

/// rge(JF) + lin T_C(y) = R^m, as a rank test.
NondegeneracyResult nondegeneracy(const Mat& jf, const PolyhedronH& c, const Vec& y);

/// All inclusion-ordered face pairs of the lattice with their
/// coderivative-graph cones.
std::vector<CoderivPiece> coderivative_face_pairs(const FaceLattice& lattice);

}  // namespace stab

#endif  // STAB_POLYHEDRAL_HPP
