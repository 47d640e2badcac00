#include <doctest.h>

#include <set>

#include "stab/polyhedral.hpp"
#include "stab/rng.hpp"
#include "support/builders.hpp"

using namespace stab;
using testing::mat;
using testing::vec;

namespace {

PolyhedronH quadrant_neg(Index m) {
  PolyhedronH c;
  c.a = Mat::Identity(m, m);
  c.c = Vec::Zero(m);
  return c;
}

}  // namespace

TEST_CASE("tangent cones of the negative quadrant") {
  PolyhedronH c = quadrant_neg(2);
  SUBCASE("one active row") {
    PolyCone t = tangent_cone(c, vec({0, -1}));
    CHECK(t.eq.rows() == 0);
    REQUIRE(t.ineq.rows() == 1);
    CHECK((t.ineq.row(0).transpose() - vec({1, 0})).norm() == 0.0);
  }
  SUBCASE("both rows active") {
    PolyCone t = tangent_cone(c, vec({0, 0}));
    CHECK(t.ineq.rows() == 2);
  }
  SUBCASE("hyperplane") {
    PolyhedronH h;
    h.a = mat({{1, 0}});
    h.c = vec({0});
    h.eq_rows = {0};
    PolyCone t = tangent_cone(h, vec({0, 3}));
    CHECK(t.eq.rows() == 1);
    CHECK(t.ineq.rows() == 0);
  }
  CHECK_THROWS_AS(tangent_cone(c, vec({1, 1})), ValidationError);
}

TEST_CASE("critical cones") {
  PolyhedronH c = quadrant_neg(1);
  SUBCASE("zero normal keeps the tangent cone") {
    PolyCone k = critical_cone(c, vec({0}), vec({0}));
    const auto faces = enumerate_faces(k);
    CHECK(faces.size() == 2);  // {0} and R_-
  }
  SUBCASE("strict complementarity pins the cone to the origin") {
    PolyCone k = critical_cone(c, vec({0}), vec({1}));
    const auto faces = enumerate_faces(k);
    REQUIRE(faces.size() == 1);
    CHECK(faces[0].span_basis.cols() == 0);
  }
  SUBCASE("normal-cone precondition is enforced") {
    CHECK_THROWS_AS(critical_cone(c, vec({0}), vec({-1})), ValidationError);
    CHECK_THROWS_AS(critical_cone(c, vec({-1}), vec({1})), ValidationError);
  }
  SUBCASE("2-D hand computation") {
    PolyhedronH c2 = quadrant_neg(2);
    PolyCone k = critical_cone(c2, vec({0, 0}), vec({1, 0}));
    // K = {0} x R_-: two faces.
    const auto faces = enumerate_faces(k);
    REQUIRE(faces.size() == 2);
    const Subspace span1 = Subspace::span_cols(faces[0].span_basis);
    const Subspace span2 = Subspace::span_cols(faces[1].span_basis);
    const Subspace e2 = Subspace::span({vec({0, 1})});
    CHECK((subspace_equal(span1, e2) || subspace_equal(span2, e2)));
  }
}

TEST_CASE("face enumeration on hand cones") {
  SUBCASE("halfline R_-") {
    PolyCone k{Mat(0, 1), mat({{1.0}})};
    const auto faces = enumerate_faces(k);
    REQUIRE(faces.size() == 2);
    CHECK(faces[0].active_set.empty());        // K itself first (lexicographic)
    CHECK(faces[0].span_basis.cols() == 1);
    CHECK(faces[1].active_set == std::vector<Index>{0});
    CHECK(faces[1].span_basis.cols() == 0);
  }
  SUBCASE("origin cone") {
    PolyCone k{Mat(0, 1), mat({{1.0}, {-1.0}})};
    const auto faces = enumerate_faces(k);
    REQUIRE(faces.size() == 1);
    CHECK(faces[0].span_basis.cols() == 0);
  }
  SUBCASE("negative quadrant has 4 faces") {
    PolyCone k{Mat(0, 2), mat({{1, 0}, {0, 1}})};
    CHECK(enumerate_faces(k).size() == 4);
  }
  SUBCASE("face count of R^k_- is 2^k") {
    for (Index m = 1; m <= 5; ++m) {
      PolyCone k{Mat(0, m), Mat::Identity(m, m)};
      CHECK(enumerate_faces(k).size() == (size_t{1} << m));
    }
  }
  SUBCASE("duplicate rows do not create duplicate faces") {
    PolyCone k{Mat(0, 1), mat({{1.0}, {2.0}})};
    CHECK(enumerate_faces(k).size() == 2);
  }
  SUBCASE("cap is enforced") {
    PolyCone k{Mat(0, 1), Mat::Ones(21, 1)};
    CHECK_THROWS_AS(enumerate_faces(k), CapExceededError);
  }
}

TEST_CASE("relative interior certificates are strict off the active set") {
  PolyCone k{Mat(0, 2), mat({{1, 0}, {0, 1}})};
  for (const Face& f : enumerate_faces(k)) {
    for (Index i = 0; i < k.ineq.rows(); ++i) {
      const double v = k.ineq.row(i).dot(f.rel_interior);
      const bool active = std::find(f.active_set.begin(), f.active_set.end(), i) !=
                          f.active_set.end();
      if (active)
        CHECK(std::abs(v) <= 1e-9);
      else
        CHECK(v <= -1.0 + 1e-9);
    }
  }
}

TEST_CASE("lineality space equals the minimal face span") {
  SUBCASE("hand cases") {
    CHECK(lineality_space({Mat(0, 1), mat({{1.0}})}).dim() == 0);
    PolyCone hyper{mat({{1, 0}}), Mat(0, 2)};
    Subspace lin = lineality_space(hyper);
    CHECK(lin.dim() == 1);
    CHECK(lin.contains(vec({0, 1})));
    CHECK(lineality_space({Mat(0, 2), mat({{1, 0}, {0, 1}})}).dim() == 0);
  }
  SUBCASE("random cones") {
    Rng rng(43);
    for (int trial = 0; trial < 25; ++trial) {
      const Index m = 1 + static_cast<Index>(rng.uniform() * 3);
      const Index rows = 1 + static_cast<Index>(rng.uniform() * 4);
      Mat g(rows, m);
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < m; ++j)
          g(i, j) = 0.5 * (static_cast<int>(rng.uniform() * 7) - 3);
      PolyCone k{Mat(0, m), g};
      const FaceLattice lat = enumerate_face_lattice(k);
      const Face& minimal = lat.faces[static_cast<size_t>(lat.minimal_face)];
      CHECK(subspace_equal(Subspace::span_cols(minimal.span_basis),
                           lineality_space(k)));
      for (const Face& f : lat.faces)
        CHECK(f.span_basis.cols() >= minimal.span_basis.cols());
    }
  }
}

TEST_CASE("nondegeneracy examples") {
  SUBCASE("surjective Jacobian") {
    PolyhedronH c = quadrant_neg(2);
    CHECK(nondegeneracy(Mat::Identity(2, 2), c, vec({0, 0})).ok);
  }
  SUBCASE("thin Jacobian against an active halfspace") {
    PolyhedronH c;
    c.a = mat({{0, 1}});
    c.c = vec({0});
    NondegeneracyResult r = nondegeneracy(mat({{1}, {0}}), c, vec({0, 0}));
    CHECK_FALSE(r.ok);
    CHECK(std::abs(std::abs(r.certificate(1)) - 1.0) <= 1e-12);
  }
  SUBCASE("equality row keeps lineality small") {
    PolyhedronH c;
    c.a = mat({{0, 1}});
    c.c = vec({0});
    c.eq_rows = {0};
    // lin T = R x {0}; rge JF = R x {0}: combined rank 1 -> degenerate.
    CHECK_FALSE(nondegeneracy(mat({{1}, {0}}), c, vec({0, 0})).ok);
  }
}

TEST_CASE("coderivative pieces of the halfline, frozen from the definition") {
  // gph of the normal-cone map of R_- near (0,0) is the union of the two
  // axes; its limiting normal cone at the origin is
  // ({0} x R) u (R x {0}) u (R_+ x R_-), so the coderivative graph pieces
  // are R x {0}, {0} x R, and R_+ x R_+ in (v, v*) coordinates.  By face
  // pair: ({0},{0}) -> {0} x R, (K,K) -> R x {0}, and the mixed pair
  // (K,{0}) -> the quadrant piece with v in F1-F2 = R_- and v* in
  // (F2-F1)polar = R_-.
  PolyCone k{Mat(0, 1), mat({{1.0}})};
  const FaceLattice lat = enumerate_face_lattice(k);
  const auto pieces = coderivative_face_pairs(lat);
  REQUIRE(pieces.size() == 3);

  int n_diag_zero = 0, n_diag_full = 0, n_mixed = 0;
  for (const auto& piece : pieces) {
    if (piece.f1 == piece.f2) {
      const Index dim =
          lat.faces[static_cast<size_t>(piece.f1)].span_basis.cols();
      if (dim == 0) {
        // {0} x R.
        CHECK(piece.d1_contains(vec({0.0})));
        CHECK_FALSE(piece.d1_contains(vec({1.0})));
        CHECK(piece.d2_contains(vec({5.0})));
        CHECK(piece.d2_contains(vec({-5.0})));
        ++n_diag_zero;
      } else {
        // R x {0}.
        CHECK(piece.d1_contains(vec({-2.0})));
        CHECK(piece.d1_contains(vec({2.0})));
        CHECK_FALSE(piece.d2_contains(vec({1.0})));
        CHECK(piece.d2_contains(vec({0.0})));
        ++n_diag_full;
      }
    } else {
      // v in R_-, v* in R_-.
      CHECK(piece.d1_contains(vec({-1.0})));
      CHECK_FALSE(piece.d1_contains(vec({1.0})));
      CHECK(piece.d2_contains(vec({-1.0})));
      CHECK_FALSE(piece.d2_contains(vec({1.0})));
      ++n_mixed;
    }
  }
  CHECK(n_diag_zero == 1);
  CHECK(n_diag_full == 1);
  CHECK(n_mixed == 1);
}

TEST_CASE("face pair counts and the SC-derivative inclusion") {
  SUBCASE("origin cone has a single pair") {
    PolyCone k{Mat(0, 1), mat({{1.0}, {-1.0}})};
    CHECK(coderivative_face_pairs(enumerate_face_lattice(k)).size() == 1);
  }
  SUBCASE("negative quadrant has 9 inclusion-ordered pairs") {
    PolyCone k{Mat(0, 2), mat({{1, 0}, {0, 1}})};
    CHECK(coderivative_face_pairs(enumerate_face_lattice(k)).size() == 9);
  }
  SUBCASE("diagonal pairs realize the SC subspaces (membership sampling)") {
    Rng rng(47);
    PolyCone k{Mat(0, 2), mat({{1, 1}, {1, -1}})};
    const FaceLattice lat = enumerate_face_lattice(k);
    const auto pieces = coderivative_face_pairs(lat);
    for (size_t fi = 0; fi < lat.faces.size(); ++fi) {
      const Mat& span = lat.faces[fi].span_basis;
      const Mat proj = span.cols() > 0 ? Mat(span * span.transpose()) : Mat::Zero(2, 2);
      for (int s = 0; s < 20; ++s) {
        const Vec v = proj * rng.normal_vec(2);
        const Vec vstar = (Mat::Identity(2, 2) - proj) * rng.normal_vec(2);
        bool inside_some_pair = false;
        for (const auto& piece : pieces)
          if (piece.d1_contains(v, 1e-7) && piece.d2_contains(vstar, 1e-7))
            inside_some_pair = true;
        CHECK(inside_some_pair);
      }
    }
  }
}
