#ifndef STAB_TESTS_INSTANCE_GEN_HPP
#define STAB_TESTS_INSTANCE_GEN_HPP

// Randomized polyhedral problem generator for the acceptance suites.  The
// reference point is valid by construction: the slack recipe keeps
// F(xbar) in C with a known active set, the multiplier is assembled from
// active normals, and the objective gradient is solved for stationarity.

#include <optional>

#include "stab/rng.hpp"
#include "support/builders.hpp"

namespace stab::testing {

struct GenOptions {
  Index max_n = 6;
  Index max_m = 6;
  Index max_rows = 8;
  bool force_full_row_rank_affine = false;  // affine F with rank(JF) = m <= n
  bool allow_quadratic_f_components = true;
  double eq_row_prob = 0.15;
  double active_prob = 0.55;
  double zero_multiplier_prob = 0.3;
  double negative_curvature_prob = 0.5;
};

struct GeneratedInstance {
  ProblemInstance inst;
  Mat jf;        // Jacobian at xbar
  Mat a;         // polyhedron rows
  Vec c;
  std::vector<Index> eq_rows;
};

inline double grid(Rng& rng, double step, int span) {
  const int k = static_cast<int>(rng.uniform() * (2 * span + 1)) - span;
  return step * k;
}

inline std::optional<GeneratedInstance> try_generate(Rng& rng, const GenOptions& opt) {
  const Index n = 1 + static_cast<Index>(rng.uniform() * opt.max_n);
  Index m = 1 + static_cast<Index>(rng.uniform() * opt.max_m);
  if (opt.force_full_row_rank_affine && m > n) m = n;
  const Index rows = 1 + static_cast<Index>(rng.uniform() * opt.max_rows);

  // Polyhedron rows on a coarse grid (degenerate configurations welcome).
  Mat a(rows, m);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < m; ++j) a(i, j) = grid(rng, 0.5, 3);
    if (a.row(i).norm() == 0.0) a(i, static_cast<Index>(rng.uniform() * m)) = 1.0;
  }
  std::vector<Index> eq_rows;
  for (Index i = 0; i < rows; ++i)
    if (rng.uniform() < opt.eq_row_prob) eq_rows.push_back(i);

  Vec ybar(m);
  for (Index j = 0; j < m; ++j) ybar(j) = grid(rng, 0.25, 4);

  Vec c(rows);
  std::vector<Index> active_ineq;
  for (Index i = 0; i < rows; ++i) {
    const bool is_eq =
        std::find(eq_rows.begin(), eq_rows.end(), i) != eq_rows.end();
    if (is_eq) {
      c(i) = a.row(i).dot(ybar);
    } else if (rng.uniform() < opt.active_prob) {
      c(i) = a.row(i).dot(ybar);
      active_ineq.push_back(i);
    } else {
      c(i) = a.row(i).dot(ybar) + 0.2 + rng.uniform();
    }
  }

  // Multiplier from active normals.
  Vec ystar = Vec::Zero(m);
  for (Index i : active_ineq) {
    const double mu = rng.uniform() < opt.zero_multiplier_prob ? 0.0
                                                               : 0.1 + rng.uniform();
    ystar += mu * a.row(i).transpose();
  }
  for (Index i : eq_rows) ystar += grid(rng, 0.5, 2) * a.row(i).transpose();

  Vec xbar(n);
  for (Index j = 0; j < n; ++j) xbar(j) = grid(rng, 0.25, 4);

  // F components: affine (optionally full row rank) or mildly quadratic.
  Mat jf(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) jf(i, j) = grid(rng, 0.5, 3);
    if (jf.row(i).norm() == 0.0) jf(i, static_cast<Index>(rng.uniform() * n)) = 1.0;
  }
  if (opt.force_full_row_rank_affine && numerical_rank(jf) < m) return std::nullopt;

  std::vector<std::string> big_f;
  for (Index i = 0; i < m; ++i) {
    const bool quad = opt.allow_quadratic_f_components &&
                      !opt.force_full_row_rank_affine && rng.uniform() < 0.4;
    if (!quad) {
      big_f.push_back(affine_component(ybar(i), jf.row(i).transpose(), xbar));
    } else {
      Mat q(n, n);
      for (Index r = 0; r < n; ++r)
        for (Index s = r; s < n; ++s) q(r, s) = q(s, r) = grid(rng, 0.5, 2);
      big_f.push_back(quadratic_component(ybar(i), jf.row(i).transpose(), q, xbar));
    }
  }

  Mat h(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index s = r; s < n; ++s) h(r, s) = h(s, r) = grid(rng, 0.5, 3);
  if (rng.uniform() > opt.negative_curvature_prob) {
    // Push toward positive definiteness for a stability-friendly share.
    h += (1.0 + 2.0 * rng.uniform()) * Mat::Identity(n, n);
  }

  GSpec g = GSpec::polyhedral(a, c, eq_rows);
  const std::string f_text =
      quadratic_objective(h, xbar, Mat(jf.transpose()) * ystar);
  try {
    ProblemInstance inst = make_instance(n, m, f_text, big_f, std::move(g), xbar, ystar);
    Mat jf_at = inst.jacobian_big_f(xbar);
    return GeneratedInstance{std::move(inst), std::move(jf_at), a, c, eq_rows};
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

inline GeneratedInstance generate(Rng& rng, const GenOptions& opt = {}) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto g = try_generate(rng, opt);
    if (g) return std::move(*g);
  }
  throw std::runtime_error("instance generator failed 200 attempts in a row");
}

}  // namespace stab::testing

#endif  // STAB_TESTS_INSTANCE_GEN_HPP
