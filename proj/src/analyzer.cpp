#include "stab/analyzer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "stab/lp.hpp"

namespace stab {

namespace {

struct EigTest {
  double min_eig;
  Vec direction;  // in the original coordinates
  double scale;   // largest |eigenvalue|, at least 1
};

// Minimum eigenvalue of Z' M Z with the minimizing direction mapped back.
EigTest projected_min_eig(const Mat& m, const Mat& z) {
  if (z.cols() == 0) return {kPlusInfinity, Vec(), 1.0};
  Eigen::SelfAdjointEigenSolver<Mat> es(z.transpose() * m * z);
  const Vec evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  Vec dir = z * es.eigenvectors().col(0);
  dir.normalize();
  return {evals(0), dir, scale};
}

Mat stacked_jf_p(const Mat& jf, const Mat& p) {
  Mat s(jf.cols() + p.rows(), p.cols());
  s.topRows(jf.cols()) = jf.transpose();
  s.bottomRows(p.rows()) = p;
  return s;
}

}  // namespace

std::string to_string(TriState t) {
  switch (t) {
    case TriState::Yes: return "yes";
    case TriState::No: return "no";
    case TriState::NotComputed: return "not-computed";
  }
  return "?";
}

CheckResult check_soqc(const ProblemInstance& inst) {
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const auto pairs = inst.g().sc_derivative(inst.ybar(), inst.ybar_star());
  for (size_t k = 0; k < pairs.size(); ++k) {
    // v* with JF' v* = 0 and v* in (rge P)^perp, i.e. P v* = 0.
    const Mat kernel = null_basis(stacked_jf_p(jf, pairs[k].p));
    if (kernel.cols() > 0) {
      Certificate cert;
      cert.vstar = kernel.col(0);
      std::ostringstream os;
      os << "SOQC violated by SC pair " << k << ": nonzero v* in ker JF' with P v* = 0";
      cert.description = os.str();
      return {false, cert};
    }
  }
  return {true, std::nullopt};
}

bool check_soqc_polyhedral_crosscheck(const ProblemInstance& inst) {
  auto poly = inst.g().as_polyhedron();
  if (!poly)
    throw ValidationError("soqc crosscheck: g is not a polyhedral indicator");
  return nondegeneracy(inst.jacobian_big_f(inst.xbar()), *poly, inst.ybar()).ok;
}

CheckResult check_bcq(const ProblemInstance& inst) {
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const ConeGenerators cone = inst.g().normal_cone_dom(inst.ybar());
  if (cone.is_trivial()) return {true, std::nullopt};
  const Index m = inst.m();
  const Index nr = cone.nonneg.cols();
  const Index nf = cone.free_.cols();

  // Nonzero v* = R mu + S lam with JF' v* = 0?  Scan coordinates of v*
  // pinned to +-1; any feasible pin certifies a violation.
  Mat gens(m, nr + nf);
  if (nr > 0) gens.leftCols(nr) = cone.nonneg;
  if (nf > 0) gens.rightCols(nf) = cone.free_;
  for (Index coord = 0; coord < m; ++coord) {
    for (int sign : {+1, -1}) {
      LpProblem lp;
      lp.c = Vec::Zero(nr + nf);
      lp.a_eq = Mat(inst.n() + 1, nr + nf);
      lp.a_eq.topRows(inst.n()) = jf.transpose() * gens;
      lp.a_eq.row(inst.n()) = gens.row(coord);
      lp.b_eq = Vec::Zero(inst.n() + 1);
      lp.b_eq(inst.n()) = static_cast<double>(sign);
      lp.a_in = Mat(0, nr + nf);
      lp.b_in = Vec(0);
      lp.nonneg.assign(static_cast<size_t>(nr + nf), false);
      for (Index i = 0; i < nr; ++i) lp.nonneg[static_cast<size_t>(i)] = true;
      Vec sol;
      if (lp_feasible(lp, &sol)) {
        Certificate cert;
        cert.vstar = gens * sol;
        cert.description = "BCQ violated: nonzero normal of dom g in ker JF'";
        return {false, cert};
      }
    }
  }
  return {true, std::nullopt};
}

namespace {

CheckResult curvature_check(const ProblemInstance& inst, bool strict) {
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat hl = lagrangian_hessian(inst, inst.xbar(), inst.ybar_star());
  const Mat identity = Mat::Identity(inst.m(), inst.m());
  const auto pairs = inst.g().sc_derivative(inst.ybar(), inst.ybar_star());
  for (size_t k = 0; k < pairs.size(); ++k) {
    const Mat z = null_basis((identity - pairs[k].p) * jf);
    const Mat quad = hl + jf.transpose() * pairs[k].w * jf;
    const EigTest eig = projected_min_eig(quad, z);
    const double bound = strict ? tol::psd * eig.scale : -tol::psd * eig.scale;
    const bool pass = eig.min_eig == kPlusInfinity || eig.min_eig > bound;
    if (!pass) {
      Certificate cert;
      cert.u = eig.direction;
      std::ostringstream os;
      os << (strict ? "strong" : "necessary")
         << " variational sufficiency fails on SC pair " << k
         << ": quadratic value " << eig.min_eig << " along the certificate direction";
      cert.description = os.str();
      return {false, cert};
    }
  }
  return {true, std::nullopt};
}

}  // namespace

CheckResult check_necessary_vs(const ProblemInstance& inst) {
  return curvature_check(inst, false);
}

CheckResult check_strong_vs(const ProblemInstance& inst) {
  return curvature_check(inst, true);
}

bool check_strong_vs_polyhedral_crosscheck(const ProblemInstance& inst) {
  auto poly = inst.g().as_polyhedron();
  if (!poly)
    throw ValidationError("strong VS crosscheck: g is not a polyhedral indicator");
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat hl = lagrangian_hessian(inst, inst.xbar(), inst.ybar_star());
  const PolyCone k = critical_cone(*poly, inst.ybar(), inst.ybar_star());
  // span(K - K) is the span of the largest face, cut out by the implicit
  // equality rows; identical to the largest-face span from the lattice.
  const FaceLattice lat = enumerate_face_lattice(k);
  Index largest = 0;
  for (size_t i = 0; i < lat.faces.size(); ++i)
    if (lat.faces[i].span_basis.cols() >
        lat.faces[static_cast<size_t>(largest)].span_basis.cols())
      largest = static_cast<Index>(i);
  const Mat span = lat.faces[static_cast<size_t>(largest)].span_basis;
  const Mat proj = span * span.transpose();
  const Mat z = null_basis((Mat::Identity(inst.m(), inst.m()) - proj) * jf);
  const EigTest eig = projected_min_eig(hl, z);
  return eig.min_eig == kPlusInfinity || eig.min_eig > tol::psd * eig.scale;
}

SingletonRegularity check_singleton_regularity(const ProblemInstance& inst) {
  SingletonRegularity out;
  const auto pairs = inst.g().sc_derivative(inst.ybar(), inst.ybar_star());
  if (pairs.size() != 1) return out;
  out.applicable = true;

  const Index n = inst.n(), m = inst.m();
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat hl = lagrangian_hessian(inst, inst.xbar(), inst.ybar_star());
  const Subspace lbar = pw_to_subspace(pairs[0]);

  // V = {(u,v*) : (JF u, v*) in Lbar}; regular iff the stationarity rows
  // have trivial kernel on V.
  Mat lift(2 * m, n + m);
  lift.setZero();
  lift.topLeftCorner(m, n) = jf;
  lift.bottomRightCorner(m, m) = Mat::Identity(m, m);
  const Mat membership = (Mat::Identity(2 * m, 2 * m) - lbar.proj()) * lift;
  const Mat v_basis = null_basis(membership);

  Mat stationarity(n, n + m);
  stationarity.leftCols(n) = hl;
  stationarity.rightCols(m) = jf.transpose();
  const Mat reduced = stationarity * v_basis;
  if (v_basis.cols() == 0 || numerical_rank(reduced) == v_basis.cols()) {
    out.regular = true;
    return out;
  }
  const Mat kernel = null_basis(reduced);
  const Vec bad = v_basis * kernel.col(0);
  Certificate cert;
  cert.u = bad.head(n);
  cert.vstar = bad.tail(m);
  cert.description = "singleton regularity fails: nonzero (u,v*) solves the bordered system";
  out.certificate = cert;
  return out;
}

Mat localization_derivative(const ProblemInstance& inst) {
  const SingletonRegularity reg = check_singleton_regularity(inst);
  if (!reg.applicable || !reg.regular)
    throw ValidationError("localization_derivative: singleton regularity does not hold");
  const auto pairs = inst.g().sc_derivative(inst.ybar(), inst.ybar_star());
  const Mat& p = pairs[0].p;
  const Mat& w = pairs[0].w;
  const Index n = inst.n(), m = inst.m();
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat hl = lagrangian_hessian(inst, inst.xbar(), inst.ybar_star());

  // Unknowns (u,p): hess_L u + JF' W p = u*,  JF u - P p = -v;  then v* = W p.
  Mat sys(n + m, n + m);
  sys.topLeftCorner(n, n) = hl;
  sys.topRightCorner(n, m) = jf.transpose() * w;
  sys.bottomLeftCorner(m, n) = jf;
  sys.bottomRightCorner(m, m) = -p;
  Eigen::ColPivHouseholderQR<Mat> qr(sys);
  if (qr.rank() < n + m)
    throw InternalError("localization_derivative: system singular despite regularity");

  Mat input = Mat::Identity(n + m, n + m);
  input.bottomRightCorner(m, m) = -Mat::Identity(m, m);
  const Mat up = qr.solve(input);
  Mat output(n + m, n + m);
  output.topRows(n) = up.topRows(n);
  output.bottomRows(m) = w * up.bottomRows(m);

  // Re-substitution guard on both defining relations.
  const Mat u_blk = output.topRows(n);
  const Mat v_blk = output.bottomRows(m);
  Mat resid1 = hl * u_blk + jf.transpose() * v_blk;
  resid1.leftCols(n) -= Mat::Identity(n, n);
  if (resid1.norm() > 1e-9)
    throw InternalError("localization_derivative: first relation residual too large");
  return output;
}

CheckResult mordukhovich_polyhedral(const ProblemInstance& inst) {
  auto poly = inst.g().as_polyhedron();
  if (!poly)
    throw ValidationError("mordukhovich_polyhedral: g is not a polyhedral indicator");
  const Index n = inst.n(), m = inst.m();
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat hl = lagrangian_hessian(inst, inst.xbar(), inst.ybar_star());
  const PolyCone k = critical_cone(*poly, inst.ybar(), inst.ybar_star());
  const FaceLattice lat = enumerate_face_lattice(k);
  const auto pieces = coderivative_face_pairs(lat);

  for (const CoderivPiece& piece : pieces) {
    if (piece.f1 == piece.f2) {
      // Subspace piece: S x S^perp with S = span of the face.
      const Mat span = lat.faces[static_cast<size_t>(piece.f1)].span_basis;
      const Mat proj = span * span.transpose();
      Mat sys(n + m + m, n + m);
      sys.setZero();
      sys.topLeftCorner(n, n) = hl;
      sys.topRightCorner(n, m) = jf.transpose();
      sys.block(n, 0, m, n) = (Mat::Identity(m, m) - proj) * jf;
      sys.block(n + m, n, m, m) = proj;
      const Mat kernel = null_basis(sys);
      if (kernel.cols() > 0) {
        Certificate cert;
        cert.u = kernel.col(0).head(n);
        cert.vstar = kernel.col(0).tail(m);
        std::ostringstream os;
        os << "Mordukhovich criterion violated on diagonal face pair (" << piece.f1
           << "," << piece.f2 << ")";
        cert.description = os.str();
        return {false, cert};
      }
      continue;
    }

    // General piece: nonzero (u,v*) with Hu + JF'v* = 0, JFu in D1,
    // v* in D2.  Scan coordinates of (u,v*) pinned to +-1.
    const Index nr = piece.d1_rays.cols();
    const Index nl = piece.d1_lin.cols();
    const Index nvars = n + m + nr + nl;
    const Index d2g = piece.d2_ge.rows(), d2l = piece.d2_le.rows(),
                d2e = piece.d2_eq.rows();

    Mat a_eq(n + m + d2e, nvars);
    a_eq.setZero();
    a_eq.topLeftCorner(n, n) = hl;
    a_eq.block(0, n, n, m) = jf.transpose();
    a_eq.block(n, 0, m, n) = jf;
    if (nr > 0) a_eq.block(n, n + m, m, nr) = -piece.d1_rays;
    if (nl > 0) a_eq.block(n, n + m + nr, m, nl) = -piece.d1_lin;
    if (d2e > 0) a_eq.block(n + m, n, d2e, m) = piece.d2_eq;
    Vec b_eq = Vec::Zero(n + m + d2e);

    Mat a_in(d2g + d2l, nvars);
    a_in.setZero();
    if (d2g > 0) a_in.block(0, n, d2g, m) = -piece.d2_ge;
    if (d2l > 0) a_in.block(d2g, n, d2l, m) = piece.d2_le;
    Vec b_in = Vec::Zero(d2g + d2l);

    std::vector<bool> nonneg(static_cast<size_t>(nvars), false);
    for (Index i = 0; i < nr; ++i) nonneg[static_cast<size_t>(n + m + i)] = true;

    for (Index coord = 0; coord < n + m; ++coord) {
      for (int sign : {+1, -1}) {
        LpProblem lp;
        lp.c = Vec::Zero(nvars);
        lp.a_eq = Mat(a_eq.rows() + 1, nvars);
        lp.a_eq.topRows(a_eq.rows()) = a_eq;
        lp.a_eq.row(a_eq.rows()).setZero();
        lp.a_eq(a_eq.rows(), coord) = 1.0;
        lp.b_eq = Vec::Zero(b_eq.size() + 1);
        lp.b_eq(b_eq.size()) = static_cast<double>(sign);
        lp.a_in = a_in;
        lp.b_in = b_in;
        lp.nonneg = nonneg;
        Vec sol;
        if (lp_feasible(lp, &sol)) {
          Certificate cert;
          cert.u = sol.head(n);
          cert.vstar = sol.segment(n, m);
          std::ostringstream os;
          os << "Mordukhovich criterion violated on face pair (" << piece.f1 << ","
             << piece.f2 << ")";
          cert.description = os.str();
          return {false, cert};
        }
      }
    }
  }
  return {true, std::nullopt};
}

bool chain_rule_certified(const ProblemInstance& inst) {
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  if (numerical_rank(jf) == inst.m()) return true;
  const auto pairs = inst.g().sc_derivative(inst.ybar(), inst.ybar_star());
  return pairs.size() == 1 && check_soqc(inst).ok;
}

std::vector<Subspace> sc_chain_rule(const ProblemInstance& inst) {
  if (!chain_rule_certified(inst))
    throw ValidationError("sc_chain_rule: chain rule not certified "
                          "(needs full row rank JF, or SOQC with a singleton SC derivative)");
  const Index n = inst.n(), m = inst.m();
  const Mat jf = inst.jacobian_big_f(inst.xbar());
  const Mat h = hessian_yf(inst, inst.xbar(), inst.ybar_star());
  std::vector<Subspace> out;
  for (const PWPair& pair : inst.g().sc_derivative(inst.ybar(), inst.ybar_star())) {
    const Subspace s = pw_to_subspace(pair);
    // V = {(u,v*) : (JF u, v*) in S}, then image under
    // (u,v*) -> (u, H u + JF' v*).
    Mat lift(2 * m, n + m);
    lift.setZero();
    lift.topLeftCorner(m, n) = jf;
    lift.bottomRightCorner(m, m) = Mat::Identity(m, m);
    const Mat v_basis = null_basis((Mat::Identity(2 * m, 2 * m) - s.proj()) * lift);
    Mat image(2 * n, v_basis.cols());
    image.topRows(n) = v_basis.topRows(n);
    image.bottomRows(n) = h * v_basis.topRows(n) + jf.transpose() * v_basis.bottomRows(m);
    Subspace l = Subspace::span_cols(image);
    if (l.dim() != n)
      throw InternalError("sc_chain_rule: image subspace is not n-dimensional");
    out.push_back(std::move(l));
  }
  return out;
}

TriState check_tilt_stability(const ProblemInstance& inst) {
  if (!chain_rule_certified(inst)) return TriState::NotComputed;
  // Under the q-subderivative chain rule the tilt criterion coincides with
  // the strong variational sufficiency quadratic.
  return check_strong_vs(inst).ok ? TriState::Yes : TriState::No;
}

namespace {

void merge_verdict(std::optional<bool>& current, bool value, const std::string& route,
                   std::vector<std::string>& routes_used,
                   std::vector<std::string>& conflicts) {
  if (current.has_value() && *current != value) {
    conflicts.push_back(route);
    return;
  }
  current = value;
  routes_used.push_back(route);
}

}  // namespace

StabilityReport analyze(const ProblemInstance& inst) {
  StabilityReport rep;
  rep.soqc = check_soqc(inst);
  rep.bcq = check_bcq(inst);
  rep.necessary_vs = check_necessary_vs(inst);
  rep.strong_vs = check_strong_vs(inst);

  const bool polyhedral = inst.g().as_polyhedron().has_value();
  if (polyhedral) {
    const bool nd = check_soqc_polyhedral_crosscheck(inst);
    if (nd != rep.soqc.ok)
      throw InconsistencyError("SOQC and the nondegeneracy rank test disagree");
    const bool ssosc = check_strong_vs_polyhedral_crosscheck(inst);
    if (ssosc != rep.strong_vs.ok)
      throw InconsistencyError("strong VS and the projected SSOSC test disagree");
    rep.notes.push_back("polyhedral crosschecks passed (nondegeneracy, SSOSC)");
  }

  const SingletonRegularity reg = check_singleton_regularity(inst);
  rep.sc_singleton = reg.applicable;
  if (reg.applicable) rep.singleton_regular = reg.regular;

  // Aubin verdict along every applicable route; certified routes must agree.
  std::optional<bool> aubin;
  std::vector<std::string> routes, conflicts;
  const bool both = rep.soqc.ok && rep.strong_vs.ok;
  if (both)
    merge_verdict(aubin, true, "SOQC + strong VS imply the Aubin property", routes,
                  conflicts);
  if (!rep.soqc.ok) {
    merge_verdict(aubin, false, "Aubin fails because SOQC fails", routes, conflicts);
    if (rep.soqc.certificate) rep.aubin_certificate = rep.soqc.certificate;
  }
  if (rep.necessary_vs.ok && !both) {
    merge_verdict(aubin, false,
                  "necessary VS holds but SOQC + strong VS fail, so Aubin fails",
                  routes, conflicts);
    if (!rep.aubin_certificate && rep.strong_vs.certificate)
      rep.aubin_certificate = rep.strong_vs.certificate;
  }
  if (reg.applicable) {
    merge_verdict(aubin, reg.regular, "singleton SC-derivative regularity route",
                  routes, conflicts);
    if (!reg.regular && reg.certificate && !rep.aubin_certificate)
      rep.aubin_certificate = reg.certificate;
  }
  if (polyhedral) {
    CheckResult mord = mordukhovich_polyhedral(inst);
    rep.mordukhovich_polyhedral = mord.ok;
    merge_verdict(aubin, mord.ok, "polyhedral Mordukhovich criterion", routes,
                  conflicts);
    if (!mord.ok && mord.certificate && !rep.aubin_certificate)
      rep.aubin_certificate = mord.certificate;
  }
  if (!conflicts.empty()) {
    std::ostringstream os;
    os << "route inconsistency on the Aubin verdict: ";
    for (const auto& c : conflicts) os << "[" << c << "] ";
    os << "against ";
    for (const auto& r : routes) os << "[" << r << "] ";
    throw InconsistencyError(os.str());
  }
  rep.mordukhovich_aubin =
      aubin.has_value() ? (*aubin ? TriState::Yes : TriState::No) : TriState::NotComputed;
  for (const auto& r : routes) rep.notes.push_back("aubin: " + r);

  // Single-valued Lipschitz localization.
  std::optional<bool> sll;
  std::vector<std::string> sll_routes, sll_conflicts;
  if (reg.applicable)
    merge_verdict(sll, reg.regular, "singleton route (Aubin iff SLL)", sll_routes,
                  sll_conflicts);
  if (both)
    merge_verdict(sll, true, "SOQC + strong VS imply SLL", sll_routes, sll_conflicts);
  if (rep.necessary_vs.ok && !both)
    merge_verdict(sll, false, "necessary VS holds but SOQC + strong VS fail",
                  sll_routes, sll_conflicts);
  if (aubin.has_value() && !*aubin)
    merge_verdict(sll, false, "no SLL without the Aubin property", sll_routes,
                  sll_conflicts);
  if (!sll_conflicts.empty())
    throw InconsistencyError("route inconsistency on the SLL verdict");
  rep.sll = sll.has_value() ? (*sll ? TriState::Yes : TriState::No)
                            : TriState::NotComputed;
  for (const auto& r : sll_routes) rep.notes.push_back("sll: " + r);

  // Full primal-dual stability.
  const bool chain = chain_rule_certified(inst);
  if (both) {
    rep.full_stability = TriState::Yes;
    rep.notes.push_back("full stability: SOQC + strong VS");
  } else if (chain && rep.bcq.ok) {
    rep.full_stability = TriState::No;
    rep.notes.push_back(
        "full stability: fails, equivalent to SOQC + strong VS under the certified "
        "chain rule and BCQ");
  }

  rep.tilt_stable = check_tilt_stability(inst);
  if (rep.tilt_stable != TriState::NotComputed)
    rep.notes.push_back("tilt: via the q-subderivative chain rule");

  if (reg.applicable && reg.regular) {
    rep.localization_jacobian = localization_derivative(inst);
    rep.notes.push_back("localization derivative attached (singleton route)");
  }
  return rep;
}

}  // namespace stab
