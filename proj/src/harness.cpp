#include "stab/harness.hpp"

#include <algorithm>
#include <cmath>

#include "stab/parallel.hpp"
#include "stab/rng.hpp"

namespace stab {

std::vector<std::pair<Vec, Vec>> default_starts(const ProblemInstance& inst,
                                                double spread) {
  std::vector<std::pair<Vec, Vec>> starts;
  starts.emplace_back(inst.xbar(), inst.ybar_star());
  for (Index i = 0; i < inst.n(); ++i) {
    starts.emplace_back(inst.xbar() + spread * Vec::Unit(inst.n(), i), inst.ybar_star());
    starts.emplace_back(inst.xbar() - spread * Vec::Unit(inst.n(), i), inst.ybar_star());
  }
  for (Index j = 0; j < inst.m(); ++j) {
    starts.emplace_back(inst.xbar(), inst.ybar_star() + spread * Vec::Unit(inst.m(), j));
    starts.emplace_back(inst.xbar(), inst.ybar_star() - spread * Vec::Unit(inst.m(), j));
  }
  return starts;
}

LipschitzEstimate estimate_lipschitz(const ProblemInstance& inst, double radius,
                                     int samples, uint64_t seed) {
  if (radius <= 0) throw ValidationError("estimate_lipschitz: radius must be positive");
  if (samples < 2) throw ValidationError("estimate_lipschitz: needs at least 2 samples");
  const Index n = inst.n(), m = inst.m();

  struct Sample {
    Vec astar, b;
    bool ok = false;
    KKTPoint point;
  };
  std::vector<Sample> data(static_cast<size_t>(samples));
  parallel_for(static_cast<size_t>(samples), [&](size_t i) {
    Rng rng(derive_seed(seed, i));
    const Vec pert = rng.in_ball(n + m, radius);
    Sample& s = data[i];
    s.astar = pert.head(n);
    s.b = pert.tail(m);
    SolveOutcome res =
        solve_perturbed(inst, s.astar, s.b, inst.xbar(), inst.ybar_star());
    s.ok = res.ok;
    if (res.ok) s.point = res.point;
  });

  LipschitzEstimate est;
  for (const Sample& s : data)
    if (!s.ok) ++est.failures;
  if (est.failures > samples / 5) {
    est.inconclusive = true;
    return est;
  }

  const double min_dist = radius / 100.0;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!data[i].ok) continue;
    for (size_t j = i + 1; j < data.size(); ++j) {
      if (!data[j].ok) continue;
      const double dp = std::sqrt((data[i].astar - data[j].astar).squaredNorm() +
                                  (data[i].b - data[j].b).squaredNorm());
      if (dp < min_dist) continue;
      const double ds =
          std::sqrt((data[i].point.x - data[j].point.x).squaredNorm() +
                    (data[i].point.ystar - data[j].point.ystar).squaredNorm());
      ++est.pairs_used;
      const double ratio = ds / dp;
      if (ratio > est.kappa_hat) {
        est.kappa_hat = ratio;
        est.pert_a_1 = data[i].astar;
        est.pert_b_1 = data[i].b;
        est.pert_a_2 = data[j].astar;
        est.pert_b_2 = data[j].b;
        est.sol_1 = data[i].point;
        est.sol_2 = data[j].point;
      }
    }
  }
  return est;
}

DerivativeCheck verify_localization_derivative(const ProblemInstance& inst,
                                               const Mat& jacobian,
                                               const std::vector<Vec>& directions) {
  const Index n = inst.n(), m = inst.m();
  if (jacobian.rows() != n + m || jacobian.cols() != n + m)
    throw ValidationError("verify_localization_derivative: jacobian size mismatch");
  std::vector<Vec> dirs = directions;
  if (dirs.empty())
    for (Index k = 0; k < n + m; ++k) dirs.push_back(Vec::Unit(n + m, k));

  const std::vector<double> ladder = {1e-5, 1e-6, 1e-7};
  DerivativeCheck out;
  for (const Vec& dir : dirs) {
    if (dir.size() != n + m)
      throw ValidationError("verify_localization_derivative: direction size mismatch");
    if (dir.norm() == 0.0) {
      out.notes.push_back("zero direction skipped");
      continue;
    }
    const Vec d = dir / dir.norm();
    const Vec predicted = jacobian * d;
    double best = kPlusInfinity;
    for (double h : ladder) {
      auto solve_at = [&](double t) {
        const Vec pert = t * d;
        SolveOutcome res = solve_perturbed(inst, pert.head(n), pert.tail(m),
                                           inst.xbar(), inst.ybar_star());
        if (!res.ok)
          throw InternalError("verify_localization_derivative: solver failed on the stencil");
        Vec joint(n + m);
        joint.head(n) = res.point.x;
        joint.tail(m) = res.point.ystar;
        return joint;
      };
      const Vec fd = (solve_at(h) - solve_at(-h)) / (2.0 * h);
      const double err = (fd - predicted).norm() / std::max(1.0, predicted.norm());
      best = std::min(best, err);
    }
    out.max_rel_error = std::max(out.max_rel_error, best);
  }
  return out;
}

MultiplierProbe probe_multiplier_uniqueness(const ProblemInstance& inst, double radius,
                                            int samples, uint64_t seed) {
  if (radius <= 0)
    throw ValidationError("probe_multiplier_uniqueness: radius must be positive");
  const Index n = inst.n(), m = inst.m();

  struct Sample {
    bool feasible = false;
    bool unique = false;
    Vec x, xstar, b, ystar;
  };
  std::vector<Sample> data(static_cast<size_t>(samples));
  parallel_for(static_cast<size_t>(samples), [&](size_t i) {
    Rng rng(derive_seed(seed, i));
    Sample& s = data[i];
    s.x = inst.xbar() + rng.in_ball(n, radius);
    // Build a graph point of the subdifferential near the reference by the
    // Minty parametrization, then choose b so that (x, x*, b) lies in dom M.
    const Vec z = inst.eval_big_f(s.x) + inst.ybar_star() + rng.in_ball(m, radius);
    const Vec u = inst.g().prox(z);
    const Vec ystar = z - u;
    s.b = u - inst.eval_big_f(s.x);
    s.xstar = inst.jacobian_big_f(s.x).transpose() * ystar;
    MultiplierSetResult res = multiplier_set(inst, s.x, s.xstar, s.b);
    s.feasible = res.feasible;
    if (res.feasible) {
      s.unique = res.unique.value_or(false);
      s.ystar = res.element;
    }
  });

  MultiplierProbe probe;
  probe.samples = samples;
  for (const Sample& s : data) {
    if (!s.feasible) {
      ++probe.infeasible_count;
      continue;
    }
    if (s.unique)
      ++probe.unique_count;
    else
      ++probe.nonunique_count;
  }
  if (probe.infeasible_count == samples) {
    probe.inconclusive = true;
    return probe;
  }
  const double min_dist = radius / 100.0;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!data[i].feasible) continue;
    for (size_t j = i + 1; j < data.size(); ++j) {
      if (!data[j].feasible) continue;
      const double dp = std::sqrt((data[i].x - data[j].x).squaredNorm() +
                                  (data[i].xstar - data[j].xstar).squaredNorm() +
                                  (data[i].b - data[j].b).squaredNorm());
      if (dp < min_dist) continue;
      probe.max_ratio =
          std::max(probe.max_ratio, (data[i].ystar - data[j].ystar).norm() / dp);
    }
  }
  return probe;
}

SingleValuednessProbe probe_single_valuedness(const ProblemInstance& inst,
                                              double radius, int samples,
                                              uint64_t seed, double loc_radius) {
  if (radius <= 0)
    throw ValidationError("probe_single_valuedness: radius must be positive");
  const Index n = inst.n(), m = inst.m();
  if (loc_radius <= 0) loc_radius = 10.0 * radius;
  const auto starts = default_starts(inst, 10.0 * radius);

  struct Sample {
    Vec astar, b;
    std::vector<KKTPoint> in_window;
  };
  std::vector<Sample> data(static_cast<size_t>(samples));
  parallel_for(static_cast<size_t>(samples), [&](size_t i) {
    Rng rng(derive_seed(seed, i));
    const Vec pert = rng.in_ball(n + m, radius);
    Sample& s = data[i];
    s.astar = pert.head(n);
    s.b = pert.tail(m);
    for (const KKTPoint& p : find_all_local(inst, s.astar, s.b, starts)) {
      const double d = std::sqrt((p.x - inst.xbar()).squaredNorm() +
                                 (p.ystar - inst.ybar_star()).squaredNorm());
      if (d <= loc_radius) s.in_window.push_back(p);
    }
  });

  SingleValuednessProbe probe;
  probe.samples = samples;
  for (const Sample& s : data) {
    if (!s.in_window.empty()) ++probe.samples_with_solution;
    if (s.in_window.size() >= 2)
      probe.violations.push_back({s.astar, s.b, s.in_window[0], s.in_window[1]});
  }
  return probe;
}

namespace {

// Derivative-free descent of the perturbed objective within the delta-ball
// around xbar; handles +infinity (indicator) by rejection.
Vec pattern_search(const ProblemInstance& inst, const Vec& astar, const Vec& b,
                   const Vec& start, double delta) {
  const Index n = inst.n();
  auto clip = [&](Vec x) {
    const Vec d = x - inst.xbar();
    const double nrm = d.norm();
    if (nrm > delta) x = inst.xbar() + (delta / nrm) * d;
    return x;
  };
  Vec x = clip(start);
  double fx = inst.perturbed_objective(x, astar, b);
  double step = delta / 4.0;
  while (step > 1e-9) {
    bool improved = false;
    for (Index i = 0; i < n; ++i) {
      for (int sign : {+1, -1}) {
        const Vec cand = clip(x + sign * step * Vec::Unit(n, i));
        const double fc = inst.perturbed_objective(cand, astar, b);
        if (fc < fx - 1e-14) {
          x = cand;
          fx = fc;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

}  // namespace

FullStabilityReport check_full_stability(const ProblemInstance& inst, double delta,
                                         double radius, int samples, uint64_t seed) {
  if (delta <= 0 || radius <= 0)
    throw ValidationError("check_full_stability: delta and radius must be positive");
  FullStabilityReport rep;
  rep.samples = samples;
  if (samples == 0) return rep;
  const Index n = inst.n(), m = inst.m();

  struct Selected {
    bool has = false;
    Vec astar, b;
    KKTPoint pair;
    bool empty = false;
    bool no_kkt_match = false;
    std::optional<SingleValuednessViolation> violation;
  };
  std::vector<Selected> data(static_cast<size_t>(samples));

  parallel_for(static_cast<size_t>(samples), [&](size_t idx) {
    Rng rng(derive_seed(seed, idx));
    Selected& out = data[idx];
    const Vec pert = rng.in_ball(n + m, radius);
    out.astar = pert.head(n);
    out.b = pert.tail(m);

    // Multistart descent of the localized perturbed objective.
    std::vector<Vec> starts;
    starts.push_back(inst.xbar());
    for (Index i = 0; i < n; ++i) {
      starts.push_back(inst.xbar() + 0.5 * delta * Vec::Unit(n, i));
      starts.push_back(inst.xbar() - 0.5 * delta * Vec::Unit(n, i));
    }
    starts.push_back(inst.xbar() + rng.in_ball(n, delta));
    starts.push_back(inst.xbar() + rng.in_ball(n, delta));

    std::vector<Vec> argmins;
    double fmin = kPlusInfinity;
    for (const Vec& s : starts) {
      const Vec x = pattern_search(inst, out.astar, out.b, s, delta);
      const double fx = inst.perturbed_objective(x, out.astar, out.b);
      if (fx < fmin - 1e-10 * (1.0 + std::abs(fx))) {
        fmin = fx;
        argmins.clear();
      }
      if (fx <= fmin + 1e-8 * (1.0 + std::abs(fmin))) {
        bool dup = false;
        for (const Vec& a : argmins) dup = dup || (a - x).norm() <= 1e-5;
        if (!dup) argmins.push_back(x);
      }
    }
    if (argmins.empty()) {
      out.empty = true;
      return;
    }

    // Match each localized argmin with a KKT pair through a polish solve.
    std::vector<KKTPoint> matched;
    for (const Vec& x : argmins) {
      SolveOutcome res =
          solve_perturbed(inst, out.astar, out.b, x, inst.ybar_star());
      if (!res.ok) continue;
      if ((res.point.x - x).norm() > std::min(1e-4, 0.1 * delta)) continue;
      if ((res.point.x - inst.xbar()).norm() > delta) continue;
      if ((res.point.ystar - inst.ybar_star()).norm() > delta) continue;
      bool dup = false;
      for (const KKTPoint& mp : matched)
        dup = dup || ((mp.x - res.point.x).norm() +
                          (mp.ystar - res.point.ystar).norm() <=
                      1e-6);
      if (!dup) matched.push_back(res.point);
    }
    if (matched.empty()) {
      out.no_kkt_match = true;
      return;
    }
    if (matched.size() >= 2)
      out.violation = SingleValuednessViolation{out.astar, out.b, matched[0], matched[1]};
    out.has = true;
    out.pair = matched[0];
  });

  int descent_failures = 0;
  for (const Selected& s : data) {
    if (s.empty) {
      ++rep.empty_count;
      ++descent_failures;
    }
    if (s.no_kkt_match) ++rep.argmin_without_kkt;
    if (s.violation) rep.violations.push_back(*s.violation);
  }
  for (size_t i = 0; i < data.size(); ++i) {
    if (!data[i].has) continue;
    for (size_t j = i + 1; j < data.size(); ++j) {
      if (!data[j].has) continue;
      const double dp = std::sqrt((data[i].astar - data[j].astar).squaredNorm() +
                                  (data[i].b - data[j].b).squaredNorm());
      if (dp < radius / 100.0) continue;
      const double ds =
          std::sqrt((data[i].pair.x - data[j].pair.x).squaredNorm() +
                    (data[i].pair.ystar - data[j].pair.ystar).squaredNorm());
      rep.modulus = std::max(rep.modulus, ds / dp);
    }
  }
  rep.inconclusive = descent_failures > samples / 5;
  return rep;
}

}  // namespace stab
