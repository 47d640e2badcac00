#include <doctest.h>

#include "stab/expr.hpp"
#include "stab/rng.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace stab;
using testing::vec;

TEST_CASE("frozen evaluation examples") {
  SUBCASE("quadratic") {
    auto r = Expr::parse("0.5*(x1-1)^2", 1).eval2(vec({0}));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.grad(0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(r.hess(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("bilinear") {
    auto r = Expr::parse("x1*x2", 2).eval2(vec({2, 3}));
    CHECK(r.value == doctest::Approx(6.0));
    CHECK(r.grad(0) == doctest::Approx(3.0));
    CHECK(r.grad(1) == doctest::Approx(2.0));
    CHECK(r.hess(0, 1) == doctest::Approx(1.0));
    CHECK(r.hess(0, 0) == doctest::Approx(0.0));
  }
  SUBCASE("exponential") {
    auto r = Expr::parse("exp(x1)", 1).eval2(vec({0}));
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.grad(0) == doctest::Approx(1.0));
    CHECK(r.hess(0, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("parser errors carry positions and bad indices are rejected") {
  CHECK_THROWS_AS(Expr::parse("x3", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 + ", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin 1", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(x1)", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("(x1", 1), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 + * 2", 1), ParseError);
}

TEST_CASE("precedence and associativity") {
  // ^ binds tighter than unary minus; right associative.
  CHECK(Expr::parse("-x1^2", 1).value(vec({3})) == doctest::Approx(-9.0));
  CHECK(Expr::parse("2^-2", 1).value(vec({0})) == doctest::Approx(0.25));
  CHECK(Expr::parse("2^3^2", 1).value(vec({0})) == doctest::Approx(512.0));
  CHECK(Expr::parse("2 - 3 - 4", 1).value(vec({0})) == doctest::Approx(-5.0));
  CHECK(Expr::parse("12 / 3 / 2", 1).value(vec({0})) == doctest::Approx(2.0));
  CHECK(Expr::parse("1 + 2*3", 1).value(vec({0})) == doctest::Approx(7.0));
  // Integer powers go through repeated multiplication: negative bases legal.
  CHECK(Expr::parse("(-2)^3", 1).value(vec({0})) == doctest::Approx(-8.0));
  CHECK(Expr::parse("x1^0", 1).value(vec({5})) == doctest::Approx(1.0));
}

TEST_CASE("domain violations name the offending subexpression") {
  CHECK_THROWS_WITH_AS(Expr::parse("log(x1)", 1).eval2(vec({-1})),
                       doctest::Contains("log(x1)"), EvalError);
  CHECK_THROWS_AS(Expr::parse("1/x1", 1).eval2(vec({0})), EvalError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)", 1).eval2(vec({-2})), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1^0.5", 1).eval2(vec({-2})), EvalError);
}

TEST_CASE("hessian is exactly symmetric") {
  auto r = Expr::parse("x1^2*x2 + sin(x1*x3) + exp(x2*x3)", 3).eval2(vec({0.3, -0.7, 1.1}));
  CHECK((r.hess - r.hess.transpose()).norm() == 0.0);
}

namespace {

// Random expression, value-safe on the whole real line.
std::string random_safe_expr(Rng& rng, Index n, int depth) {
  if (depth == 0 || rng.uniform() < 0.3) {
    if (rng.uniform() < 0.6)
      return "x" + std::to_string(1 + static_cast<Index>(rng.uniform() * n));
    return stab::testing::fmt(0.25 * static_cast<int>(rng.uniform() * 17) - 2.0);
  }
  const double pick = rng.uniform();
  const std::string a = random_safe_expr(rng, n, depth - 1);
  const std::string b = random_safe_expr(rng, n, depth - 1);
  if (pick < 0.25) return "(" + a + " + " + b + ")";
  if (pick < 0.45) return "(" + a + " - " + b + ")";
  if (pick < 0.65) return "(" + a + ")*(" + b + ")";
  if (pick < 0.75) return "sin(" + a + ")";
  if (pick < 0.85) return "cos(" + a + ")";
  if (pick < 0.95) return "exp(0.3*(" + a + "))";
  return "(" + a + ")^2";
}

}  // namespace

TEST_CASE("gradients and hessians match central finite differences") {
  Rng rng(23);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform() * 3);
    const std::string text = random_safe_expr(rng, n, 3);
    Expr e = Expr::parse(text, n);
    Vec x = rng.normal_vec(n) * 0.5;
    auto r = e.eval2(x);
    if (std::abs(r.value) > 1e3) continue;  // skip badly scaled draws
    auto f = [&](const Vec& p) { return e.value(p); };
    const Vec fd_g = oracle::fd_gradient(f, x);
    const Mat fd_h = oracle::fd_hessian(f, x);
    const double gscale = std::max(1.0, r.grad.norm());
    const double hscale = std::max(1.0, r.hess.norm());
    CHECK((r.grad - fd_g).norm() / gscale <= 1e-6);
    CHECK((r.hess - fd_h).norm() / hscale <= 1e-5);
    ++checked;
  }
  CHECK(checked >= 30);
}

TEST_CASE("division, log and sqrt derivatives at safe points") {
  Rng rng(29);
  for (const std::string text : {"1/(2 + x1^2)", "log(2 + x1^2)", "sqrt(2 + x1^2)",
                                 "x1 / (3 + cos(x1))", "(1 + x1^2)^1.5"}) {
    Expr e = Expr::parse(text, 1);
    for (int k = 0; k < 5; ++k) {
      Vec x = rng.normal_vec(1);
      auto r = e.eval2(x);
      auto f = [&](const Vec& p) { return e.value(p); };
      CHECK((r.grad - oracle::fd_gradient(f, x)).norm() <=
            1e-6 * std::max(1.0, r.grad.norm()));
      CHECK((r.hess - oracle::fd_hessian(f, x)).norm() <=
            2e-5 * std::max(1.0, r.hess.norm()));
    }
  }
}

TEST_CASE("eval2 is deterministic") {
  Expr e = Expr::parse("sin(x1)*exp(x2) - x1^3/(1 + x2^2)", 2);
  const Vec x = vec({0.37, -1.2});
  auto a = e.eval2(x);
  auto b = e.eval2(x);
  CHECK(a.value == b.value);
  CHECK((a.grad - b.grad).norm() == 0.0);
  CHECK((a.hess - b.hess).norm() == 0.0);
}
