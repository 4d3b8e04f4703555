#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "weyl/errors.hpp"
#include "weyl/expr.hpp"

using namespace weyl;

namespace {

// Random expression trees.  Subtrees fed to sqrt, atan2 and division are kept
// real and bounded away from singularities so finite differences stay valid.
struct ExprGen {
  std::mt19937_64 rng;
  explicit ExprGen(std::uint64_t seed) : rng(seed) {}

  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Expr leaf(bool real) {
    switch (pick(5)) {
      case 0: return Expr::x(1);
      case 1: return Expr::x(2);
      case 2: return Expr::p(1);
      case 3: return Expr::p(2);
      default:
        return real ? Expr::constant(std::round(uni(-3, 3) * 4) / 4)
                    : Expr::constant(cd(uni(-1, 1), uni(-1, 1)));
    }
  }

  Expr gen(int depth, bool real) {
    if (depth == 0) return leaf(real);
    switch (pick(10)) {
      case 0: return gen(depth - 1, real) + gen(depth - 1, real);
      case 1: return gen(depth - 1, real) - gen(depth - 1, real);
      case 2: return gen(depth - 1, real) * gen(depth - 1, real);
      case 3: {
        Expr den = Expr::constant(1.3) + Expr::call(Func::Sin, gen(depth - 1, true));
        return gen(depth - 1, real) / den;
      }
      case 4: return Expr::pow(gen(depth - 1, real), pick(4));
      case 5: return Expr::call(Func::Sin, gen(depth - 1, real));
      case 6: return Expr::call(Func::Cos, gen(depth - 1, real));
      case 7: return Expr::call(Func::Exp, Expr::call(Func::Sin, gen(depth - 1, real)));
      case 8: {
        Expr a = gen(depth - 1, true);
        return Expr::call(Func::Sqrt, Expr::constant(0.5) + a * a);
      }
      default: {
        Expr b = gen(depth - 1, true);
        return Expr::atan2(gen(depth - 1, true), Expr::constant(0.7) + b * b);
      }
    }
  }
};

double scale_of(const Jet2& j) {
  double s = std::max(1.0, std::abs(j.value()));
  for (int a = 0; a < j.dim(); ++a) {
    s = std::max(s, std::abs(j.grad(a)));
    for (int b = a; b < j.dim(); ++b) s = std::max(s, std::abs(j.hess(a, b)));
  }
  return s;
}

}  // namespace

TEST_CASE("parse builds the expected tree for p1 - i*p2") {
  const Expr e = parse("p1 - i*p2");
  REQUIRE(e.kind() == Expr::Kind::Sub);
  const auto& n = e.node();
  CHECK(n.a->kind == Expr::Kind::VarP);
  CHECK(n.a->index == 1);
  REQUIRE(n.b->kind == Expr::Kind::Mul);
  CHECK(n.b->a->kind == Expr::Kind::Const);
  CHECK(n.b->a->value == cd(0.0, 1.0));
  CHECK(n.b->b->kind == Expr::Kind::VarP);
  CHECK(n.b->b->index == 2);
}

TEST_CASE("trigonometric identity evaluates to one") {
  const Expr e = parse("sin(x1)^2 + cos(x1)^2");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> pt{u(rng), u(rng), u(rng), u(rng)};
    CHECK(std::abs(evaluate(e, pt) - 1.0) < 1e-15);
  }
}

TEST_CASE("syntax errors carry 1-based positions") {
  try {
    parse("p1 +");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& err) {
    CHECK(err.line() == 1);
    CHECK(err.column() == 5);
  }
  try {
    parse("x1 *\n  (p1 + )");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& err) {
    CHECK(err.line() == 2);
    CHECK(err.column() == 9);
  }
  CHECK_THROWS_AS(parse("x1^1.5"), SyntaxError);
  CHECK_THROWS_AS(parse("sin x1"), SyntaxError);
  CHECK_THROWS_AS(parse("(x1"), SyntaxError);
  CHECK_THROWS_AS(parse("x1 $ 2"), SyntaxError);
}

TEST_CASE("unknown identifiers are rejected") {
  CHECK_THROWS_AS(parse("y1 + p1"), UnknownIdentifier);
  CHECK_THROWS_AS(parse("log(p1)"), UnknownIdentifier);
  CHECK_THROWS_AS(parse("x0"), UnknownIdentifier);
  CHECK_THROWS_AS(parse("p"), UnknownIdentifier);
}

TEST_CASE("jets of simple polynomials") {
  SUBCASE("p1*p1 at p=(3,0)") {
    const Jet2 j = eval_jet2(parse("p1*p1"), std::vector<double>{0.0, 0.0, 3.0, 0.0});
    CHECK(j.value() == cd(9.0));
    CHECK(j.grad(2) == cd(6.0));
    CHECK(j.hess(2, 2) == cd(2.0));
    CHECK(j.grad(0) == cd(0.0));
  }
  SUBCASE("x1*p1 has unit mixed partial everywhere") {
    const Expr e = parse("x1*p1");
    for (double a : {-2.0, 0.0, 1.5})
      for (double b : {-1.0, 0.25, 4.0}) {
        const Jet2 j = eval_jet2(e, std::vector<double>{a, 0.3, b, -0.7});
        CHECK(j.hess(0, 2) == cd(1.0));
        CHECK(j.hess(2, 0) == cd(1.0));
        CHECK(j.hess(0, 0) == cd(0.0));
      }
  }
}

TEST_CASE("exp(x1)*p2 against a central-difference oracle") {
  const Expr e = parse("exp(x1)*p2");
  const std::vector<double> pt{0.0, 0.0, 0.0, 2.0};
  const Jet2 j = eval_jet2(e, pt);
  const double h = 1e-5;
  auto f = [&](double dx1, double dp2) {
    std::vector<double> q = pt;
    q[0] += dx1;
    q[3] += dp2;
    return evaluate(e, q);
  };
  const cd dx1 = (f(h, 0) - f(-h, 0)) / (2 * h);
  const cd dx1dp2 = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
  CHECK(std::abs(j.value() - 2.0) < 1e-15);
  CHECK(std::abs(j.grad(0) - dx1) < 1e-8);
  CHECK(std::abs(j.grad(0) - 2.0) < 1e-15);
  // mixed second difference carries O(eps/h^2) roundoff
  CHECK(std::abs(j.hess(0, 3) - dx1dp2) < 1e-5);
  CHECK(std::abs(j.hess(0, 3) - 1.0) < 1e-15);
}

TEST_CASE("random expressions: jets agree with finite differences") {
  ExprGen gen(20240611);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0;
  for (int trial = 0; checked < 1000 && trial < 5000; ++trial) {
    const Expr e = gen.gen(1 + gen.pick(4), gen.pick(3) == 0);
    const std::vector<double> pt{u(gen.rng), u(gen.rng), u(gen.rng), u(gen.rng)};
    Jet2 j;
    try {
      j = eval_jet2(e, pt);
    } catch (const DomainError&) {
      continue;
    }
    const double s = scale_of(j);
    if (!std::isfinite(s) || s > 1e4) continue;
    ++checked;

    const double h1 = 1e-5, h2 = 1e-4;
    for (int a = 0; a < 4; ++a) {
      auto shifted = [&](int k1, double d1, int k2, double d2) {
        std::vector<double> q = pt;
        q[k1] += d1;
        q[k2] += d2;
        return evaluate(e, q);
      };
      const cd g = (shifted(a, h1, a, 0) - shifted(a, -h1, a, 0)) / (2 * h1);
      CHECK_MESSAGE(std::abs(g - j.grad(a)) <= 1e-6 * s, print(e));
      for (int b = a; b < 4; ++b) {
        auto mixed = [&](double hh) {
          return (shifted(a, hh, b, hh) - shifted(a, hh, b, -hh) - shifted(a, -hh, b, hh) +
                  shifted(a, -hh, b, -hh)) /
                 (4 * hh * hh);
        };
        const cd hs = (4.0 * mixed(h2) - mixed(2 * h2)) / 3.0;  // Richardson
        CHECK_MESSAGE(std::abs(hs - j.hess(a, b)) <= 1e-6 * s, print(e));
      }
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("print round-trips") {
  ExprGen gen(99);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 300; ++k) {
    const Expr e = gen.gen(3, false);
    const Expr back = parse(print(e));
    const std::vector<double> pt{u(gen.rng), u(gen.rng), u(gen.rng), u(gen.rng)};
    cd v1, v2;
    try {
      v1 = evaluate(e, pt);
    } catch (const DomainError&) {
      CHECK_THROWS_AS(evaluate(back, pt), DomainError);
      continue;
    }
    v2 = evaluate(back, pt);
    CHECK_MESSAGE((v1 == v2 || (std::isnan(v1.real()) && std::isnan(v2.real()))), print(e));
  }
}

TEST_CASE("polynomials at rational points are exact") {
  const Expr e = parse("3*x1^3 - 2*x1*p1 + p1^2/4 - 7");
  const std::vector<double> pt{0.5, 0.0, 0.25, 0.0};
  const Jet2 j = eval_jet2(e, pt);
  CHECK(j.value() == cd(3 * 0.125 - 2 * 0.5 * 0.25 + 0.0625 / 4 - 7));
  CHECK(j.grad(0) == cd(9 * 0.25 - 2 * 0.25));
  CHECK(j.grad(2) == cd(-1.0 + 0.125));
  CHECK(j.hess(0, 0) == cd(18 * 0.5));
  CHECK(j.hess(0, 2) == cd(-2.0));
}

TEST_CASE("domain errors") {
  const std::vector<double> pt{-1.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(evaluate(parse("1/(x1-x1)"), pt), DomainError);
  CHECK_THROWS_AS(eval_jet2(parse("1/(x1-x1)"), pt), DomainError);
  CHECK_THROWS_AS(evaluate(parse("sqrt(x1)"), pt), DomainError);
  CHECK_THROWS_AS(eval_jet2(parse("sqrt(p1)"), pt), DomainError);
  CHECK_THROWS_AS(evaluate(parse("atan2(p1, p2)"), pt), DomainError);
  CHECK_THROWS_AS(evaluate(parse("x1^(-1)"), std::vector<double>{0, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("x3"), pt), DimensionMismatch);
  CHECK(std::abs(evaluate(parse("sqrt(-1 + 0*i + i*1e-300)"), pt)) > 0.5);
}

TEST_CASE("conjugate and differentiate agree with jets") {
  ExprGen gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) {
    const Expr e = gen.gen(3, false);
    const std::vector<double> pt{u(gen.rng), u(gen.rng), u(gen.rng), u(gen.rng)};
    Jet2 j;
    try {
      j = eval_jet2(e, pt);
    } catch (const DomainError&) {
      continue;
    }
    const double s = scale_of(j);
    CHECK(std::abs(evaluate(conjugate(e), pt) - std::conj(j.value())) <= 1e-13 * s);
    for (int a = 0; a < 4; ++a)
      CHECK(std::abs(evaluate(differentiate(e, a, 2), pt) - j.grad(a)) <= 1e-12 * s);
  }
  const Expr d = differentiate(parse("x1*p1 + 3"), 2, 2);
  CHECK(print(d) == "x1");
}
