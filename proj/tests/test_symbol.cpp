#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "weyl/errors.hpp"
#include "weyl/symbol.hpp"

using namespace weyl;

namespace {

const char* kDirac = R"J({"n":2,"m":2,"form":"symbol",
  "A1":[["0","p1-i*p2"],["p1+i*p2","0"]], "A0":0})J";

std::string field_of(const std::string& text) {
  try {
    load_spec(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("Dirac declaration loads and evaluates") {
  const OperatorSpec s = load_spec(kDirac);
  CHECK(s.n == 2);
  CHECK(s.m == 2);
  const SymbolJet sj = symbol_at(s, std::vector<double>{0.3, 1.1}, std::vector<double>{1.0, 0.0});
  const CMat A = sj.A1.value();
  CHECK(A(0, 0) == cd(0));
  CHECK(A(0, 1) == cd(1));
  CHECK(A(1, 0) == cd(1));
  CHECK(A(1, 1) == cd(0));
  CHECK(max_abs(subprincipal(sj)) == 0.0);
}

TEST_CASE("Dirac with a diagonal p1 entry is still admissible") {
  CHECK_NOTHROW(load_spec(R"J({"n":2,"m":2,"form":"symbol",
    "A1":[["p1","p1-i*p2"],["p1+i*p2","0"]], "A0":0})J"));
}

TEST_CASE("double eigenvalue is rejected") {
  CHECK_THROWS_AS(load_spec(R"J({"n":2,"m":2,"form":"symbol",
    "A1":[["p1","0"],["0","p1"]], "A0":0})J"),
                  MultiplicityError);
}

TEST_CASE("vanishing eigenvalue is rejected") {
  CHECK_THROWS_AS(load_spec(R"J({"n":2,"m":2,"form":"symbol",
    "A1":[["sqrt(p1^2+p2^2)","0"],["0","0*p1"]], "A0":0})J"),
                  EllipticityError);
}

TEST_CASE("validation errors name the offending field") {
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["0","p1"]]})J") == "A1");
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["0","p1"],["p1"]]})J") == "A1[1]");
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["0","p1 +"],["p1","0"]]})J") ==
        "A1[0][1]");
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["0","q1"],["q1","0"]]})J") ==
        "A1[0][1]");
  CHECK(field_of(R"J({"n":5,"m":2,"A1":[["0","p1"],["p1","0"]]})J") == "n");
  CHECK(field_of(R"J({"n":2,"m":9,"A1":[]})J") == "m");
  CHECK(field_of(R"J({"n":2,"m":2,"form":"wave","A1":[]})J") == "form");
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["0","p3"],["p3","0"]]})J") ==
        "A1[0][1]");
  // not Hermitian
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["p2","2*p1"],["p1","-p2"]]})J") == "A1");
  // not homogeneous
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["p2","p1^2"],["p1^2","-p2"]]})J") ==
        "A1");
  // A0 must be degree zero
  CHECK(field_of(
            R"J({"n":2,"m":2,"A1":[["p2","p1"],["p1","-p2"]],"A0":"p1"})J") == "A0");
  // not periodic
  CHECK(field_of(R"J({"n":2,"m":2,"A1":[["p2","x1*p1"],["x1*p1","-p2"]]})J") ==
        "A1");
  // torus coefficients must be functions of x only
  CHECK(field_of(R"J({"n":2,"m":2,"form":"torus_differential",
    "C":[[["0","p1"],["p1","0"]],[["0","-i"],["i","0"]]],"V":0})J") == "C[0][0][1]");
  CHECK(field_of(R"J({"n":2,"m":2,"form":"torus_differential",
    "C":[[["0","1"],["1","0"]]],"V":0})J") == "C");
  CHECK(field_of("{not json") == "$");
}

TEST_CASE("every bundled configuration validates") {
  for (const char* name : {"dirac", "dirac_torus", "shifted_dirac", "conjugated_dirac",
                           "perturbed_dirac", "conjugated_perturbed_dirac", "weyl3", "spin1",
                           "spin1_3d"}) {
    CAPTURE(name);
    CHECK_NOTHROW(testfx::load(name));
  }
}

TEST_CASE("torus form: subprincipal symbol equals V") {
  SUBCASE("Pauli coefficients with V = 0.3 I") {
    const OperatorSpec s = testfx::load("shifted_dirac");
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
      const auto p = testfx::random_point(rng, 2);
      const CMat sub = subprincipal(symbol_at(s, p.x, p.xi));
      CHECK(max_abs(sub - 0.3 * CMat::Identity(2, 2)) < 1e-15);
    }
  }
  SUBCASE("x-dependent coefficients") {
    const OperatorSpec s = testfx::load("conjugated_perturbed_dirac");
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
      const auto p = testfx::random_point(rng, 2);
      std::vector<double> pt = p.x;
      pt.insert(pt.end(), p.xi.begin(), p.xi.end());
      const CMat V = s.torus().V.evaluate(pt);
      CHECK(max_abs(subprincipal(symbol_at(s, p.x, p.xi)) - V) < 1e-13);
    }
  }
}

TEST_CASE("bilinear entry x1*p1 contributes i/2 to the subprincipal symbol") {
  ExprMatrix A1(2, 2), A0(2, 2);
  A1(0, 0) = parse("x1*p1");
  A1(0, 1) = parse("p2");
  A1(1, 0) = parse("p2");
  A1(1, 1) = parse("-p1");
  A0(0, 0) = parse("0.25");
  const OperatorSpec s = make_symbol_spec("bilinear", 2, A1, A0);
  const SymbolJet sj = symbol_at(s, std::vector<double>{0.7, 0.1}, std::vector<double>{1.0, 2.0});
  CHECK(sj.A1.hess(0, 2)(0, 0) == cd(1.0));
  const CMat raw = sj.A0.value() + cd(0, 0.5) * sj.A1.mixed_trace();
  CHECK(raw(0, 0) == cd(0.25, 0.5));
  CHECK_THROWS_AS(subprincipal(sj), HermiticityDrift);
}

TEST_CASE("subprincipal of constant-coefficient and shifted symbols") {
  const OperatorSpec d = testfx::load("dirac");
  const OperatorSpec s = testfx::load("shifted_dirac");
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto p = testfx::random_point(rng, 2);
    CHECK(max_abs(subprincipal(symbol_at(d, p.x, p.xi))) == 0.0);
    CHECK(max_abs(subprincipal(symbol_at(s, p.x, p.xi)) - 0.3 * CMat::Identity(2, 2)) < 1e-15);
  }
}

TEST_CASE("zero covector is rejected") {
  const OperatorSpec d = testfx::load("dirac");
  CHECK_THROWS_AS(symbol_at(d, std::vector<double>{0, 0}, std::vector<double>{0, 0}),
                  ZeroCovector);
}

TEST_CASE("Euler identity for the principal symbol") {
  std::mt19937_64 rng(12);
  for (const char* name : {"dirac", "perturbed_dirac", "weyl3", "spin1", "spin1_3d"}) {
    const OperatorSpec s = testfx::load(name);
    for (int k = 0; k < 100; ++k) {
      const auto p = testfx::random_point(rng, s.n);
      const SymbolJet sj = symbol_at(s, p.x, p.xi);
      CMat e = CMat::Zero(s.m, s.m);
      for (int a = 0; a < s.n; ++a) e += p.xi[a] * sj.A1.grad(s.n + a);
      CHECK(max_abs(e - sj.A1.value()) < 1e-10 * std::max(1.0, max_abs(sj.A1.value())));
    }
  }
}

TEST_CASE("torus form and hand-expanded symbol form agree") {
  const OperatorSpec t = testfx::load("perturbed_dirac");
  const OperatorSpec s = load_spec(R"J({"n":2,"m":2,"form":"symbol",
    "A1":[["0.3*cos(x1)*p1","p1 - i*p2"],["p1 + i*p2","-0.3*cos(x1)*p1"]],
    "A0":[["0.3 + 0.15*i*sin(x1)","0.1*sin(x2)"],["0.1*sin(x2)","0.3 - 0.15*i*sin(x1)"]]})J");
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    const auto p = testfx::random_point(rng, 2);
    const SymbolJet a = symbol_at(t, p.x, p.xi), b = symbol_at(s, p.x, p.xi);
    CHECK(max_abs(a.A1.value() - b.A1.value()) < 1e-12);
    CHECK(max_abs(a.A0.value() - b.A0.value()) < 1e-12);
    for (int mu = 0; mu < 4; ++mu) {
      CHECK(max_abs(a.A1.grad(mu) - b.A1.grad(mu)) < 1e-12);
      CHECK(max_abs(a.A0.grad(mu) - b.A0.grad(mu)) < 1e-12);
      for (int nu = mu; nu < 4; ++nu) CHECK(max_abs(a.A1.hess(mu, nu) - b.A1.hess(mu, nu)) < 1e-12);
    }
  }
}

TEST_CASE("symbol jets are Hermitian in value and derivatives") {
  const OperatorSpec s = testfx::load("spin1_3d");
  std::mt19937_64 rng(14);
  for (int k = 0; k < 30; ++k) {
    const auto p = testfx::random_point(rng, 3);
    const SymbolJet sj = symbol_at(s, p.x, p.xi);
    CHECK(hermitian_defect(sj.A1.value()) < 1e-14);
    for (int mu = 0; mu < 6; ++mu) CHECK(hermitian_defect(sj.A1.grad(mu)) < 1e-14);
  }
}

TEST_CASE("configuration round-trips through JSON") {
  for (const char* name : {"dirac", "conjugated_perturbed_dirac", "spin1_3d"}) {
    const OperatorSpec s = testfx::load(name);
    const OperatorSpec back = load_spec(spec_to_json(s).dump());
    std::mt19937_64 rng(15);
    for (int k = 0; k < 10; ++k) {
      const auto p = testfx::random_point(rng, s.n);
      const SymbolJet a = symbol_at(s, p.x, p.xi), b = symbol_at(back, p.x, p.xi);
      CHECK(max_abs(a.A1.value() - b.A1.value()) == 0.0);
      CHECK(max_abs(a.A0.value() - b.A0.value()) == 0.0);
    }
  }
}

TEST_CASE("Halton samples lie on the unit cosphere") {
  for (int n = 2; n <= 4; ++n) {
    const auto s = halton_samples(n, 50);
    CHECK(s.size() == 50);
    for (const auto& p : s) {
      double r = 0;
      for (double v : p.xi) r += v * v;
      CHECK(std::abs(r - 1.0) < 1e-14);
    }
  }
}
