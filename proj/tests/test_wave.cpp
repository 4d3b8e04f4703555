#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "weyl/brackets.hpp"
#include "weyl/wave_invariants.hpp"

using namespace weyl;

TEST_CASE("B0 vanishes for flat and shifted Dirac") {
  const OperatorSpec flat = testfx::load("dirac");
  const OperatorSpec shifted = load_spec(R"J({"n":2,"m":2,"form":"symbol",
    "A1":[["0","p1-i*p2"],["p1+i*p2","0"]], "A0":0.3})J");
  std::mt19937_64 rng(41);
  for (int k = 0; k < 20; ++k) {
    const auto p = testfx::random_point(rng, 2);
    for (const OperatorSpec* s : {&flat, &shifted}) {
      const SymbolJet sj = symbol_at(*s, p.x, p.xi);
      const EigenSystem es = decompose(sj);
      for (int j : {-1, 1}) CHECK(max_abs(compute_B0(es, sj, j)) < 1e-15);
    }
  }
}

TEST_CASE("u_{-1}(0) of zero data is zero") {
  const OperatorSpec s = testfx::load("spin1");
  const EigenSystem es =
      decompose(symbol_at(s, std::vector<double>{1, 2}, std::vector<double>{0.3, 0.4}));
  const auto u = compute_u_minus1_at0(std::vector<CMat>(3, CMat::Zero(3, 3)), es);
  for (const CMat& m : u) CHECK(max_abs(m) == 0.0);
}

TEST_CASE("B0 is homogeneous of degree zero") {
  std::mt19937_64 rng(42);
  for (const auto& name : testfx::identity_fixtures()) {
    const OperatorSpec s = testfx::load(name);
    for (int k = 0; k < 20; ++k) {
      const auto p = testfx::random_point(rng, s.n);
      std::vector<double> xi2 = p.xi;
      for (double& v : xi2) v *= 2.0;
      const SymbolJet a = symbol_at(s, p.x, p.xi), b = symbol_at(s, p.x, xi2);
      const EigenSystem ea = decompose(a), eb = decompose(b);
      for (int j : ea.indices()) {
        const CMat Ba = compute_B0(ea, a, j), Bb = compute_B0(eb, b, j);
        CHECK(max_abs(Ba - Bb) < 1e-10 * std::max(1.0, max_abs(Ba)));
      }
    }
  }
}

TEST_CASE("u_{-1}(0) solves its linear system and sums to zero") {
  std::mt19937_64 rng(43);
  for (const auto& name : testfx::identity_fixtures()) {
    const OperatorSpec s = testfx::load(name);
    for (int k = 0; k < 40; ++k) {
      const auto p = testfx::random_point(rng, s.n);
      const WaveInvariantSet w = compute_wave_invariants(s, p.x, p.xi);
      const EigenSystem es = decompose(symbol_at(s, p.x, p.xi));
      CMat sum = CMat::Zero(s.m, s.m);
      for (int j = 0; j < s.m; ++j) {
        sum += w.u_minus1_at0[j];
        for (int l = 0; l < s.m; ++l) {
          if (l == j) continue;
          const CMat r =
              (es.h(l) - es.h(j)) * es.P[l] * w.u_minus1_at0[j] + es.P[l] * w.B0[j];
          CHECK(max_abs(r) < 1e-10);
        }
      }
      CHECK(max_abs(sum) < 1e-12);
    }
  }
}

TEST_CASE("trace of [U(0)]_sub is the curvature; both routes agree") {
  std::mt19937_64 rng(44);
  for (const auto& name : testfx::identity_fixtures()) {
    CAPTURE(name);
    const OperatorSpec s = testfx::load(name);
    for (int k = 0; k < 15; ++k) {
      const auto p = testfx::random_point(rng, s.n);
      const WaveInvariantSet w = compute_wave_invariants(s, p.x, p.xi, true);
      const EigenSystem es = decompose(symbol_at(s, p.x, p.xi));
      for (int sl = 0; sl < s.m; ++sl) {
        const double curv = curvature_scalar(es, es.index(sl));
        CHECK(std::abs(w.trace_U_sub[sl] - curv) < 1e-9);
        CHECK(max_abs(w.U_sub[sl] - w.U_sub_route[sl]) < 1e-7);
      }
    }
  }
}

TEST_CASE("constant symbol with vanishing subprincipal part has zero U_sub") {
  const OperatorSpec s = testfx::load("dirac");
  const WaveInvariantSet w =
      compute_wave_invariants(s, std::vector<double>{0.1, 0.2}, std::vector<double>{0.7, -1.1});
  for (const CMat& U : w.U_sub) CHECK(max_abs(U) < 1e-15);
}

TEST_CASE("conjugated perturbed Dirac has nonzero trace of U_sub") {
  const OperatorSpec s = testfx::load("conjugated_perturbed_dirac");
  std::mt19937_64 rng(45);
  double mx = 0.0;
  for (int k = 0; k < 30; ++k) {
    const auto p = testfx::random_point(rng, 2);
    const WaveInvariantSet w = compute_wave_invariants(s, p.x, p.xi);
    const EigenSystem es = decompose(symbol_at(s, p.x, p.xi));
    for (int sl = 0; sl < 2; ++sl) {
      CHECK(std::abs(w.trace_U_sub[sl] - curvature_scalar(es, es.index(sl))) < 1e-9);
      mx = std::max(mx, std::abs(w.trace_U_sub[sl]));
    }
  }
  CHECK(mx > 1e-3);
}

TEST_CASE("h * U_sub is homogeneous of degree zero") {
  const OperatorSpec s = testfx::load("spin1_3d");
  std::mt19937_64 rng(46);
  for (int k = 0; k < 20; ++k) {
    const auto p = testfx::random_point(rng, 3);
    std::vector<double> xi3 = p.xi;
    for (double& v : xi3) v *= 3.0;
    const WaveInvariantSet a = compute_wave_invariants(s, p.x, p.xi);
    const WaveInvariantSet b = compute_wave_invariants(s, p.x, xi3);
    const EigenSystem ea = decompose(symbol_at(s, p.x, p.xi));
    const EigenSystem eb = decompose(symbol_at(s, p.x, xi3));
    for (int sl = 0; sl < 3; ++sl)
      CHECK(max_abs(ea.h(sl) * a.U_sub[sl] - eb.h(sl) * b.U_sub[sl]) < 1e-10);
  }
}

TEST_CASE("U_sub does not depend on the gauge used for q") {
  const OperatorSpec s = testfx::load("conjugated_perturbed_dirac");
  std::mt19937_64 rng(47);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    const auto p = testfx::random_point(rng, 2);
    const SymbolJet sj = symbol_at(s, p.x, p.xi);
    const EigenSystem es = decompose(sj);
    std::vector<CMat> B0a, B0b;
    for (int sl = 0; sl < 2; ++sl) {
      const int j = es.index(sl);
      B0a.push_back(compute_B0(es, sj, j));
      // another gauge: arbitrary connection components
      std::vector<double> conn(4);
      for (double& c : conn) c = g(rng);
      B0b.push_back(compute_B0(es, sj, j, q_phase(es, sj, j, conn).total()));
    }
    const auto ua = compute_u_minus1_at0(B0a, es), ub = compute_u_minus1_at0(B0b, es);
    for (int sl = 0; sl < 2; ++sl) CHECK(max_abs(ua[sl] - ub[sl]) < 1e-12);
  }
}
