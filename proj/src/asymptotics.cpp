#include "weyl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "weyl/brackets.hpp"
#include "weyl/errors.hpp"

namespace weyl {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int N, std::vector<double>& x, std::vector<double>& w) {
  x.resize(N);
  w.resize(N);
  for (int i = 0; i < N; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (N + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (N == 1) p0 = 1.0;
      dp = N * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

int default_sphere_order(int n) { return n == 2 ? 256 : (n == 3 ? 64 : 24); }

SphereRule sphere_rule(int n, int order) {
  if (order < 2) throw OutOfRange("sphere order must be at least 2");
  SphereRule r;
  if (n == 2) {
    for (int k = 0; k < order; ++k) {
      const double t = 2.0 * kPi * k / order;
      r.nodes.push_back({std::cos(t), std::sin(t)});
      r.weights.push_back(2.0 * kPi / order);
    }
  } else if (n == 3) {
    std::vector<double> gx, gw;
    gauss_legendre(std::max(1, order / 2), gx, gw);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double c = gx[i], s = std::sqrt(1.0 - c * c);
      for (int k = 0; k < order; ++k) {
        const double t = 2.0 * kPi * k / order;
        r.nodes.push_back({s * std::cos(t), s * std::sin(t), c});
        r.weights.push_back(gw[i] * 2.0 * kPi / order);
      }
    }
  } else if (n == 4) {
    // w = (sqrt(u) e^{i t1}, sqrt(1-u) e^{i t2}),  dw = (1/2) du dt1 dt2
    std::vector<double> gx, gw;
    gauss_legendre(std::max(1, order / 2), gx, gw);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double u = 0.5 * (gx[i] + 1.0), r1 = std::sqrt(u), r2 = std::sqrt(1.0 - u);
      for (int k1 = 0; k1 < order; ++k1)
        for (int k2 = 0; k2 < order; ++k2) {
          const double t1 = 2.0 * kPi * k1 / order, t2 = 2.0 * kPi * k2 / order;
          r.nodes.push_back({r1 * std::cos(t1), r1 * std::sin(t1), r2 * std::cos(t2),
                             r2 * std::sin(t2)});
          r.weights.push_back(0.5 * (0.5 * gw[i]) * std::pow(2.0 * kPi / order, 2));
        }
    }
  } else {
    throw DimensionMismatch("sphere rules exist for n = 2, 3, 4");
  }
  return r;
}

double ball_integral(const OperatorSpec& spec, std::span<const double> x, int j,
                     const std::function<double(const SymbolJet&, const EigenSystem&)>& g,
                     int sphere_order) {
  const int n = spec.n;
  const SphereRule rule = sphere_rule(n, sphere_order > 0 ? sphere_order : default_sphere_order(n));
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const SymbolJet sj = symbol_at(spec, x, rule.nodes[q]);
    const EigenSystem es = decompose(sj);
    if (j < -es.m_minus || j > es.m_plus || j == 0)
      throw OutOfRange("eigenvalue index " + std::to_string(j) + " does not exist");
    const double h = es.h(es.pos(j));
    if (h <= 0.0) throw NonpositiveHamiltonian("h = " + std::to_string(h) + " on the sphere");
    s += rule.weights[q] * g(sj, es) * std::pow(h, -n);
  }
  return s / (n * std::pow(2.0 * kPi, n));
}

double coeff_a(const OperatorSpec& spec, std::span<const double> x, const CoeffOptions& opt) {
  const int n = spec.n;
  const SphereRule rule =
      sphere_rule(n, opt.sphere_order > 0 ? opt.sphere_order : default_sphere_order(n));
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const EigenSystem es = decompose(symbol_at(spec, x, rule.nodes[q]));
    double f = 0.0;
    for (int sl = es.m_minus; sl < es.m; ++sl) f += std::pow(es.h(sl), -n);
    s += rule.weights[q] * f;
  }
  return s / (n * std::pow(2.0 * kPi, n));
}

BTerms coeff_b(const OperatorSpec& spec, std::span<const double> x, const CoeffOptions& opt,
               double* imag_residue) {
  const int n = spec.n, m = spec.m;
  const SphereRule rule =
      sphere_rule(n, opt.sphere_order > 0 ? opt.sphere_order : default_sphere_order(n));
  const cd i(0.0, 1.0);
  std::mt19937_64 rng(opt.gauge_seed);
  std::normal_distribution<double> gauss;

  cd sub = 0.0, br = 0.0, cu = 0.0;
  double residue = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const SymbolJet sj = symbol_at(spec, x, rule.nodes[q]);
    const EigenSystem es = decompose(sj);
    const CMat Asub = subprincipal(sj);
    const CMat A1 = sj.A1.value();
    for (int sl = es.m_minus; sl < m; ++sl) {
      const double h = es.h(sl);
      const CMat B = A1 - h * CMat::Identity(m, m);
      cd t_sub, t_br, t_curv;
      if (opt.gauge_seed == 0) {
        t_sub = (es.P[sl] * Asub).trace();
        cd tb = 0.0;
        for (int a = 0; a < n; ++a)
          tb += (es.dP[sl][a] * B * es.dP[sl][n + a] - es.dP[sl][n + a] * B * es.dP[sl][a]).trace();
        t_br = -0.5 * i * tb;
        const Field1 P = projector_field(es, sl);
        t_curv = (i / double(n - 1)) * h * (es.P[sl] * poisson(P, P)).trace();
      } else {
        const cd ph = std::exp(i * gauss(rng));
        const CVec v = ph * es.v[sl];
        std::vector<CVec> dv(2 * n);
        for (int mu = 0; mu < 2 * n; ++mu) dv[mu] = ph * (es.dv[sl][mu] + i * gauss(rng) * es.v[sl]);
        t_sub = v.dot(Asub * v);
        t_br = -0.5 * i * bracket_vectors(v, dv, B, n);
        t_curv = (i / double(n - 1)) * h * curvature_vectors(v, dv, n);
      }
      residue = std::max({residue, std::abs(t_sub.imag()), std::abs(t_br.imag()),
                          std::abs(t_curv.imag())});
      const double wgt = rule.weights[q] * std::pow(h, -n);
      sub += wgt * t_sub;
      br += wgt * t_br;
      cu += wgt * t_curv;
    }
  }
  if (residue > 1e-9) {
    std::ostringstream os;
    os << "b(x) integrand has imaginary part " << residue;
    throw NonrealResult(os.str());
  }
  if (imag_residue) *imag_residue = residue;
  // -n * (2pi)^{-n} (1/n) * sphere integral
  const double f = -1.0 / std::pow(2.0 * kPi, n);
  BTerms out;
  out.sub = f * sub.real();
  out.bracket = f * br.real();
  out.curvature = opt.drop_curvature ? 0.0 : f * cu.real();
  return out;
}

double integrate_density(std::span<const double> density, int n, int grid) {
  double s = 0.0;
  for (double d : density) s += d;
  (void)grid;
  return s * std::pow(2.0 * kPi / grid, n);
}

AsymptoticCoeffs compute_coeffs(const OperatorSpec& spec, int grid, const CoeffOptions& opt,
                                int threads) {
  if (grid < 1) throw OutOfRange("grid must be positive");
  const int n = spec.n;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= grid;

  AsymptoticCoeffs c;
  c.n = n;
  c.grid = grid;
  c.sphere_order = opt.sphere_order > 0 ? opt.sphere_order : default_sphere_order(n);
  c.a_density.assign(total, 0.0);
  c.b_density.assign(total, 0.0);
  c.b_sub.assign(total, 0.0);
  c.b_bracket.assign(total, 0.0);
  c.b_curvature.assign(total, 0.0);
  std::vector<double> residue(total, 0.0);

  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> x(n);
    for (std::size_t idx = lo; idx < hi; ++idx) {
      std::size_t r = idx;
      for (int a = n - 1; a >= 0; --a) {
        x[a] = 2.0 * kPi * static_cast<double>(r % grid) / grid;
        r /= grid;
      }
      c.a_density[idx] = coeff_a(spec, x, opt);
      const BTerms b = coeff_b(spec, x, opt, &residue[idx]);
      c.b_sub[idx] = b.sub;
      c.b_bracket[idx] = b.bracket;
      c.b_curvature[idx] = b.curvature;
      c.b_density[idx] = b.total();
    }
  };

  const int T = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (T == 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(T);
    for (int t = 0; t < T; ++t) {
      const std::size_t lo = total * t / T, hi = total * (t + 1) / T;
      pool.emplace_back([&, t, lo, hi] {
        try {
          work(lo, hi);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  c.a_global = integrate_density(c.a_density, n, grid);
  c.b_global = integrate_density(c.b_density, n, grid);
  c.b_sub_global = integrate_density(c.b_sub, n, grid);
  c.b_bracket_global = integrate_density(c.b_bracket, n, grid);
  c.b_curvature_global = integrate_density(c.b_curvature, n, grid);
  c.imag_residue = *std::max_element(residue.begin(), residue.end());
  return c;
}

nlohmann::json coeffs_to_json(const AsymptoticCoeffs& c) {
  nlohmann::json j;
  j["a_global"] = c.a_global;
  j["b_global"] = c.b_global;
  j["a_density"] = c.a_density;
  j["b_density"] = c.b_density;
  j["b_terms"] = {{"sub", c.b_sub_global},
                  {"bracket", c.b_bracket_global},
                  {"curvature", c.b_curvature_global},
                  {"sub_density", c.b_sub},
                  {"bracket_density", c.b_bracket},
                  {"curvature_density", c.b_curvature}};
  j["grid"] = {{"n", c.n},
               {"points_per_axis", c.grid},
               {"spacing", 2.0 * kPi / c.grid},
               {"layout", "row-major, x1 slowest, x_k = 2*pi*k/points_per_axis"},
               {"sphere_order", c.sphere_order}};
  j["normalization"] = "dxi' = (2*pi)^(-n) dxi; a_global = int a(x) dx over [0, 2*pi)^n";
  j["imag_residue"] = c.imag_residue;
  return j;
}

// ------------------------------------------------------------- transforms

OperatorSpec time_reverse(const OperatorSpec& spec) {
  const Expr minus = Expr::constant(-1.0);
  if (spec.is_torus()) {
    std::vector<ExprMatrix> C;
    for (const ExprMatrix& c : spec.torus().C) C.push_back(minus * c);
    return make_torus_spec(spec.name + "_reversed", spec.n, std::move(C),
                           minus * spec.torus().V);
  }
  return make_symbol_spec(spec.name + "_reversed", spec.n, minus * spec.A1, minus * spec.A0);
}

ExprMatrix diagonal_phase(const Expr& theta, std::span<const double> h) {
  const int m = static_cast<int>(h.size());
  ExprMatrix R(m, m);
  for (int k = 0; k < m; ++k)
    R(k, k) = Expr::call(Func::Exp, Expr::constant(cd(0.0, h[k])) * theta);
  return R;
}

OperatorSpec unitary_conjugate(const OperatorSpec& spec, const ExprMatrix& R) {
  const int n = spec.n, m = spec.m;
  if (R.rows() != m || R.cols() != m) throw ValidationError("R", "must be m x m");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (R(i, j).depends_on_momentum()) throw ValidationError("R", "must depend on x only");
      if (R(i, j).max_index() > n) throw ValidationError("R", "references a variable beyond n");
    }
  const ExprMatrix Rs = R.adjoint();
  for (const PhaseSample& s : halton_samples(n, 50)) {
    std::vector<double> pt = s.x;
    pt.insert(pt.end(), s.xi.begin(), s.xi.end());
    const CMat r = R.evaluate(pt);
    const double d = max_abs(r * r.adjoint() - CMat::Identity(m, m));
    if (d > 1e-12) {
      std::ostringstream os;
      os << "R R^* deviates from I by " << d;
      throw NotUnitary(os.str());
    }
  }

  std::vector<ExprMatrix> dRs;
  for (int a = 0; a < n; ++a) dRs.push_back(differentiate(Rs, a, n));

  if (spec.is_torus()) {
    std::vector<ExprMatrix> C;
    ExprMatrix V = R * spec.torus().V * Rs;
    for (int a = 0; a < n; ++a) {
      C.push_back(R * spec.torus().C[a] * Rs);
      const ExprMatrix W = Expr::constant(cd(0.0, -1.0)) * (R * dRs[a]);
      V = V + Expr::constant(0.5) * (C[a] * W + W * C[a]);
    }
    return make_torus_spec(spec.name + "_conjugated", n, std::move(C), std::move(V));
  }
  ExprMatrix A0 = R * spec.A0 * Rs;
  for (int a = 0; a < n; ++a)
    A0 = A0 - Expr::constant(cd(0.0, 1.0)) * (R * differentiate(spec.A1, n + a, n) * dRs[a]);
  return make_symbol_spec(spec.name + "_conjugated", n, R * spec.A1 * Rs, std::move(A0));
}

}  // namespace weyl
