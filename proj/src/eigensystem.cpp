#include "weyl/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

HermitianEigen jacobi_eigen(const CMat& a_in) {
  const int m = static_cast<int>(a_in.rows());
  CMat a = 0.5 * (a_in + a_in.adjoint());
  CMat V = CMat::Identity(m, m);
  const double norm = a.norm();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-17 * norm || off == 0.0) break;

    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) {
        const double b = std::abs(a(p, q));
        if (b <= 1e-300) continue;
        // rotate column/row q so that a(p,q) becomes real positive
        const cd ph = a(p, q) / b;
        a.col(q) *= std::conj(ph);
        a.row(q) *= ph;
        V.col(q) *= std::conj(ph);
        a(p, q) = b;
        a(q, p) = b;

        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * b);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < m; ++k) {
          const cd akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < m; ++k) {
          const cd apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (int k = 0; k < m; ++k) {
          const cd vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  for (int k = 0; k < m; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = V.col(order[k]).normalized();
  }
  return out;
}

CVec fix_gauge(const CVec& v, double tie_rel) {
  double vmax = 0.0;
  for (int k = 0; k < v.size(); ++k) vmax = std::max(vmax, std::abs(v(k)));
  if (vmax == 0.0) return v;
  int lead = 0;
  for (int k = 0; k < v.size(); ++k)
    if (std::abs(v(k)) >= vmax * (1.0 - tie_rel)) {
      lead = k;
      break;
    }
  const cd ph = v(lead) / std::abs(v(lead));
  CVec out = v * std::conj(ph);
  out(lead) = std::abs(out(lead));
  return out;
}

std::vector<int> EigenSystem::indices() const {
  std::vector<int> out;
  for (int s = 0; s < m; ++s) out.push_back(index(s));
  return out;
}

EigenSystem decompose(const SymbolJet& sj, const DecomposeOptions& opt) {
  EigenSystem es;
  es.n = sj.n;
  es.m = sj.m;
  const int m = sj.m, d = 2 * sj.n;
  const CMat A = sj.A1.value();
  const HermitianEigen he = jacobi_eigen(A);
  const double radius = std::max(std::abs(he.values(0)), std::abs(he.values(m - 1)));
  const double anorm = A.norm();

  es.h = he.values;
  for (int k = 0; k < m; ++k) {
    if (std::abs(es.h(k)) < opt.zero_rel * anorm || anorm == 0.0) {
      std::ostringstream os;
      os << "eigenvalue " << es.h(k) << " vanishes relative to |A1| = " << anorm;
      throw ZeroEigenvalue(os.str());
    }
    if (es.h(k) < 0) ++es.m_minus;
  }
  es.m_plus = m - es.m_minus;
  for (int k = 0; k + 1 < m; ++k) {
    const double gap = es.h(k + 1) - es.h(k);
    if (gap < opt.gap_rel * radius) {
      std::ostringstream os;
      os << "gap " << gap << " between eigenvalues " << es.h(k) << " and " << es.h(k + 1);
      throw DegenerateEigenvalue(os.str());
    }
  }

  es.v.resize(m);
  es.P.resize(m);
  for (int k = 0; k < m; ++k) {
    es.v[k] = fix_gauge(he.vectors.col(k));
    es.P[k] = es.v[k] * es.v[k].adjoint();
  }

  es.dA.resize(d);
  for (int mu = 0; mu < d; ++mu) es.dA[mu] = sj.A1.grad(mu);

  es.dh.assign(m, std::vector<double>(d));
  es.dP.assign(m, std::vector<CMat>(d));
  es.dv.assign(m, std::vector<CVec>(d));
  for (int mu = 0; mu < d; ++mu) {
    // matrix elements <v_l | A_mu | v_j>
    CMat W(m, m);
    for (int l = 0; l < m; ++l)
      for (int j = 0; j < m; ++j) W(l, j) = es.v[l].dot(es.dA[mu] * es.v[j]);
    for (int j = 0; j < m; ++j) {
      es.dh[j][mu] = W(j, j).real();
      CVec dv = CVec::Zero(m);
      CMat dP = CMat::Zero(m, m);
      for (int l = 0; l < m; ++l) {
        if (l == j) continue;
        const double den = es.h(j) - es.h(l);
        const CVec t = es.v[l] * (W(l, j) / den);
        dv += t;
        dP += t * es.v[j].adjoint() + es.v[j] * t.adjoint();
      }
      es.dv[j][mu] = dv;
      es.dP[j][mu] = dP;
    }
  }
  return es;
}

double hessian_h(const SymbolJet& sj, const EigenSystem& es, int slot, int mu, int nu) {
  const CMat Amn = sj.A1.hess(mu, nu);
  return ((es.dP[slot][mu] * es.dA[nu]).trace() + (es.P[slot] * Amn).trace()).real();
}

double mixed_trace_h(const SymbolJet& sj, const EigenSystem& es, int slot) {
  double s = 0.0;
  for (int a = 0; a < es.n; ++a) s += hessian_h(sj, es, slot, a, es.n + a);
  return s;
}

CMat second_mixed_projector_trace(const OperatorSpec& spec, std::span<const double> x,
                                  std::span<const double> xi, int j, double step) {
  const int n = spec.n;
  std::vector<double> xs(x.begin(), x.end());
  auto dP_at = [&](int a, double dx) {
    xs[a] = x[a] + dx;
    const SymbolJet sj = symbol_at(spec, xs, xi);
    xs[a] = x[a];
    const EigenSystem es = decompose(sj);
    return es.dP[es.pos(j)][n + a];
  };
  CMat out = CMat::Zero(spec.m, spec.m);
  for (int a = 0; a < n; ++a) {
    auto central = [&](double hh) { return CMat((dP_at(a, hh) - dP_at(a, -hh)) / (2 * hh)); };
    out += (4.0 * central(step) - central(2 * step)) / 3.0;
  }
  return out;
}

}  // namespace weyl
