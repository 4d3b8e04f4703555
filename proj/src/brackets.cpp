#include "weyl/brackets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

Field1 field_of(const MatrixJet& j) {
  Field1 f;
  f.value = j.value();
  for (int k = 0; k < j.vars(); ++k) f.grad.push_back(j.grad(k));
  return f;
}

Field1 field_of(const Jet2& j) {
  Field1 f;
  f.value = CMat::Constant(1, 1, j.value());
  for (int k = 0; k < j.dim(); ++k) f.grad.push_back(CMat::Constant(1, 1, j.grad(k)));
  return f;
}

Field1 projector_field(const EigenSystem& es, int slot) {
  return {es.P[slot], es.dP[slot]};
}

Field1 vector_field(const EigenSystem& es, int slot) {
  Field1 f;
  f.value = es.v[slot];
  for (const CVec& d : es.dv[slot]) f.grad.push_back(d);
  return f;
}

Field1 covector_field(const EigenSystem& es, int slot) {
  Field1 f;
  f.value = es.v[slot].adjoint();
  for (const CVec& d : es.dv[slot]) f.grad.push_back(d.adjoint());
  return f;
}

namespace {

void check_conformable(const Field1& P, const Field1& R, long inner) {
  if (P.grad.size() != R.grad.size() || P.grad.size() % 2 != 0)
    throw DimensionMismatch("bracket operands have different numbers of coordinates");
  if (P.value.cols() != inner)
    throw DimensionMismatch("bracket operands are not conformable");
}

}  // namespace

CMat poisson(const Field1& P, const Field1& R) {
  check_conformable(P, R, R.value.rows());
  const int n = static_cast<int>(P.grad.size()) / 2;
  CMat out = CMat::Zero(P.value.rows(), R.value.cols());
  for (int a = 0; a < n; ++a) out += P.grad[a] * R.grad[n + a] - P.grad[n + a] * R.grad[a];
  return out;
}

CMat poisson3(const Field1& P, const CMat& Q, const Field1& R) {
  check_conformable(P, R, Q.rows());
  if (Q.cols() != R.value.rows()) throw DimensionMismatch("bracket operands are not conformable");
  const int n = static_cast<int>(P.grad.size()) / 2;
  CMat out = CMat::Zero(P.value.rows(), R.value.cols());
  for (int a = 0; a < n; ++a)
    out += P.grad[a] * Q * R.grad[n + a] - P.grad[n + a] * Q * R.grad[a];
  return out;
}

cd bracket_vectors(const CVec&, std::span<const CVec> dv, const CMat& B, int n) {
  cd s = 0.0;
  for (int a = 0; a < n; ++a) s += dv[a].dot(B * dv[n + a]) - dv[n + a].dot(B * dv[a]);
  return s;
}

cd curvature_vectors(const CVec&, std::span<const CVec> dv, int n) {
  cd s = 0.0;
  for (int a = 0; a < n; ++a) s += dv[a].dot(dv[n + a]) - dv[n + a].dot(dv[a]);
  return s;
}

namespace {

double real_or_throw(cd z, double scale, const char* what) {
  if (std::abs(z.imag()) > 1e-10 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << what << " has imaginary part " << z.imag();
    throw NonrealResult(os.str());
  }
  return z.real();
}

}  // namespace

double bracket_term_b(const EigenSystem& es, const SymbolJet& sj, int j) {
  const int s = es.pos(j), n = es.n, m = es.m;
  const CMat B = sj.A1.value() - es.h(s) * CMat::Identity(m, m);
  cd t = 0.0;
  for (int a = 0; a < n; ++a)
    t += (es.dP[s][a] * B * es.dP[s][n + a] - es.dP[s][n + a] * B * es.dP[s][a]).trace();
  const cd term = cd(0.0, -0.5) * t;
  return real_or_throw(term, std::abs(t), "bracket term");
}

double curvature_scalar(const EigenSystem& es, int j) {
  const int s = es.pos(j);
  const Field1 P = projector_field(es, s);
  const cd t = (es.P[s] * poisson(P, P)).trace();
  return real_or_throw(cd(0.0, -1.0) * t, std::abs(t), "curvature");
}

Curvature2Form curvature_form(const EigenSystem& es, int j) {
  const int s = es.pos(j), d = 2 * es.n;
  Curvature2Form out;
  out.n = es.n;
  out.R.resize(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      const cd z = es.dv[s][nu].dot(es.dv[s][mu]);
      out.R(mu, nu) = (cd(0.0, 1.0) * (z - std::conj(z))).real();
    }
  return out;
}

int gauge_lead(const CVec& v, double tie_rel) {
  double vmax = 0.0;
  for (int k = 0; k < v.size(); ++k) vmax = std::max(vmax, std::abs(v(k)));
  for (int k = 0; k < v.size(); ++k)
    if (std::abs(v(k)) >= vmax * (1.0 - tie_rel)) return k;
  return 0;
}

std::vector<double> connection_form(const EigenSystem& es, int j, int lead) {
  const int s = es.pos(j);
  std::vector<double> a(2 * es.n);
  const cd vk = es.v[s](lead);
  if (std::abs(vk) == 0.0) throw DomainError("reference component of the eigenvector vanishes");
  for (int mu = 0; mu < 2 * es.n; ++mu) a[mu] = (es.dv[s][mu](lead) / vk).imag();
  return a;
}

QPhase q_phase(const EigenSystem& es, const SymbolJet& sj, int j, std::span<const double> conn) {
  const int s = es.pos(j), n = es.n;
  QPhase q;
  q.sub_term = (es.P[s] * subprincipal(sj)).trace().real();
  q.bracket_term = bracket_term_b(es, sj, j);
  double g = 0.0;
  for (int a = 0; a < n; ++a) g -= conn[a] * es.dh[s][n + a] - conn[n + a] * es.dh[s][a];
  q.gauge_term = g;
  return q;
}

QPhase q_phase(const EigenSystem& es, const SymbolJet& sj, int j) {
  const std::vector<double> conn = connection_form(es, j, gauge_lead(es.v[es.pos(j)]));
  return q_phase(es, sj, j, conn);
}

TransportResult parallel_transport(const OperatorSpec& spec, int j,
                                   std::span<const CurvePoint> curve, double dt,
                                   const CVec& v_start) {
  const int N = static_cast<int>(curve.size());
  if (N < 3 || N % 2 == 0)
    throw OutOfRange("Simpson transport needs an odd number of samples (at least 3)");
  const int n = spec.n;

  std::vector<EigenSystem> es;
  es.reserve(N);
  for (const CurvePoint& c : curve) {
    std::span<const double> z(c.z);
    es.push_back(decompose(symbol_at(spec, z.first(n), z.subspan(n, n))));
  }
  const int s = es.front().pos(j);

  // reference component: the one staying farthest from zero along the curve
  int k0 = 0;
  double best = -1.0;
  for (int k = 0; k < spec.m; ++k) {
    double lo = 1e300;
    for (const EigenSystem& e : es) lo = std::min(lo, std::abs(e.v[s](k)));
    if (lo > best) {
      best = lo;
      k0 = k;
    }
  }

  double raw = 0.0;
  for (int i = 0; i < N; ++i) {
    const std::vector<double> a = connection_form(es[i], j, k0);
    double f = 0.0;
    for (int mu = 0; mu < 2 * n; ++mu) f += a[mu] * curve[i].dz[mu];
    const double w = (i == 0 || i == N - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    raw += w * f;
  }
  raw *= dt / 3.0;

  auto reference = [&](const EigenSystem& e) {
    const cd c = e.v[s](k0);
    return CVec(e.v[s] * (std::abs(c) / c));
  };
  const CVec r0 = reference(es.front());
  const cd overlap = r0.dot(v_start);
  const double theta0 = std::arg(overlap);

  TransportResult out;
  out.raw_phase = raw;
  out.phase = std::remainder(raw, 2.0 * std::numbers::pi);
  if (out.phase <= -std::numbers::pi) out.phase += 2.0 * std::numbers::pi;
  out.reference_component = k0;
  out.v_end = std::polar(1.0, theta0 + raw) * reference(es.back());
  return out;
}

TransportResult parallel_transport(const OperatorSpec& spec, int j,
                                   const std::function<CurvePoint(double)>& curve, double t0,
                                   double t1, int intervals, const CVec& v_start) {
  if (intervals < 2 || intervals % 2 != 0)
    throw OutOfRange("number of intervals must be even and positive");
  const double dt = (t1 - t0) / intervals;
  std::vector<CurvePoint> pts;
  pts.reserve(intervals + 1);
  for (int i = 0; i <= intervals; ++i) pts.push_back(curve(t0 + i * dt));
  return parallel_transport(spec, j, pts, dt, v_start);
}

}  // namespace weyl
