#include "weyl/wave_invariants.hpp"

#include "weyl/brackets.hpp"

namespace weyl {

CMat compute_B0(const EigenSystem& es, const SymbolJet& sj, int j) {
  return compute_B0(es, sj, j, q_phase(es, sj, j).total());
}

CMat compute_B0(const EigenSystem& es, const SymbolJet& sj, int j, cd q) {
  const int s = es.pos(j), n = es.n, m = es.m;
  const cd i(0.0, 1.0);
  const CMat I = CMat::Identity(m, m);
  const CMat scalar_part = sj.A0.value() - q * I - 0.5 * i * mixed_trace_h(sj, es, s) * I +
                           i * sj.A1.mixed_trace();
  CMat B = scalar_part * es.P[s];
  for (int a = 0; a < n; ++a)
    B += -i * es.dh[s][n + a] * es.dP[s][a] + i * es.dA[a] * es.dP[s][n + a];
  return B;
}

std::vector<CMat> compute_u_minus1_at0(const std::vector<CMat>& B0, const EigenSystem& es) {
  const int m = es.m;
  std::vector<CMat> u(m, CMat::Zero(m, m));
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) {
      if (l == j) continue;
      u[j] += (es.P[l] * B0[j] + es.P[j] * B0[l]) / (es.h(j) - es.h(l));
    }
  return u;
}

CMat compute_U_sub(const EigenSystem& es, const SymbolJet& sj, int j) {
  const int s = es.pos(j), m = es.m, d = 2 * es.n;
  const CMat Asub = subprincipal(sj);
  const cd i(0.0, 1.0);
  auto term = [&](int k) {
    // 2 A_sub P^(k) + i {A1 + h^(k), P^(k)}
    Field1 F;
    F.value = sj.A1.value() + es.h(k) * CMat::Identity(m, m);
    for (int mu = 0; mu < d; ++mu) F.grad.push_back(es.dA[mu] + es.dh[k][mu] * CMat::Identity(m, m));
    return CMat(2.0 * Asub * es.P[k] + i * poisson(F, projector_field(es, k)));
  };
  const CMat Ts = term(s);
  CMat out = CMat::Zero(m, m);
  for (int l = 0; l < m; ++l) {
    if (l == s) continue;
    out += (es.P[l] * Ts + es.P[s] * term(l)) / (es.h(s) - es.h(l));
  }
  return 0.5 * out;
}

WaveInvariantSet compute_wave_invariants(const OperatorSpec& spec, std::span<const double> x,
                                         std::span<const double> xi, bool with_route) {
  const SymbolJet sj = symbol_at(spec, x, xi);
  const EigenSystem es = decompose(sj);
  WaveInvariantSet w;
  for (int s = 0; s < es.m; ++s) w.B0.push_back(compute_B0(es, sj, es.index(s)));
  w.u_minus1_at0 = compute_u_minus1_at0(w.B0, es);
  for (int s = 0; s < es.m; ++s) {
    w.U_sub.push_back(compute_U_sub(es, sj, es.index(s)));
    w.trace_U_sub.push_back(w.U_sub.back().trace());
    if (with_route)
      w.U_sub_route.push_back(w.u_minus1_at0[s] - cd(0.0, 0.5) * second_mixed_projector_trace(
                                                                   spec, x, xi, es.index(s)));
  }
  return w;
}

}  // namespace weyl
