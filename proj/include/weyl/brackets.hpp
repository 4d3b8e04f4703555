// Matrix Poisson brackets and the U(1) connection generated by an
// eigenvector field of the principal symbol.
//
//   {P, R}    = P_{x^a} R_{p_a} - P_{p_a} R_{x^a}
//   {P, Q, R} = P_{x^a} Q R_{p_a} - P_{p_a} Q R_{x^a}
//
// Connection: A_mu = i v^* v_mu (mu over the 2n coordinates; the first n
// components are the "P_a", the last n the "Q^a").  Curvature entries are
// R_{mu nu} = d_nu A_mu - d_mu A_nu = i([v_nu]^* v_mu - [v_mu]^* v_nu).

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "weyl/eigensystem.hpp"
#include "weyl/linalg.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

/// A matrix-valued field with its gradient over the 2n coordinates.
struct Field1 {
  CMat value;
  std::vector<CMat> grad;
};

Field1 field_of(const MatrixJet& j);
Field1 field_of(const Jet2& j);  // 1x1
/// Projector P^(slot) together with its analytic derivatives.
Field1 projector_field(const EigenSystem& es, int slot);
/// Column v and row v^* with parallel-gauge derivatives.
Field1 vector_field(const EigenSystem& es, int slot);
Field1 covector_field(const EigenSystem& es, int slot);

CMat poisson(const Field1& P, const Field1& R);
CMat poisson3(const Field1& P, const CMat& Q, const Field1& R);

/// {v^*, B, v} from an eigenvector and any representative of its derivative.
cd bracket_vectors(const CVec& v, std::span<const CVec> dv, const CMat& B, int n);
/// {v^*, v} from an eigenvector and any representative of its derivative.
cd curvature_vectors(const CVec& v, std::span<const CVec> dv, int n);

/// -(i/2){v^*, A1 - h, v}, evaluated from projectors.  Real.
double bracket_term_b(const EigenSystem& es, const SymbolJet& sj, int j);

/// -i{v^*, v} = -i tr(P{P, P}).  Real.
double curvature_scalar(const EigenSystem& es, int j);

struct Curvature2Form {
  int n = 0;
  RMat R;  // 2n x 2n, blocks [xx, xp; px, pp]
  RMat block_xx() const { return R.topLeftCorner(n, n); }
  RMat block_xp() const { return R.topRightCorner(n, n); }
  RMat block_px() const { return R.bottomLeftCorner(n, n); }
  RMat block_pp() const { return R.bottomRightCorner(n, n); }
};

Curvature2Form curvature_form(const EigenSystem& es, int j);

/// Connection components A_mu = i v^* v_mu in the gauge where component
/// `lead` of v is real and positive.
std::vector<double> connection_form(const EigenSystem& es, int j, int lead);

/// Index of the component used by fix_gauge.
int gauge_lead(const CVec& v, double tie_rel = 1e-12);

struct QPhase {
  double sub_term = 0;      // v^* A_sub v
  double bracket_term = 0;  // -(i/2){v^*, A1 - h, v}
  double gauge_term = 0;    // -i v^*{v, h}; depends on the gauge
  cd total() const { return sub_term + bracket_term + gauge_term; }
};

/// q for the stored gauge-fixed eigenvector.
QPhase q_phase(const EigenSystem& es, const SymbolJet& sj, int j);
/// q for a gauge with connection components `conn` (size 2n).
QPhase q_phase(const EigenSystem& es, const SymbolJet& sj, int j, std::span<const double> conn);

struct CurvePoint {
  std::vector<double> z;   // (x, p)
  std::vector<double> dz;  // derivative in the curve parameter
};

struct TransportResult {
  CVec v_end;
  double phase = 0;  // integral of the connection in the reference gauge, wrapped to (-pi, pi]
  double raw_phase = 0;
  int reference_component = 0;
};

/// Parallel transport of v_start (an eigenvector at the first sample) along a
/// curve sampled at equal parameter steps `dt`.  Composite Simpson rule; an
/// even number of intervals is required.
TransportResult parallel_transport(const OperatorSpec& spec, int j,
                                   std::span<const CurvePoint> curve, double dt,
                                   const CVec& v_start);

TransportResult parallel_transport(const OperatorSpec& spec, int j,
                                   const std::function<CurvePoint(double)>& curve, double t0,
                                   double t1, int intervals, const CVec& v_start);

}  // namespace weyl
