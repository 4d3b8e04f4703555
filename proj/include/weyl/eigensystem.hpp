// Hermitian eigen-decomposition of the principal symbol, gauge fixing and
// first derivatives of eigenvalues, projectors and eigenvectors.
//
// Eigenvalues are stored in increasing order.  Signed indices follow the
// usual convention: j = -m_minus .. -1 for negative eigenvalues, j = 1 .. m_plus
// for positive ones.  `pos(j)` maps a signed index to the storage slot.

#pragma once

#include <span>
#include <vector>

#include "weyl/linalg.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // unit columns
};

/// Cyclic Jacobi for Hermitian matrices.
HermitianEigen jacobi_eigen(const CMat& a);

/// Multiplies v by the unit phase that makes its largest-magnitude component
/// real and positive.  Components within `tie_rel` of the maximum count as
/// ties and the lowest index wins.
CVec fix_gauge(const CVec& v, double tie_rel = 1e-12);

struct DecomposeOptions {
  double zero_rel = 1e-10;  // |h| < zero_rel * |A1| is an ellipticity failure
  double gap_rel = 1e-9;    // min gap below gap_rel * spectral radius is degenerate
};

struct EigenSystem {
  int n = 0;
  int m = 0;
  int m_minus = 0;
  int m_plus = 0;

  RVec h;
  std::vector<CVec> v;  // gauge fixed
  std::vector<CMat> P;
  std::vector<CMat> dA;                    // (A1)_mu, mu over 2n coordinates
  std::vector<std::vector<double>> dh;     // [slot][mu]
  std::vector<std::vector<CMat>> dP;       // [slot][mu]
  std::vector<std::vector<CVec>> dv;       // [slot][mu], parallel gauge v* dv = 0

  int pos(int j) const { return j < 0 ? m_minus + j : m_minus + j - 1; }
  int index(int slot) const { return slot < m_minus ? slot - m_minus : slot - m_minus + 1; }
  /// Signed indices in increasing order of eigenvalue.
  std::vector<int> indices() const;
};

EigenSystem decompose(const SymbolJet& sj, const DecomposeOptions& opt = {});

/// Second derivative d^2 h / dz^mu dz^nu of the eigenvalue in `slot`.
double hessian_h(const SymbolJet& sj, const EigenSystem& es, int slot, int mu, int nu);

/// sum_a d^2 h / dx^a dxi_a for the eigenvalue in `slot`.
double mixed_trace_h(const SymbolJet& sj, const EigenSystem& es, int slot);

/// sum_a d^2 P^(j) / dx^a dxi_a by central differences in x of the analytic
/// dP field, one Richardson step.
CMat second_mixed_projector_trace(const OperatorSpec& spec, std::span<const double> x,
                                  std::span<const double> xi, int j, double step = 1e-4);

}  // namespace weyl
