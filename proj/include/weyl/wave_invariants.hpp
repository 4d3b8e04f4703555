// Lower-order data of the wave group at time zero.
//
//   B0   = (A0 - q - (i/2) h_{x^a p_a} + i (A1)_{x^a p_a}) P
//          - i h_{p_a} P_{x^a} + i (A1)_{x^a} P_{p_a}
//   u_{-1}(0)^(j) = sum_{l != j} (P^(l) B0^(j) + P^(j) B0^(l)) / (h^(j) - h^(l))
//   [U^(j)(0)]_sub = u_{-1}(0)^(j) - (i/2) P^(j)_{x^a p_a}
//
// The last quantity also has a closed form in terms of first derivatives of
// the projectors only; both are provided so they can be compared.

#pragma once

#include <span>
#include <vector>

#include "weyl/eigensystem.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

CMat compute_B0(const EigenSystem& es, const SymbolJet& sj, int j);
/// B0 with an explicitly supplied phase q (any gauge).
CMat compute_B0(const EigenSystem& es, const SymbolJet& sj, int j, cd q);

/// u_{-1}(0) for every slot, given B0 for every slot at the same point.
std::vector<CMat> compute_u_minus1_at0(const std::vector<CMat>& B0, const EigenSystem& es);

/// Closed form of [U^(j)(0)]_sub.
CMat compute_U_sub(const EigenSystem& es, const SymbolJet& sj, int j);

struct WaveInvariantSet {
  std::vector<CMat> B0;            // by slot
  std::vector<CMat> u_minus1_at0;  // by slot
  std::vector<CMat> U_sub;         // closed form, by slot
  std::vector<CMat> U_sub_route;   // u_{-1}(0) - (i/2) P_{xp}; empty unless requested
  std::vector<cd> trace_U_sub;     // by slot
};

WaveInvariantSet compute_wave_invariants(const OperatorSpec& spec, std::span<const double> x,
                                         std::span<const double> xi, bool with_route = false);

}  // namespace weyl
