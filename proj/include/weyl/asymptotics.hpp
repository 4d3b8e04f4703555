// Two-term Weyl coefficients.
//
//   a(x) = sum_{j>0} int_{h^(j)<1} dxi'
//   b(x) = -n sum_{j>0} int_{h^(j)<1} ( v^* A_sub v - (i/2){v^*, A1 - h, v}
//                                       + (i/(n-1)) h {v^*, v} ) dxi'
//
// with dxi' = (2 pi)^{-n} dxi.  Every integrand is positively homogeneous of
// degree zero, so the ball integral reduces to the unit sphere:
//
//   int_{h<1} g dxi' = (2 pi)^{-n} (1/n) int_{S^{n-1}} g(w) h(w)^{-n} dw.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "weyl/eigensystem.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

struct SphereRule {
  std::vector<std::vector<double>> nodes;  // unit vectors
  std::vector<double> weights;             // sum = |S^{n-1}|
};

/// n = 2: `order` equispaced points.  n = 3: Gauss-Legendre in cos(theta)
/// with order/2 nodes times `order` azimuthal points.  n = 4: Hopf
/// coordinates, order/2 Gauss-Legendre nodes times order x order angles.
SphereRule sphere_rule(int n, int order);

/// Default quadrature order for dimension n.
int default_sphere_order(int n);

/// int_{h^(j)<1} g dxi' for a degree-zero integrand g(x, w, EigenSystem).
double ball_integral(const OperatorSpec& spec, std::span<const double> x, int j,
                     const std::function<double(const SymbolJet&, const EigenSystem&)>& g,
                     int sphere_order = 0);

struct CoeffOptions {
  int sphere_order = 0;  // 0: default for n
  bool drop_curvature = false;
  /// Nonzero: evaluate the integrand through eigenvectors carrying a random
  /// gauge (phase and derivative residue) per quadrature point.
  std::uint64_t gauge_seed = 0;
};

struct BTerms {
  double sub = 0;
  double bracket = 0;
  double curvature = 0;
  double total() const { return sub + bracket + curvature; }
};

double coeff_a(const OperatorSpec& spec, std::span<const double> x, const CoeffOptions& opt = {});

/// b(x) and its three contributions.  `imag_residue`, when given, receives
/// the largest imaginary part met in the integrand.
BTerms coeff_b(const OperatorSpec& spec, std::span<const double> x, const CoeffOptions& opt = {},
               double* imag_residue = nullptr);

struct AsymptoticCoeffs {
  int n = 0;
  int grid = 0;
  int sphere_order = 0;
  std::vector<double> a_density;  // row-major, x^1 slowest
  std::vector<double> b_density;
  std::vector<double> b_sub, b_bracket, b_curvature;
  double a_global = 0;
  double b_global = 0;
  double b_sub_global = 0, b_bracket_global = 0, b_curvature_global = 0;
  double imag_residue = 0;
};

/// Densities on the uniform grid x_k = 2 pi k / grid in every direction.
/// `threads` workers split the grid; results do not depend on the split.
AsymptoticCoeffs compute_coeffs(const OperatorSpec& spec, int grid, const CoeffOptions& opt = {},
                                int threads = 1);

/// Periodic rectangle rule over the torus for a density on the uniform grid.
double integrate_density(std::span<const double> density, int n, int grid);

nlohmann::json coeffs_to_json(const AsymptoticCoeffs& c);

/// The operator -A.
OperatorSpec time_reverse(const OperatorSpec& spec);

/// The operator R A R^* for an x-dependent unitary R (expressions in x only).
/// Torus declarations stay in torus form.  Throws NotUnitary.
OperatorSpec unitary_conjugate(const OperatorSpec& spec, const ExprMatrix& R);

/// exp(i theta(x) H) for diagonal H = diag(h_1, ..., h_m).
ExprMatrix diagonal_phase(const Expr& theta, std::span<const double> h);

}  // namespace weyl
