// Fourier-Galerkin spectra of first order differential operators on T^2,
//
//   A = -i C^a d_a - (i/2)(d_a C^a) + V,
//
// in the orthonormal basis e^{ikx}/(2 pi) (x) e_s, |k_a| <= K:
//
//   <k' s'| A |k s> = C^a_{k'-k}[s' s] (k + k')_a / 2 + V_{k'-k}[s' s],
//
// with f_q = (2 pi)^{-2} int f e^{-iqx} dx.  Also counting functions, the
// mollified counting function, lattice oracles for Dirac and a fit of the
// second Weyl coefficient.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weyl/linalg.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

/// Fourier coefficients of a matrix function of x on T^2, frequencies
/// |q_a| <= F, stored at (q1 + F) * (2F + 1) + (q2 + F).
struct TrigMatrix {
  int F = 0;
  int m = 0;
  std::vector<CMat> coef;
  double dropped = 0;  // largest coefficient magnitude discarded by the band threshold
  const CMat& at(int q1, int q2) const { return coef[(q1 + F) * (2 * F + 1) + (q2 + F)]; }
};

/// Coefficients from a `samples` x `samples` grid; F is the largest frequency
/// carrying a coefficient above `band`.  Throws ValidationError(field) when
/// the function is not resolved on the grid.
TrigMatrix fourier_matrix(const ExprMatrix& f, const std::string& field, int samples = 64,
                          double band = 1e-14);

struct GalerkinOptions {
  bool vectors = true;
  double trust_lambda = 0;  // 0: K / 2
  int samples = 64;
  double band = 1e-14;
};

struct SpectrumSample {
  int K = 0;
  int m = 0;
  std::vector<std::pair<int, int>> modes;  // basis k, index = mode * m + s
  Eigen::VectorXd eigenvalues;             // ascending
  Eigen::MatrixXcd eigenvectors;           // columns; empty when not requested
  double trust_lambda = 0;
  int max_frequency = 0;
  double dropped = 0;
};

/// Largest coefficient frequency of a torus declaration (n = 2).
int max_frequency(const OperatorSpec& spec, int samples = 64, double band = 1e-14);

/// Hermitian Galerkin matrix (dense, column-major).
Eigen::MatrixXcd galerkin_matrix(const OperatorSpec& spec, int K, const GalerkinOptions& opt = {});

/// Assembles and diagonalises (LAPACK zheevr).  Throws CutoffTooSmall when
/// K < max frequency + 2, ValidationError for non-torus or n != 2 input.
SpectrumSample assemble_and_solve(const OperatorSpec& spec, int K, const GalerkinOptions& opt = {});

/// Largest |lambda(K) - lambda(K + 4)| over eigenvalues with |lambda| below
/// the trust ceiling of K (infinity if the counts differ).
double cutoff_stability(const OperatorSpec& spec, int K, const GalerkinOptions& opt = {});

/// Eigenvalues with |lambda| <= kZeroEigenvalue count as zero.
inline constexpr double kZeroEigenvalue = 1e-10;

struct CountResult {
  int count = 0;
  bool near_edge = false;  // an eigenvalue within 1e-12 of lambda
};

/// #{k : 0 < lambda_k < lambda}.  Throws BeyondTrust for lambda > trust_lambda.
CountResult counting(const SpectrumSample& ss, double lambda);
/// Same for a plain eigenvalue list (no trust ceiling).
CountResult counting(std::span<const double> eigenvalues, double lambda);

/// sum_{0 < lambda_k < lambda} |v_k(x)|^2.  Needs eigenvectors.
double spectral_function(const SpectrumSample& ss, double lambda, std::span<const double> x);

/// int_{T^2} e(lambda, x, x) dx by the exact rectangle rule.
double integrated_spectral_function(const SpectrumSample& ss, double lambda);

/// rho_hat(t) = exp(1 - 1/(1 - (t/T0)^2)) on |t| < T0, zero outside, and
/// rho(mu) = (2 pi)^{-1} int rho_hat(t) e^{i mu t} dt, tabulated by FFT.
class Mollifier {
 public:
  double T0() const { return T0_; }
  double rho_hat(double t) const;
  double rho(double mu) const;
  /// int_{-inf}^{mu} rho.
  double Phi(double mu) const;
  double mu_max() const { return mu_max_; }
  /// int rho over the tabulated range.
  double total_mass() const;

 private:
  friend Mollifier make_mollifier(double, int, double);
  double T0_ = 0;
  double dmu_ = 0;
  double mu_max_ = 0;
  std::vector<double> rho_, drho_, d2rho_, Phi_;  // mu = k * dmu, k >= 0
};

/// Throws SupportExceedsT when T0 >= T_bound.
Mollifier make_mollifier(double T0, int grid = 1 << 16,
                         double T_bound = std::numeric_limits<double>::infinity());

struct MollifiedCount {
  double value = 0;
  /// sum of |Phi(lambda - lambda_k)| over computed eigenvalues above the trust
  /// ceiling, i.e. the weight carried by unconverged modes.
  double tail_bound = 0;
};

/// sum_{lambda_k > 0} Phi(lambda - lambda_k).  Throws BeyondTrust for
/// lambda > trust_lambda.
MollifiedCount mollified_counting(const SpectrumSample& ss, const Mollifier& mol, double lambda);

/// Grouped eigenvalues (value, multiplicity), ascending.
using Levels = std::vector<std::pair<double, long>>;

/// Here tail_bound is the weight of the outermost unit shell of levels, a
/// proxy for what truncating the list at its top level leaves out.
MollifiedCount mollified_counting(const Levels& levels, const Mollifier& mol, double lambda);

/// Spectrum of -i sigma . grad + c on T^2: c +- |k| for k != 0 and c twice,
/// all levels with |lambda - c| <= radius.
Levels dirac_lattice_levels(double c, double radius);

Levels to_levels(std::span<const double> eigenvalues, double merge = 1e-9);

struct WeylFit {
  double b = 0;
  double b_err = 0;
  int points = 0;
};

/// Least squares of N(lambda) - a lambda^n against lambda^(n-1) on an even
/// grid over [lo, hi]; error bar from a bootstrap over subranges.
/// Throws InsufficientRange when fewer than 20 positive eigenvalues lie in
/// (lo, hi) or lo <= 0.
WeylFit weyl_fit(const Levels& levels, double a, int n, double lo, double hi,
                 std::uint64_t seed = 1, int grid = 2000);

void write_eigenvalues_csv(std::ostream& os, const SpectrumSample& ss);

}  // namespace weyl
