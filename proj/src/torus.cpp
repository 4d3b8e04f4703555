#include "weyl/torus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <fftw3.h>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

constexpr double kPi = std::numbers::pi;

void require_torus2(const OperatorSpec& spec) {
  if (!spec.is_torus())
    throw ValidationError("form", "the Galerkin verifier needs a torus_differential declaration");
  if (spec.n != 2) throw ValidationError("n", "the Galerkin verifier supports n = 2 only");
}

struct Coefficients {
  std::vector<TrigMatrix> C;
  TrigMatrix V;
  int F = 0;
  double dropped = 0;
};

Coefficients coefficients(const OperatorSpec& spec, int samples, double band) {
  require_torus2(spec);
  Coefficients c;
  for (int a = 0; a < 2; ++a) {
    c.C.push_back(fourier_matrix(spec.torus().C[a], "C[" + std::to_string(a) + "]", samples, band));
    c.F = std::max(c.F, c.C.back().F);
    c.dropped = std::max(c.dropped, c.C.back().dropped);
  }
  c.V = fourier_matrix(spec.torus().V, "V", samples, band);
  c.F = std::max(c.F, c.V.F);
  c.dropped = std::max(c.dropped, c.V.dropped);
  return c;
}

// Quintic Hermite on [0, 1] from values and first two derivatives (scaled by h).
double quintic(double u, double p0, double d0, double s0, double p1, double d1, double s1,
               double h) {
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
  const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
  const double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5);
  const double H3 = 10 * u3 - 15 * u4 + 6 * u5;
  const double H4 = -4 * u3 + 7 * u4 - 3 * u5;
  const double H5 = 0.5 * (u3 - 2 * u4 + u5);
  return p0 * H0 + h * d0 * H1 + h * h * s0 * H2 + p1 * H3 + h * d1 * H4 + h * h * s1 * H5;
}

}  // namespace

TrigMatrix fourier_matrix(const ExprMatrix& f, const std::string& field, int samples,
                          double band) {
  const int M = samples, m = f.rows();
  if (M < 8 || M % 2 != 0) throw OutOfRange("Fourier sample count must be even and >= 8");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (f(i, j).depends_on_momentum())
        throw ValidationError(field, "coefficient depends on momentum");
      if (f(i, j).max_index() > 2) throw ValidationError(field, "references a variable beyond n");
    }

  // values on the grid
  std::vector<CMat> val(M * M);
  std::vector<double> pt(4, 0.0);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      pt[0] = 2.0 * kPi * a / M;
      pt[1] = 2.0 * kPi * b / M;
      val[a * M + b] = f.evaluate(pt);
    }
  const int Q = M / 2 - 1;  // resolvable frequencies |q| <= Q
  std::vector<cd> tw(M);
  for (int k = 0; k < M; ++k) tw[k] = std::polar(1.0, -2.0 * kPi * k / M);

  // separable DFT: first over x2, then over x1
  const int W = 2 * Q + 1;
  std::vector<CMat> half(M * W, CMat::Zero(m, m));
  for (int a = 0; a < M; ++a)
    for (int q2 = -Q; q2 <= Q; ++q2) {
      CMat s = CMat::Zero(m, m);
      for (int b = 0; b < M; ++b) s += tw[((q2 * b) % M + M) % M] * val[a * M + b];
      half[a * W + q2 + Q] = s;
    }
  std::vector<CMat> full(W * W, CMat::Zero(m, m));
  for (int q1 = -Q; q1 <= Q; ++q1)
    for (int q2 = -Q; q2 <= Q; ++q2) {
      CMat s = CMat::Zero(m, m);
      for (int a = 0; a < M; ++a) s += tw[((q1 * a) % M + M) % M] * half[a * W + q2 + Q];
      full[(q1 + Q) * W + q2 + Q] = s / double(M * M);
    }

  TrigMatrix out;
  out.m = m;
  int F = 0;
  double edge = 0.0;
  for (int q1 = -Q; q1 <= Q; ++q1)
    for (int q2 = -Q; q2 <= Q; ++q2) {
      CMat& c = full[(q1 + Q) * W + q2 + Q];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (std::abs(c(i, j)) <= band) {
            out.dropped = std::max(out.dropped, std::abs(c(i, j)));
            c(i, j) = 0.0;
          }
      const int qi = std::max(std::abs(q1), std::abs(q2));
      if (max_abs(c) > 0.0) {
        F = std::max(F, qi);
        if (qi >= Q - 2) edge = std::max(edge, max_abs(c));
      }
    }
  if (edge > 0.0) {
    std::ostringstream os;
    os << "not a trigonometric polynomial resolved by " << M
       << " samples (coefficient " << edge << " near the sampling limit)";
    throw ValidationError(field, os.str());
  }
  out.F = F;
  const int w = 2 * F + 1;
  out.coef.resize(w * w);
  for (int q1 = -F; q1 <= F; ++q1)
    for (int q2 = -F; q2 <= F; ++q2)
      out.coef[(q1 + F) * w + (q2 + F)] = full[(q1 + Q) * W + q2 + Q];
  return out;
}

int max_frequency(const OperatorSpec& spec, int samples, double band) {
  return coefficients(spec, samples, band).F;
}

namespace {

Eigen::MatrixXcd assemble(const Coefficients& c, int m, int K, std::vector<std::pair<int, int>>& modes) {
  modes.clear();
  for (int k1 = -K; k1 <= K; ++k1)
    for (int k2 = -K; k2 <= K; ++k2) modes.emplace_back(k1, k2);
  const int N = static_cast<int>(modes.size()) * m;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
  const int F = c.F;
  for (std::size_t col = 0; col < modes.size(); ++col) {
    const auto [k1, k2] = modes[col];
    for (std::size_t row = 0; row < modes.size(); ++row) {
      const auto [p1, p2] = modes[row];
      const int q1 = p1 - k1, q2 = p2 - k2;
      if (std::abs(q1) > F || std::abs(q2) > F) continue;
      auto coef = [&](const TrigMatrix& t) -> CMat {
        if (std::abs(q1) > t.F || std::abs(q2) > t.F) return CMat::Zero(m, m);
        return t.at(q1, q2);
      };
      const CMat blk = coef(c.C[0]) * (0.5 * (k1 + p1)) + coef(c.C[1]) * (0.5 * (k2 + p2)) +
                       coef(c.V);
      H.block(row * m, col * m, m, m) = blk;
    }
  }
  return H;
}

}  // namespace

Eigen::MatrixXcd galerkin_matrix(const OperatorSpec& spec, int K, const GalerkinOptions& opt) {
  const Coefficients c = coefficients(spec, opt.samples, opt.band);
  std::vector<std::pair<int, int>> modes;
  return assemble(c, spec.m, K, modes);
}

SpectrumSample assemble_and_solve(const OperatorSpec& spec, int K, const GalerkinOptions& opt) {
  const Coefficients c = coefficients(spec, opt.samples, opt.band);
  if (K < c.F + 2) {
    std::ostringstream os;
    os << "K = " << K << " but coefficients reach frequency " << c.F << "; need K >= " << c.F + 2;
    throw CutoffTooSmall(os.str());
  }
  SpectrumSample ss;
  ss.K = K;
  ss.m = spec.m;
  ss.max_frequency = c.F;
  ss.dropped = c.dropped;
  ss.trust_lambda = opt.trust_lambda > 0 ? opt.trust_lambda : 0.5 * K;
  Eigen::MatrixXcd H = assemble(c, spec.m, K, ss.modes);
  const double defect = (H - H.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "Galerkin matrix is not Hermitian (defect " << defect << ")";
    throw HermiticityDrift(os.str());
  }
  const lapack_int N = static_cast<lapack_int>(H.rows());
  std::vector<double> w(N);
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, N));
  Eigen::MatrixXcd Z;
  if (opt.vectors) Z.resize(N, N);
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, opt.vectors ? 'V' : 'N', 'A', 'L', N, H.data(), N, 0.0, 0.0, 0, 0, 0.0,
      &found, w.data(), opt.vectors ? Z.data() : nullptr, N, isuppz.data());
  if (info != 0) throw DomainError("zheevr failed with info = " + std::to_string(info));
  ss.eigenvalues = Eigen::Map<Eigen::VectorXd>(w.data(), found);
  if (opt.vectors) ss.eigenvectors = Z.leftCols(found);
  return ss;
}

double cutoff_stability(const OperatorSpec& spec, int K, const GalerkinOptions& opt) {
  GalerkinOptions o = opt;
  o.vectors = false;
  const SpectrumSample a = assemble_and_solve(spec, K, o);
  o.trust_lambda = a.trust_lambda;
  const SpectrumSample b = assemble_and_solve(spec, K + 4, o);
  std::vector<double> la, lb;
  for (double l : a.eigenvalues)
    if (std::abs(l) < a.trust_lambda) la.push_back(l);
  for (double l : b.eigenvalues)
    if (std::abs(l) < a.trust_lambda) lb.push_back(l);
  if (la.size() != lb.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) d = std::max(d, std::abs(la[i] - lb[i]));
  return d;
}

// ----------------------------------------------------------------- counting

CountResult counting(std::span<const double> eigenvalues, double lambda) {
  CountResult r;
  for (double l : eigenvalues) {
    if (std::abs(l - lambda) <= 1e-12) r.near_edge = true;
    if (l > kZeroEigenvalue && l < lambda) ++r.count;
  }
  return r;
}

CountResult counting(const SpectrumSample& ss, double lambda) {
  if (lambda > ss.trust_lambda) {
    std::ostringstream os;
    os << "lambda = " << lambda << " exceeds the trust ceiling " << ss.trust_lambda;
    throw BeyondTrust(os.str());
  }
  return counting(std::span<const double>(ss.eigenvalues.data(), ss.eigenvalues.size()), lambda);
}

namespace {

// Eigenvector columns with 0 < lambda_k < lambda.
Eigen::MatrixXcd selected_vectors(const SpectrumSample& ss, double lambda) {
  if (lambda > ss.trust_lambda) {
    std::ostringstream os;
    os << "lambda = " << lambda << " exceeds the trust ceiling " << ss.trust_lambda;
    throw BeyondTrust(os.str());
  }
  if (ss.eigenvectors.cols() == 0) throw OutOfRange("spectrum was computed without eigenvectors");
  std::vector<int> cols;
  for (int c = 0; c < ss.eigenvalues.size(); ++c)
    if (ss.eigenvalues(c) > kZeroEigenvalue && ss.eigenvalues(c) < lambda) cols.push_back(c);
  Eigen::MatrixXcd V(ss.eigenvectors.rows(), cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) V.col(i) = ss.eigenvectors.col(cols[i]);
  return V;
}

double density(const SpectrumSample& ss, const Eigen::MatrixXcd& V, std::span<const double> x) {
  const int m = ss.m;
  const Eigen::Index nm = static_cast<Eigen::Index>(ss.modes.size());
  Eigen::RowVectorXcd phase(nm);
  for (Eigen::Index k = 0; k < nm; ++k)
    phase(k) = std::polar(1.0 / (2.0 * kPi), ss.modes[k].first * x[0] + ss.modes[k].second * x[1]);
  double e = 0.0;
  using Strided = Eigen::Map<const Eigen::MatrixXcd, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  for (int s = 0; s < m; ++s) {
    const Strided Vs(V.data() + s, nm, V.cols(), Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(V.rows(), m));
    e += (phase * Vs).squaredNorm();
  }
  return e;
}

}  // namespace

double spectral_function(const SpectrumSample& ss, double lambda, std::span<const double> x) {
  return density(ss, selected_vectors(ss, lambda), x);
}

double integrated_spectral_function(const SpectrumSample& ss, double lambda) {
  const Eigen::MatrixXcd V = selected_vectors(ss, lambda);
  const int G = 2 * ss.K + 1;
  double s = 0.0;
  for (int a = 0; a < G; ++a)
    for (int b = 0; b < G; ++b) {
      const std::vector<double> x{2.0 * kPi * a / G, 2.0 * kPi * b / G};
      s += density(ss, V, x);
    }
  return s * std::pow(2.0 * kPi / G, 2);
}

// ---------------------------------------------------------------- mollifier

double Mollifier::rho_hat(double t) const {
  const double s = t / T0_;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double Mollifier::rho(double mu) const {
  const double a = std::abs(mu);
  if (a >= mu_max_) return 0.0;
  const std::size_t k = static_cast<std::size_t>(a / dmu_);
  const double u = a / dmu_ - static_cast<double>(k);
  return quintic(u, rho_[k], drho_[k], d2rho_[k], rho_[k + 1], drho_[k + 1], d2rho_[k + 1], dmu_);
}

double Mollifier::Phi(double mu) const {
  const double a = std::abs(mu);
  double p;
  if (a >= mu_max_) {
    p = Phi_.back();
  } else {
    const std::size_t k = static_cast<std::size_t>(a / dmu_);
    const double u = a / dmu_ - static_cast<double>(k);
    p = quintic(u, Phi_[k], rho_[k], drho_[k], Phi_[k + 1], rho_[k + 1], drho_[k + 1], dmu_);
  }
  return mu >= 0.0 ? p : 1.0 - p;
}

double Mollifier::total_mass() const { return 2.0 * Phi_.back() - 1.0; }

Mollifier make_mollifier(double T0, int grid, double T_bound) {
  if (!(T0 > 0.0)) throw OutOfRange("mollifier width must be positive");
  if (T0 >= T_bound) {
    std::ostringstream os;
    os << "supp rho_hat = [-" << T0 << ", " << T0 << "] is not inside (-T, T) with T = "
       << T_bound;
    throw SupportExceedsT(os.str());
  }
  if (grid < 1024 || (grid & (grid - 1)) != 0)
    throw OutOfRange("mollifier grid must be a power of two >= 1024");

  Mollifier mol;
  mol.T0_ = T0;
  const int N = grid;
  const double L = 128.0 * T0;  // period; support covers 1/64 of it
  const double dt = L / N;
  mol.dmu_ = 2.0 * kPi / L;
  mol.mu_max_ = (N / 2 - 1) * mol.dmu_;

  // four transforms: rho_hat, i t rho_hat, -t^2 rho_hat, rho_hat / t
  fftw_complex* in = fftw_alloc_complex(4 * static_cast<std::size_t>(N));
  fftw_complex* out = fftw_alloc_complex(4 * static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const double t = (j < N / 2 ? j : j - N) * dt;
    const double r = mol.rho_hat(t);
    in[j][0] = r;
    in[j][1] = 0.0;
    in[N + j][0] = 0.0;
    in[N + j][1] = t * r;
    in[2 * N + j][0] = -t * t * r;
    in[2 * N + j][1] = 0.0;
    in[3 * N + j][0] = j == 0 ? 0.0 : r / t;
    in[3 * N + j][1] = 0.0;
  }
  int n = N;
  fftw_plan plan = fftw_plan_many_dft(1, &n, 4, in, nullptr, 1, N, out, nullptr, 1, N,
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const double f = dt / (2.0 * kPi);
  const int K = N / 2;
  mol.rho_.resize(K);
  mol.drho_.resize(K);
  mol.d2rho_.resize(K);
  mol.Phi_.resize(K);
  for (int k = 0; k < K; ++k) {
    const double mu = k * mol.dmu_;
    mol.rho_[k] = f * out[k][0];
    mol.drho_[k] = f * out[N + k][0];
    mol.d2rho_[k] = f * out[2 * N + k][0];
    mol.Phi_[k] = 0.5 + f * (mu + out[3 * N + k][1]);
  }
  fftw_free(in);
  fftw_free(out);
  return mol;
}

MollifiedCount mollified_counting(const SpectrumSample& ss, const Mollifier& mol, double lambda) {
  if (lambda > ss.trust_lambda) {
    std::ostringstream os;
    os << "lambda = " << lambda << " exceeds the trust ceiling " << ss.trust_lambda;
    throw BeyondTrust(os.str());
  }
  MollifiedCount r;
  for (double l : ss.eigenvalues) {
    if (l <= kZeroEigenvalue) continue;
    const double p = mol.Phi(lambda - l);
    r.value += p;
    if (l > ss.trust_lambda) r.tail_bound += std::abs(p);
  }
  return r;
}

MollifiedCount mollified_counting(const Levels& levels, const Mollifier& mol, double lambda) {
  MollifiedCount r;
  if (levels.empty()) return r;
  const double top = levels.back().first;
  for (const auto& [l, mult] : levels) {
    if (l <= kZeroEigenvalue) continue;
    const double p = mol.Phi(lambda - l);
    r.value += static_cast<double>(mult) * p;
    if (l > top - 1.0) r.tail_bound += static_cast<double>(mult) * std::abs(p);
  }
  return r;
}

Levels dirac_lattice_levels(double c, double radius) {
  const long R = static_cast<long>(std::floor(radius));
  std::map<long, long> shells;  // |k|^2 -> number of lattice points
  for (long a = -R; a <= R; ++a)
    for (long b = -R; b <= R; ++b) {
      const long s = a * a + b * b;
      if (s > 0 && static_cast<double>(s) <= radius * radius) ++shells[s];
    }
  Levels lv;
  lv.emplace_back(c, 2);
  for (const auto& [s, count] : shells) {
    const double r = std::sqrt(static_cast<double>(s));
    lv.emplace_back(c + r, count);
    lv.emplace_back(c - r, count);
  }
  std::sort(lv.begin(), lv.end());
  return lv;
}

Levels to_levels(std::span<const double> eigenvalues, double merge) {
  std::vector<double> e(eigenvalues.begin(), eigenvalues.end());
  std::sort(e.begin(), e.end());
  Levels lv;
  for (double l : e) {
    if (!lv.empty() && l - lv.back().first <= merge)
      ++lv.back().second;
    else
      lv.emplace_back(l, 1);
  }
  return lv;
}

WeylFit weyl_fit(const Levels& levels, double a, int n, double lo, double hi, std::uint64_t seed,
                 int grid) {
  long inside = 0;
  for (const auto& [l, mult] : levels)
    if (l > kZeroEigenvalue && l > lo && l < hi) inside += mult;
  if (!(lo > 0.0) || !(hi > lo) || inside < 20 || grid < 20) {
    std::ostringstream os;
    os << "range [" << lo << ", " << hi << "] holds " << inside
       << " positive eigenvalues; need lo > 0 and at least 20";
    throw InsufficientRange(os.str());
  }
  std::vector<double> lam(grid), r(grid), basis(grid);
  // N(lambda) by a running pointer over the sorted levels
  std::size_t p = 0;
  long N = 0;
  for (int i = 0; i < grid; ++i) {
    lam[i] = lo + (hi - lo) * i / (grid - 1);
    while (p < levels.size() && levels[p].first < lam[i]) {
      if (levels[p].first > kZeroEigenvalue) N += levels[p].second;
      ++p;
    }
    r[i] = static_cast<double>(N) - a * std::pow(lam[i], n);
    basis[i] = std::pow(lam[i], n - 1);
  }
  auto fit = [&](const std::vector<int>& idx) {
    double num = 0.0, den = 0.0;
    for (int i : idx) {
      num += r[i] * basis[i];
      den += basis[i] * basis[i];
    }
    return num / den;
  };
  std::vector<int> all(grid);
  for (int i = 0; i < grid; ++i) all[i] = i;
  WeylFit out;
  out.b = fit(all);
  out.points = grid;

  constexpr int S = 10, B = 200;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, S - 1);
  double s1 = 0.0, s2 = 0.0;
  for (int rep = 0; rep < B; ++rep) {
    std::vector<int> idx;
    for (int k = 0; k < S; ++k) {
      const int sub = pick(rng);
      for (int i = grid * sub / S; i < grid * (sub + 1) / S; ++i) idx.push_back(i);
    }
    const double b = fit(idx);
    s1 += b;
    s2 += b * b;
  }
  const double mean = s1 / B;
  out.b_err = std::sqrt(std::max(0.0, s2 / B - mean * mean));
  return out;
}

void write_eigenvalues_csv(std::ostream& os, const SpectrumSample& ss) {
  os << "index,lambda\n";
  os.precision(17);
  const int m_minus = static_cast<int>(
      std::count_if(ss.eigenvalues.begin(), ss.eigenvalues.end(),
                    [](double l) { return l < -kZeroEigenvalue; }));
  const int zeros = static_cast<int>(std::count_if(
      ss.eigenvalues.begin(), ss.eigenvalues.end(),
      [](double l) { return std::abs(l) <= kZeroEigenvalue; }));
  for (int c = 0; c < ss.eigenvalues.size(); ++c) {
    const double l = ss.eigenvalues(c);
    int idx;
    if (c < m_minus)
      idx = c - m_minus;
    else if (c < m_minus + zeros)
      idx = 0;
    else
      idx = c - m_minus - zeros + 1;
    os << idx << ',' << l << '\n';
  }
}

}  // namespace weyl
