// Second-order Taylor jets over the 2n phase-space coordinates (x, xi).
//
// A Jet2 carries the value, the gradient and the symmetric Hessian of a
// complex-valued function of 2n real variables.  Coordinates are ordered
// x^1..x^n, xi_1..xi_n.  The Hessian is stored as a packed upper triangle.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <utility>

namespace weyl {

using cd = std::complex<double>;

inline constexpr int kMaxVars = 8;  // 2n with n <= 4
inline constexpr int kMaxPacked = kMaxVars * (kMaxVars + 1) / 2;

class Jet2 {
 public:
  Jet2() = default;
  explicit Jet2(int dim, cd value = 0.0);

  static Jet2 constant(int dim, cd value) { return Jet2(dim, value); }
  /// Coordinate function number `k` evaluated at `value`.
  static Jet2 variable(int dim, int k, double value);

  int dim() const noexcept { return dim_; }
  cd value() const noexcept { return val_; }
  cd grad(int i) const noexcept { return grad_[i]; }
  cd hess(int i, int j) const noexcept { return hess_[packed(i, j)]; }

  cd& value() noexcept { return val_; }
  cd& grad(int i) noexcept { return grad_[i]; }
  cd& hess(int i, int j) noexcept { return hess_[packed(i, j)]; }

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(cd s);

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(Jet2 a, cd s) { return a *= s; }
  friend Jet2 operator*(cd s, Jet2 a) { return a *= s; }
  friend Jet2 operator-(Jet2 a) { return a *= -1.0; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b);

  /// Complex conjugate.  Valid because every coordinate is real.
  Jet2 conj() const;

  /// Chain rule for f(a) given f(a0), f'(a0), f''(a0).
  Jet2 compose(cd f0, cd f1, cd f2) const;

 private:
  int packed(int i, int j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * (2 * dim_ - i - 1) / 2 + j;
  }
  int npacked() const noexcept { return dim_ * (dim_ + 1) / 2; }

  int dim_ = 0;
  cd val_ = 0.0;
  std::array<cd, kMaxVars> grad_{};
  std::array<cd, kMaxPacked> hess_{};

  friend Jet2 compose2(const Jet2& a, const Jet2& b, cd f0, cd fa, cd fb, cd faa, cd fab,
                       cd fbb);
};

/// Chain rule for a two-argument function f(a, b).
Jet2 compose2(const Jet2& a, const Jet2& b, cd f0, cd fa, cd fb, cd faa, cd fab, cd fbb);

/// a / b; throws DomainError when b vanishes.
Jet2 divide(const Jet2& a, const Jet2& b);

}  // namespace weyl
