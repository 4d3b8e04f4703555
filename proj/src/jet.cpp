#include "weyl/jet.hpp"

#include "weyl/errors.hpp"

namespace weyl {

Jet2::Jet2(int dim, cd value) : dim_(dim), val_(value) {
  if (dim < 0 || dim > kMaxVars)
    throw DimensionMismatch("jet dimension " + std::to_string(dim) + " exceeds " +
                            std::to_string(kMaxVars));
}

Jet2 Jet2::variable(int dim, int k, double value) {
  Jet2 j(dim, value);
  j.grad_[k] = 1.0;
  return j;
}

Jet2& Jet2::operator+=(const Jet2& o) {
  val_ += o.val_;
  for (int i = 0; i < dim_; ++i) grad_[i] += o.grad_[i];
  for (int i = 0, e = npacked(); i < e; ++i) hess_[i] += o.hess_[i];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  val_ -= o.val_;
  for (int i = 0; i < dim_; ++i) grad_[i] -= o.grad_[i];
  for (int i = 0, e = npacked(); i < e; ++i) hess_[i] -= o.hess_[i];
  return *this;
}

Jet2& Jet2::operator*=(cd s) {
  val_ *= s;
  for (int i = 0; i < dim_; ++i) grad_[i] *= s;
  for (int i = 0, e = npacked(); i < e; ++i) hess_[i] *= s;
  return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim_);
  r.val_ = a.val_ * b.val_;
  for (int i = 0; i < a.dim_; ++i) r.grad_[i] = a.val_ * b.grad_[i] + b.val_ * a.grad_[i];
  int p = 0;
  for (int i = 0; i < a.dim_; ++i)
    for (int j = i; j < a.dim_; ++j, ++p)
      r.hess_[p] = a.val_ * b.hess_[p] + b.val_ * a.hess_[p] + a.grad_[i] * b.grad_[j] +
                   b.grad_[i] * a.grad_[j];
  return r;
}

Jet2 Jet2::conj() const {
  Jet2 r(dim_);
  r.val_ = std::conj(val_);
  for (int i = 0; i < dim_; ++i) r.grad_[i] = std::conj(grad_[i]);
  for (int i = 0, e = npacked(); i < e; ++i) r.hess_[i] = std::conj(hess_[i]);
  return r;
}

Jet2 Jet2::compose(cd f0, cd f1, cd f2) const {
  Jet2 r(dim_);
  r.val_ = f0;
  for (int i = 0; i < dim_; ++i) r.grad_[i] = f1 * grad_[i];
  int p = 0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j, ++p) r.hess_[p] = f1 * hess_[p] + f2 * grad_[i] * grad_[j];
  return r;
}

Jet2 compose2(const Jet2& a, const Jet2& b, cd f0, cd fa, cd fb, cd faa, cd fab, cd fbb) {
  Jet2 r(a.dim_);
  r.val_ = f0;
  for (int i = 0; i < a.dim_; ++i) r.grad_[i] = fa * a.grad_[i] + fb * b.grad_[i];
  int p = 0;
  for (int i = 0; i < a.dim_; ++i)
    for (int j = i; j < a.dim_; ++j, ++p)
      r.hess_[p] = fa * a.hess_[p] + fb * b.hess_[p] + faa * a.grad_[i] * a.grad_[j] +
                   fab * (a.grad_[i] * b.grad_[j] + b.grad_[i] * a.grad_[j]) +
                   fbb * b.grad_[i] * b.grad_[j];
  return r;
}

Jet2 divide(const Jet2& a, const Jet2& b) {
  const cd v = b.value();
  if (v == cd(0.0)) throw DomainError("division by zero");
  const cd inv = 1.0 / v;
  return a * b.compose(inv, -inv * inv, 2.0 * inv * inv * inv);
}

}  // namespace weyl
