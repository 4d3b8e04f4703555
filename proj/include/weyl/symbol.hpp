// Operator declarations and pointwise symbol evaluation.
//
// An operator is declared either through its principal and lower-order
// symbols (A1 homogeneous of degree 1 in p, A0 of degree 0), or as a
// first-order differential operator on the flat torus
//
//     A = 1/2 sum_a (C^a(x) D_a + D_a C^a(x)) + V(x),   D_a = -i d/dx^a,
//
// whose symbols are A1 = C^a p_a and A0 = V - (i/2) sum_a dC^a/dx^a, so that
// the subprincipal symbol equals V.  Coordinates are always those of the flat
// torus R^n / (2 pi Z)^n.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "weyl/expr.hpp"
#include "weyl/linalg.hpp"

namespace weyl {

class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  static ExprMatrix identity(int m, Expr diag = Expr::constant(1.0));

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  Expr& operator()(int i, int j) { return e_[i * cols_ + j]; }
  const Expr& operator()(int i, int j) const { return e_[i * cols_ + j]; }

  ExprMatrix adjoint() const;
  CMat evaluate(std::span<const double> point) const;

  friend ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator*(const Expr& s, const ExprMatrix& a);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> e_;
};

/// Entry-wise partial derivative with respect to coordinate k (0-based over 2n).
ExprMatrix differentiate(const ExprMatrix& a, int k, int n);

struct SymbolForm {
  ExprMatrix A1;
  ExprMatrix A0;
};

struct TorusForm {
  std::vector<ExprMatrix> C;  // n Hermitian coefficient matrices
  ExprMatrix V;
};

struct OperatorSpec {
  std::string name;
  int n = 2;
  int m = 2;
  std::variant<SymbolForm, TorusForm> form;

  /// Principal and lower-order symbols; equal to `form` for symbol
  /// declarations, derived from C and V for torus declarations.
  ExprMatrix A1;
  ExprMatrix A0;

  bool is_torus() const { return std::holds_alternative<TorusForm>(form); }
  const TorusForm& torus() const { return std::get<TorusForm>(form); }
};

OperatorSpec make_symbol_spec(std::string name, int n, ExprMatrix A1, ExprMatrix A0);
OperatorSpec make_torus_spec(std::string name, int n, std::vector<ExprMatrix> C, ExprMatrix V);

/// Matrix of second-order jets.
class MatrixJet {
 public:
  MatrixJet() = default;
  MatrixJet(int m, int vars) : m_(m), vars_(vars), e_(m * m, Jet2(vars)) {}

  int size() const noexcept { return m_; }
  int vars() const noexcept { return vars_; }
  Jet2& operator()(int i, int j) { return e_[i * m_ + j]; }
  const Jet2& operator()(int i, int j) const { return e_[i * m_ + j]; }

  CMat value() const;
  CMat grad(int k) const;
  CMat hess(int k, int l) const;
  /// sum_a d^2/dx^a dp_a
  CMat mixed_trace() const;

 private:
  int m_ = 0;
  int vars_ = 0;
  std::vector<Jet2> e_;
};

struct SymbolJet {
  int n = 0;
  int m = 0;
  std::vector<double> point;  // (x, p)
  MatrixJet A1;               // Hermitian part of the principal symbol
  MatrixJet A0;
};

SymbolJet symbol_at(const OperatorSpec& spec, std::span<const double> x,
                    std::span<const double> xi);

/// A0 + (i/2) sum_a d^2 A1 / dx^a dp_a.  Throws HermiticityDrift when the
/// result is not Hermitian within `tol` (relative).
CMat subprincipal(const SymbolJet& sj, double tol = 1e-12);

struct ValidationOptions {
  int samples = 50;
  double hermitian_tol = 1e-12;
  double homogeneity_tol = 1e-10;
  double gap_rel = 1e-6;
  double zero_rel = 1e-10;
};

/// Checks Hermiticity, homogeneity, periodicity, ellipticity, simplicity and
/// self-adjointness on a deterministic Halton sample of the torus times the
/// unit sphere.
void validate(const OperatorSpec& spec, const ValidationOptions& opt = {});

OperatorSpec spec_from_json(const nlohmann::json& j);
OperatorSpec load_spec(std::string_view text, const ValidationOptions& opt = {});
OperatorSpec load_spec_file(const std::string& path, const ValidationOptions& opt = {});
nlohmann::json spec_to_json(const OperatorSpec& spec);

/// Deterministic sample points (x in the torus, unit covector).
struct PhaseSample {
  std::vector<double> x;
  std::vector<double> xi;
};
std::vector<PhaseSample> halton_samples(int n, int count);

}  // namespace weyl
