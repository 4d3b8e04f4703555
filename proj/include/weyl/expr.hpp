// Scalar complex expressions in the phase-space variables x1..xn, p1..pn.
//
// Grammar (whitespace insignificant, newlines allowed):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' integer)?        integer may carry a sign or be
//                                            wrapped in parentheses: x1^(-2)
//   primary := number | 'i' | 'pi' | variable | call | '(' expr ')'
//   call    := ('sin' | 'cos' | 'exp' | 'sqrt') '(' expr ')'
//            | 'atan2' '(' expr ',' expr ')'
//   variable:= 'x' k | 'p' k                 k = 1, 2, ...
//
// `i` is reserved for the imaginary unit.  Exponents are integers only.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "weyl/jet.hpp"

namespace weyl {

enum class Func { Sin, Cos, Exp, Sqrt, Atan2 };

class Expr {
 public:
  enum class Kind { Const, VarX, VarP, Neg, Add, Sub, Mul, Div, Pow, Call };

  struct Node;

  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Expr constant(cd value);
  static Expr x(int alpha);  // 1-based
  static Expr p(int alpha);  // 1-based
  static Expr call(Func f, Expr a);
  static Expr atan2(Expr y, Expr x);
  static Expr pow(Expr base, int exponent);

  Kind kind() const;
  const Node& node() const { return *node_; }

  /// Largest variable index referenced (0 when the expression is constant).
  int max_index() const;
  bool depends_on_momentum() const;
  /// True if this is the literal constant `value`.
  bool is_constant(cd value) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Kind kind;
  cd value{};       // Const
  int index = 0;    // VarX / VarP (1-based), Pow exponent
  Func func{};      // Call
  std::shared_ptr<const Node> a, b;  // operands
  int max_index = 0;
  bool momentum = false;
};

Expr parse(std::string_view source);

/// Fully parenthesised text that parses back to an equivalent expression.
std::string print(const Expr& e);

/// Value at `point` = (x^1..x^n, xi_1..xi_n).
cd evaluate(const Expr& e, std::span<const double> point);

/// Value, gradient and Hessian at `point`.
Jet2 eval_jet2(const Expr& e, std::span<const double> point);

/// Complex conjugate, assuming every variable is real.
Expr conjugate(const Expr& e);

/// Partial derivative with respect to coordinate `k` (0-based over 2n).
/// Built structurally with constant folding only; used where a derivative
/// has to be carried as an expression (unitary conjugation of operators).
Expr differentiate(const Expr& e, int k, int n);

}  // namespace weyl
