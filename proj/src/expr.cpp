#include "weyl/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <vector>

#include "weyl/errors.hpp"

namespace weyl {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr make_node(Node n) {
  n.max_index = 0;
  n.momentum = false;
  for (const NodePtr& c : {n.a, n.b}) {
    if (!c) continue;
    n.max_index = std::max(n.max_index, c->max_index);
    n.momentum = n.momentum || c->momentum;
  }
  if (n.kind == Expr::Kind::VarX || n.kind == Expr::Kind::VarP) {
    n.max_index = n.index;
    n.momentum = n.kind == Expr::Kind::VarP;
  }
  return std::make_shared<const Node>(std::move(n));
}

NodePtr const_node(cd v) {
  Node n{};
  n.kind = Expr::Kind::Const;
  n.value = v;
  return make_node(std::move(n));
}

NodePtr unary_node(Expr::Kind k, NodePtr a) {
  Node n{};
  n.kind = k;
  n.a = std::move(a);
  return make_node(std::move(n));
}

NodePtr binary_node(Expr::Kind k, NodePtr a, NodePtr b) {
  Node n{};
  n.kind = k;
  n.a = std::move(a);
  n.b = std::move(b);
  return make_node(std::move(n));
}

NodePtr var_node(Expr::Kind k, int alpha) {
  Node n{};
  n.kind = k;
  n.index = alpha;
  return make_node(std::move(n));
}

NodePtr pow_node(NodePtr a, int e) {
  Node n{};
  n.kind = Expr::Kind::Pow;
  n.index = e;
  n.a = std::move(a);
  return make_node(std::move(n));
}

NodePtr call_node(Func f, NodePtr a, NodePtr b = nullptr) {
  Node n{};
  n.kind = Expr::Kind::Call;
  n.func = f;
  n.a = std::move(a);
  n.b = std::move(b);
  return make_node(std::move(n));
}

bool is_const(const NodePtr& p) { return p->kind == Expr::Kind::Const; }
bool is_value(const NodePtr& p, cd v) { return is_const(p) && p->value == v; }

// ---------------------------------------------------------------- scanner

enum class Tok { End, Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Bad };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
    tok_ = Token{Tok::End, "", 0.0, line_, col_};
    if (pos_ >= src_.size()) return;
    const char c = src_[pos_];
    const std::size_t start = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '.'))
        bump();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t look = pos_ + 1;
        if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
        if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
          while (pos_ < look) bump();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            bump();
        }
      }
      tok_.kind = Tok::Number;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      char* end = nullptr;
      tok_.number = std::strtod(tok_.text.c_str(), &end);
      if (end != tok_.text.c_str() + tok_.text.size()) tok_.kind = Tok::Bad;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        bump();
      tok_.kind = Tok::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    bump();
    tok_.text = std::string(1, c);
    switch (c) {
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '/': tok_.kind = Tok::Slash; break;
      case '^': tok_.kind = Tok::Caret; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      case ',': tok_.kind = Tok::Comma; break;
      default: tok_.kind = Tok::Bad; break;
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

// ----------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : sc_(src) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    if (sc_.peek().kind != Tok::End) fail("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = sc_.peek();
    throw SyntaxError(t.line, t.column, expected);
  }

  void expect(Tok k, const char* what) {
    if (sc_.peek().kind != k) fail(what);
    sc_.take();
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (sc_.peek().kind == Tok::Plus || sc_.peek().kind == Tok::Minus) {
      const bool plus = sc_.take().kind == Tok::Plus;
      NodePtr rhs = term();
      lhs = binary_node(plus ? Expr::Kind::Add : Expr::Kind::Sub, lhs, rhs);
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (sc_.peek().kind == Tok::Star || sc_.peek().kind == Tok::Slash) {
      const bool mul = sc_.take().kind == Tok::Star;
      NodePtr rhs = unary();
      lhs = binary_node(mul ? Expr::Kind::Mul : Expr::Kind::Div, lhs, rhs);
    }
    return lhs;
  }

  NodePtr unary() {
    if (sc_.peek().kind == Tok::Minus) {
      sc_.take();
      return unary_node(Expr::Kind::Neg, unary());
    }
    if (sc_.peek().kind == Tok::Plus) {
      sc_.take();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (sc_.peek().kind != Tok::Caret) return base;
    sc_.take();
    return pow_node(base, integer_exponent());
  }

  int integer_exponent() {
    bool paren = false;
    if (sc_.peek().kind == Tok::LParen) {
      sc_.take();
      paren = true;
    }
    int sign = 1;
    if (sc_.peek().kind == Tok::Minus || sc_.peek().kind == Tok::Plus) {
      if (sc_.take().kind == Tok::Minus) sign = -1;
    }
    const Token& t = sc_.peek();
    if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos)
      fail("integer exponent");
    const double v = t.number;
    if (v > 64) fail("integer exponent no larger than 64");
    sc_.take();
    if (paren) expect(Tok::RParen, "')'");
    return sign * static_cast<int>(v);
  }

  NodePtr primary() {
    const Token t = sc_.peek();
    switch (t.kind) {
      case Tok::Number:
        sc_.take();
        return const_node(t.number);
      case Tok::LParen: {
        sc_.take();
        NodePtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        sc_.take();
        return identifier(t);
      default:
        fail("operand");
    }
  }

  NodePtr identifier(const Token& t) {
    const std::string& s = t.text;
    if (s == "i") return const_node(cd(0.0, 1.0));
    if (s == "pi") return const_node(M_PI);
    if (s == "sin" || s == "cos" || s == "exp" || s == "sqrt") {
      const Func f = s == "sin" ? Func::Sin : s == "cos" ? Func::Cos : s == "exp" ? Func::Exp
                                                                                  : Func::Sqrt;
      expect(Tok::LParen, "'(' after function name");
      NodePtr a = expr();
      expect(Tok::RParen, "')'");
      return call_node(f, a);
    }
    if (s == "atan2") {
      expect(Tok::LParen, "'(' after function name");
      NodePtr y = expr();
      expect(Tok::Comma, "','");
      NodePtr x = expr();
      expect(Tok::RParen, "')'");
      return call_node(Func::Atan2, y, x);
    }
    if (s.size() >= 2 && (s[0] == 'x' || s[0] == 'p') &&
        s.find_first_not_of("0123456789", 1) == std::string::npos && s[1] != '0') {
      const int alpha = std::stoi(s.substr(1));
      return var_node(s[0] == 'x' ? Expr::Kind::VarX : Expr::Kind::VarP, alpha);
    }
    throw UnknownIdentifier("'" + s + "' at " + std::to_string(t.line) + ":" +
                            std::to_string(t.column));
  }

  Scanner sc_;
};

// ---------------------------------------------------------------- printer

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Const: {
      const cd v = n.value;
      if (v.imag() == 0.0) {
        out += v.real() < 0 || std::signbit(v.real()) ? "(" + fmt_real(v.real()) + ")"
                                                      : fmt_real(v.real());
      } else {
        out += "(" + fmt_real(v.real()) + "+(" + fmt_real(v.imag()) + ")*i)";
      }
      return;
    }
    case K::VarX: out += "x" + std::to_string(n.index); return;
    case K::VarP: out += "p" + std::to_string(n.index); return;
    case K::Neg:
      out += "(-";
      print_node(*n.a, out);
      out += ")";
      return;
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      const char op = n.kind == K::Add ? '+' : n.kind == K::Sub ? '-' : n.kind == K::Mul ? '*' : '/';
      out += "(";
      print_node(*n.a, out);
      out += op;
      print_node(*n.b, out);
      out += ")";
      return;
    }
    case K::Pow:
      out += "(";
      print_node(*n.a, out);
      out += "^(" + std::to_string(n.index) + "))";
      return;
    case K::Call: {
      static const char* names[] = {"sin", "cos", "exp", "sqrt", "atan2"};
      out += names[static_cast<int>(n.func)];
      out += "(";
      print_node(*n.a, out);
      if (n.b) {
        out += ",";
        print_node(*n.b, out);
      }
      out += ")";
      return;
    }
  }
}

// ------------------------------------------------------------- evaluation

cd ipow(cd base, int e) {
  cd result = 1.0;
  cd b = base;
  unsigned k = static_cast<unsigned>(e < 0 ? -e : e);
  while (k) {
    if (k & 1u) result *= b;
    b *= b;
    k >>= 1u;
  }
  if (e < 0) {
    if (base == cd(0.0)) throw DomainError("negative power of zero");
    return 1.0 / result;
  }
  return result;
}

int coord_index(const Node& n, int nvars) {
  const int half = nvars / 2;
  if (n.index > half)
    throw DimensionMismatch("variable " + std::string(n.kind == Expr::Kind::VarX ? "x" : "p") +
                            std::to_string(n.index) + " beyond dimension n=" +
                            std::to_string(half));
  return (n.kind == Expr::Kind::VarX ? 0 : half) + n.index - 1;
}

void check_sqrt_arg(cd a) {
  if (a.imag() == 0.0 && a.real() < 0.0) throw DomainError("sqrt of negative real");
}

double real_arg(cd a, const char* what) {
  if (std::abs(a.imag()) > 1e-14 * std::max(1.0, std::abs(a.real())))
    throw DomainError(std::string(what) + " requires real arguments");
  return a.real();
}

cd eval_value(const Node& n, std::span<const double> pt) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Const: return n.value;
    case K::VarX:
    case K::VarP: return pt[coord_index(n, static_cast<int>(pt.size()))];
    case K::Neg: return -eval_value(*n.a, pt);
    case K::Add: return eval_value(*n.a, pt) + eval_value(*n.b, pt);
    case K::Sub: return eval_value(*n.a, pt) - eval_value(*n.b, pt);
    case K::Mul: return eval_value(*n.a, pt) * eval_value(*n.b, pt);
    case K::Div: {
      const cd d = eval_value(*n.b, pt);
      if (d == cd(0.0)) throw DomainError("division by zero");
      return eval_value(*n.a, pt) / d;
    }
    case K::Pow: return ipow(eval_value(*n.a, pt), n.index);
    case K::Call: {
      const cd a = eval_value(*n.a, pt);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return std::exp(a);
        case Func::Sqrt: check_sqrt_arg(a); return std::sqrt(a);
        case Func::Atan2: {
          const double y = real_arg(a, "atan2");
          const double x = real_arg(eval_value(*n.b, pt), "atan2");
          if (x == 0.0 && y == 0.0) throw DomainError("atan2(0, 0)");
          return std::atan2(y, x);
        }
      }
    }
  }
  return 0.0;
}

Jet2 eval_jet(const Node& n, std::span<const double> pt) {
  using K = Expr::Kind;
  const int dim = static_cast<int>(pt.size());
  switch (n.kind) {
    case K::Const: return Jet2::constant(dim, n.value);
    case K::VarX:
    case K::VarP: {
      const int k = coord_index(n, dim);
      return Jet2::variable(dim, k, pt[k]);
    }
    case K::Neg: return -eval_jet(*n.a, pt);
    case K::Add: return eval_jet(*n.a, pt) + eval_jet(*n.b, pt);
    case K::Sub: return eval_jet(*n.a, pt) - eval_jet(*n.b, pt);
    case K::Mul: return eval_jet(*n.a, pt) * eval_jet(*n.b, pt);
    case K::Div: return divide(eval_jet(*n.a, pt), eval_jet(*n.b, pt));
    case K::Pow: {
      const Jet2 a = eval_jet(*n.a, pt);
      const int k = n.index;
      if (k == 0) return Jet2::constant(dim, 1.0);
      const cd v = a.value();
      if (k < 0 && v == cd(0.0)) throw DomainError("negative power of zero");
      return a.compose(ipow(v, k), double(k) * ipow(v, k - 1),
                       double(k) * double(k - 1) * (k == 1 ? cd(0.0) : ipow(v, k - 2)));
    }
    case K::Call: {
      const Jet2 a = eval_jet(*n.a, pt);
      const cd v = a.value();
      switch (n.func) {
        case Func::Sin: return a.compose(std::sin(v), std::cos(v), -std::sin(v));
        case Func::Cos: return a.compose(std::cos(v), -std::sin(v), -std::cos(v));
        case Func::Exp: {
          const cd e = std::exp(v);
          return a.compose(e, e, e);
        }
        case Func::Sqrt: {
          check_sqrt_arg(v);
          if (v == cd(0.0)) throw DomainError("sqrt is not differentiable at 0");
          const cd s = std::sqrt(v);
          return a.compose(s, 0.5 / s, -0.25 / (s * v));
        }
        case Func::Atan2: {
          const Jet2 b = eval_jet(*n.b, pt);
          const double y = real_arg(v, "atan2");
          const double x = real_arg(b.value(), "atan2");
          const double r2 = x * x + y * y;
          if (r2 == 0.0) throw DomainError("atan2(0, 0)");
          const double r4 = r2 * r2;
          // f(y, x): f_y = x/r2, f_x = -y/r2
          return compose2(a, b, std::atan2(y, x), x / r2, -y / r2, -2.0 * x * y / r4,
                          (y * y - x * x) / r4, 2.0 * x * y / r4);
        }
      }
    }
  }
  return Jet2(dim);
}

// ----------------------------------------------------- folding builders

NodePtr add(NodePtr a, NodePtr b) {
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return const_node(a->value + b->value);
  return binary_node(Expr::Kind::Add, a, b);
}

NodePtr neg(NodePtr a) {
  if (is_const(a)) return const_node(-a->value);
  if (a->kind == Expr::Kind::Neg) return a->a;
  return unary_node(Expr::Kind::Neg, a);
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return neg(b);
  if (is_const(a) && is_const(b)) return const_node(a->value - b->value);
  return binary_node(Expr::Kind::Sub, a, b);
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_value(a, 0.0) || is_value(b, 0.0)) return const_node(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return const_node(a->value * b->value);
  return binary_node(Expr::Kind::Mul, a, b);
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_value(b, 1.0)) return a;
  if (is_value(a, 0.0) && !is_value(b, 0.0)) return const_node(0.0);
  return binary_node(Expr::Kind::Div, a, b);
}

NodePtr powi(NodePtr a, int e) {
  if (e == 0) return const_node(1.0);
  if (e == 1) return a;
  return pow_node(a, e);
}

NodePtr conj_node(const NodePtr& p) {
  using K = Expr::Kind;
  const Node& n = *p;
  switch (n.kind) {
    case K::Const: return n.value.imag() == 0.0 ? p : const_node(std::conj(n.value));
    case K::VarX:
    case K::VarP: return p;
    case K::Neg: return unary_node(K::Neg, conj_node(n.a));
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: return binary_node(n.kind, conj_node(n.a), conj_node(n.b));
    case K::Pow: return pow_node(conj_node(n.a), n.index);
    case K::Call: return call_node(n.func, conj_node(n.a), n.b ? conj_node(n.b) : nullptr);
  }
  return p;
}

NodePtr diff_node(const NodePtr& p, int k, int nhalf) {
  using K = Expr::Kind;
  const Node& n = *p;
  switch (n.kind) {
    case K::Const: return const_node(0.0);
    case K::VarX: return const_node(n.index - 1 == k ? 1.0 : 0.0);
    case K::VarP: return const_node(nhalf + n.index - 1 == k ? 1.0 : 0.0);
    case K::Neg: return neg(diff_node(n.a, k, nhalf));
    case K::Add: return add(diff_node(n.a, k, nhalf), diff_node(n.b, k, nhalf));
    case K::Sub: return sub(diff_node(n.a, k, nhalf), diff_node(n.b, k, nhalf));
    case K::Mul:
      return add(mul(diff_node(n.a, k, nhalf), n.b), mul(n.a, diff_node(n.b, k, nhalf)));
    case K::Div: {
      NodePtr num = sub(mul(diff_node(n.a, k, nhalf), n.b), mul(n.a, diff_node(n.b, k, nhalf)));
      return div(num, powi(n.b, 2));
    }
    case K::Pow:
      return mul(mul(const_node(double(n.index)), powi(n.a, n.index - 1)),
                 diff_node(n.a, k, nhalf));
    case K::Call: {
      NodePtr da = diff_node(n.a, k, nhalf);
      switch (n.func) {
        case Func::Sin: return mul(call_node(Func::Cos, n.a), da);
        case Func::Cos: return neg(mul(call_node(Func::Sin, n.a), da));
        case Func::Exp: return mul(p, da);
        case Func::Sqrt: return div(da, mul(const_node(2.0), p));
        case Func::Atan2: {
          NodePtr db = diff_node(n.b, k, nhalf);
          NodePtr num = sub(mul(n.b, da), mul(n.a, db));
          return div(num, add(powi(n.a, 2), powi(n.b, 2)));
        }
      }
    }
  }
  return const_node(0.0);
}

}  // namespace

// ------------------------------------------------------------ Expr members

Expr::Expr() : node_(const_node(0.0)) {}

Expr Expr::constant(cd value) { return Expr(const_node(value)); }
Expr Expr::x(int alpha) { return Expr(var_node(Kind::VarX, alpha)); }
Expr Expr::p(int alpha) { return Expr(var_node(Kind::VarP, alpha)); }
Expr Expr::call(Func f, Expr a) { return Expr(call_node(f, a.node_)); }
Expr Expr::atan2(Expr y, Expr x) { return Expr(call_node(Func::Atan2, y.node_, x.node_)); }
Expr Expr::pow(Expr base, int exponent) { return Expr(powi(base.node_, exponent)); }

Expr::Kind Expr::kind() const { return node_->kind; }
int Expr::max_index() const { return node_->max_index; }
bool Expr::depends_on_momentum() const { return node_->momentum; }
bool Expr::is_constant(cd value) const { return is_value(node_, value); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(div(a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(neg(a.node_)); }

Expr parse(std::string_view source) { return Expr(Parser(source).parse_all()); }

std::string print(const Expr& e) {
  std::string out;
  print_node(e.node(), out);
  return out;
}

cd evaluate(const Expr& e, std::span<const double> point) { return eval_value(e.node(), point); }

Jet2 eval_jet2(const Expr& e, std::span<const double> point) {
  if (point.size() % 2 != 0 || point.size() > static_cast<std::size_t>(kMaxVars))
    throw DimensionMismatch("phase-space point must have 2n <= " + std::to_string(kMaxVars) +
                            " coordinates");
  return eval_jet(e.node(), point);
}

Expr conjugate(const Expr& e) {
  return Expr(conj_node(std::make_shared<const Node>(e.node())));
}

Expr differentiate(const Expr& e, int k, int n) {
  return Expr(diff_node(std::make_shared<const Node>(e.node()), k, n));
}

}  // namespace weyl
