#include "weyl/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "weyl/eigensystem.hpp"
#include "weyl/errors.hpp"

namespace weyl {

using nlohmann::json;

// ---------------------------------------------------------------- ExprMatrix

ExprMatrix ExprMatrix::identity(int m, Expr diag) {
  ExprMatrix out(m, m);
  for (int i = 0; i < m; ++i) out(i, i) = diag;
  return out;
}

ExprMatrix ExprMatrix::adjoint() const {
  ExprMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = conjugate((*this)(i, j));
  return out;
}

CMat ExprMatrix::evaluate(std::span<const double> point) const {
  CMat out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = weyl::evaluate((*this)(i, j), point);
  return out;
}

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) {
  ExprMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Expr s;
      for (int k = 0; k < a.cols(); ++k) s = s + a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

ExprMatrix operator*(const Expr& s, const ExprMatrix& a) {
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

ExprMatrix differentiate(const ExprMatrix& a, int k, int n) {
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = differentiate(a(i, j), k, n);
  return out;
}

// -------------------------------------------------------------- construction

OperatorSpec make_symbol_spec(std::string name, int n, ExprMatrix A1, ExprMatrix A0) {
  OperatorSpec s;
  s.name = std::move(name);
  s.n = n;
  s.m = A1.rows();
  s.A1 = A1;
  s.A0 = A0;
  s.form = SymbolForm{std::move(A1), std::move(A0)};
  return s;
}

OperatorSpec make_torus_spec(std::string name, int n, std::vector<ExprMatrix> C, ExprMatrix V) {
  OperatorSpec s;
  s.name = std::move(name);
  s.n = n;
  s.m = V.rows();
  ExprMatrix A1(s.m, s.m);
  ExprMatrix div(s.m, s.m);
  for (int a = 0; a < n; ++a) {
    A1 = A1 + Expr::p(a + 1) * C[a];
    div = div + differentiate(C[a], a, n);
  }
  s.A1 = A1;
  s.A0 = V - Expr::constant(cd(0.0, 0.5)) * div;
  s.form = TorusForm{std::move(C), std::move(V)};
  return s;
}

// ---------------------------------------------------------------- MatrixJet

CMat MatrixJet::value() const {
  CMat out(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) out(i, j) = (*this)(i, j).value();
  return out;
}

CMat MatrixJet::grad(int k) const {
  CMat out(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) out(i, j) = (*this)(i, j).grad(k);
  return out;
}

CMat MatrixJet::hess(int k, int l) const {
  CMat out(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) out(i, j) = (*this)(i, j).hess(k, l);
  return out;
}

CMat MatrixJet::mixed_trace() const {
  const int n = vars_ / 2;
  CMat out = CMat::Zero(m_, m_);
  for (int a = 0; a < n; ++a) out += hess(a, n + a);
  return out;
}

// ---------------------------------------------------------------- evaluation

namespace {

MatrixJet jet_matrix(const ExprMatrix& e, std::span<const double> pt, int vars) {
  MatrixJet out(e.rows(), vars);
  for (int i = 0; i < e.rows(); ++i)
    for (int j = 0; j < e.cols(); ++j) out(i, j) = eval_jet2(e(i, j), pt);
  return out;
}

}  // namespace

SymbolJet symbol_at(const OperatorSpec& spec, std::span<const double> x,
                    std::span<const double> xi) {
  const int n = spec.n;
  if (static_cast<int>(x.size()) != n || static_cast<int>(xi.size()) != n)
    throw DimensionMismatch("point has wrong dimension for n = " + std::to_string(n));
  double r = 0.0;
  for (double v : xi) r += v * v;
  if (r == 0.0) throw ZeroCovector("principal symbol requested at xi = 0");

  SymbolJet sj;
  sj.n = n;
  sj.m = spec.m;
  sj.point.assign(x.begin(), x.end());
  sj.point.insert(sj.point.end(), xi.begin(), xi.end());
  const MatrixJet raw = jet_matrix(spec.A1, sj.point, 2 * n);
  sj.A1 = MatrixJet(spec.m, 2 * n);
  for (int i = 0; i < spec.m; ++i)
    for (int j = i; j < spec.m; ++j) {
      Jet2 s = (raw(i, j) + raw(j, i).conj()) * 0.5;
      sj.A1(i, j) = s;
      sj.A1(j, i) = s.conj();
    }
  sj.A0 = jet_matrix(spec.A0, sj.point, 2 * n);
  return sj;
}

CMat subprincipal(const SymbolJet& sj, double tol) {
  const CMat A0 = sj.A0.value();
  const CMat out = A0 + cd(0.0, 0.5) * sj.A1.mixed_trace();
  const double scale = std::max({1.0, max_abs(A0), max_abs(sj.A1.value())});
  const double drift = hermitian_defect(out);
  if (drift > tol * scale) {
    std::ostringstream os;
    os << "subprincipal symbol deviates from Hermitian by " << drift;
    throw HermiticityDrift(os.str());
  }
  return 0.5 * (out + out.adjoint());
}

// ---------------------------------------------------------------- sampling

namespace {

double radical_inverse(int i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace

std::vector<PhaseSample> halton_samples(int n, int count) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<PhaseSample> out;
  out.reserve(count);
  for (int i = 1; i <= count; ++i) {
    PhaseSample s;
    for (int a = 0; a < n; ++a) s.x.push_back(two_pi * radical_inverse(i, kPrimes[a]));
    const double u = radical_inverse(i, kPrimes[n]);
    const double w = n > 2 ? radical_inverse(i, kPrimes[n + 1]) : 0.0;
    const double z = n > 3 ? radical_inverse(i, kPrimes[n + 2]) : 0.0;
    if (n == 2) {
      s.xi = {std::cos(two_pi * u), std::sin(two_pi * u)};
    } else if (n == 3) {
      const double c = 2.0 * u - 1.0, r = std::sqrt(1.0 - c * c);
      s.xi = {r * std::cos(two_pi * w), r * std::sin(two_pi * w), c};
    } else {
      const double r1 = std::sqrt(u), r2 = std::sqrt(1.0 - u);
      s.xi = {r1 * std::cos(two_pi * w), r1 * std::sin(two_pi * w), r2 * std::cos(two_pi * z),
              r2 * std::sin(two_pi * z)};
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- validation

namespace {

std::string entry_path(const std::string& field, int i, int j) {
  return field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

void check_indices(const ExprMatrix& e, const std::string& field, int n, bool allow_p) {
  for (int i = 0; i < e.rows(); ++i)
    for (int j = 0; j < e.cols(); ++j) {
      if (e(i, j).max_index() > n)
        throw ValidationError(entry_path(field, i, j),
                              "references a variable beyond n = " + std::to_string(n));
      if (!allow_p && e(i, j).depends_on_momentum())
        throw ValidationError(entry_path(field, i, j), "must not depend on p");
    }
}

std::vector<double> join(const std::vector<double>& x, const std::vector<double>& xi,
                         double t = 1.0) {
  std::vector<double> pt = x;
  for (double v : xi) pt.push_back(t * v);
  return pt;
}

CMat eval_checked(const ExprMatrix& e, const std::vector<double>& pt, const std::string& field) {
  try {
    return e.evaluate(pt);
  } catch (const DomainError& err) {
    throw ValidationError(field, std::string("evaluation failed: ") + err.what());
  }
}

void check_hermitian(const CMat& a, const std::string& field, double tol) {
  const double d = hermitian_defect(a);
  if (d > tol * std::max(1.0, max_abs(a))) {
    std::ostringstream os;
    os << "not Hermitian (defect " << d << ")";
    throw ValidationError(field, os.str());
  }
}

}  // namespace

void validate(const OperatorSpec& spec, const ValidationOptions& opt) {
  const int n = spec.n, m = spec.m;
  if (n < 2 || n > 4) throw ValidationError("n", "must lie in [2, 4]");
  if (m < 2 || m > kMaxSystem) throw ValidationError("m", "must lie in [2, 8]");

  if (spec.is_torus()) {
    const TorusForm& t = spec.torus();
    for (int a = 0; a < n; ++a) check_indices(t.C[a], "C[" + std::to_string(a) + "]", n, false);
    check_indices(t.V, "V", n, false);
  } else {
    check_indices(spec.A1, "A1", n, true);
    check_indices(spec.A0, "A0", n, true);
  }

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const PhaseSample& s : halton_samples(n, opt.samples)) {
    const std::vector<double> pt = join(s.x, s.xi);
    const CMat A1 = eval_checked(spec.A1, pt, "A1");
    const CMat A0 = eval_checked(spec.A0, pt, "A0");
    const double scale = std::max(1.0, max_abs(A1));

    if (spec.is_torus()) {
      const TorusForm& t = spec.torus();
      for (int a = 0; a < n; ++a)
        check_hermitian(t.C[a].evaluate(pt), "C[" + std::to_string(a) + "]", opt.hermitian_tol);
      check_hermitian(t.V.evaluate(pt), "V", opt.hermitian_tol);
    } else {
      check_hermitian(A1, "A1", opt.hermitian_tol);
    }

    for (double tt : {0.5, 2.0, 7.0}) {
      const std::vector<double> ps = join(s.x, s.xi, tt);
      const double d1 = max_abs(eval_checked(spec.A1, ps, "A1") - tt * A1);
      if (d1 > opt.homogeneity_tol * tt * scale)
        throw ValidationError("A1", "not homogeneous of degree 1 in p");
      const double d0 = max_abs(eval_checked(spec.A0, ps, "A0") - A0);
      if (d0 > opt.homogeneity_tol * std::max(1.0, max_abs(A0)))
        throw ValidationError("A0", "not homogeneous of degree 0 in p");
    }

    for (int a = 0; a < n; ++a) {
      std::vector<double> ps = pt;
      ps[a] += two_pi;
      if (max_abs(eval_checked(spec.A1, ps, "A1") - A1) > 1e-10 * scale)
        throw ValidationError("A1", "not 2*pi periodic in x" + std::to_string(a + 1));
      if (max_abs(eval_checked(spec.A0, ps, "A0") - A0) > 1e-10 * std::max(1.0, max_abs(A0)))
        throw ValidationError("A0", "not 2*pi periodic in x" + std::to_string(a + 1));
    }

    const HermitianEigen he = jacobi_eigen(A1);
    const double radius = std::max(std::abs(he.values(0)), std::abs(he.values(m - 1)));
    for (int k = 0; k < m; ++k)
      if (std::abs(he.values(k)) < opt.zero_rel * std::max(radius, 1e-300)) {
        std::ostringstream os;
        os << "principal symbol has eigenvalue " << he.values(k) << " at x = (" << s.x[0]
           << ", ...), |xi| = 1";
        throw EllipticityError(os.str());
      }
    for (int k = 0; k + 1 < m; ++k) {
      const double gap = he.values(k + 1) - he.values(k);
      if (gap < opt.gap_rel * radius) {
        std::ostringstream os;
        os << "eigenvalues " << he.values(k) << " and " << he.values(k + 1)
           << " are not separated (gap " << gap << ")";
        throw MultiplicityError(os.str());
      }
    }

    subprincipal(symbol_at(spec, s.x, s.xi), opt.hermitian_tol);
  }
}

// ---------------------------------------------------------------------- JSON

namespace {

Expr parse_entry(const json& v, const std::string& field) {
  if (v.is_number()) return Expr::constant(v.get<double>());
  if (!v.is_string()) throw ValidationError(field, "expected an expression string or number");
  try {
    return parse(v.get<std::string>());
  } catch (const SyntaxError& err) {
    throw ValidationError(field, err.what());
  } catch (const UnknownIdentifier& err) {
    throw ValidationError(field, err.what());
  }
}

ExprMatrix parse_matrix(const json& j, const std::string& field, int m, bool allow_scalar) {
  if (allow_scalar && (j.is_string() || j.is_number()))
    return ExprMatrix::identity(m, parse_entry(j, field));
  if (!j.is_array() || static_cast<int>(j.size()) != m)
    throw ValidationError(field, "expected " + std::to_string(m) + " rows");
  ExprMatrix out(m, m);
  for (int i = 0; i < m; ++i) {
    const json& row = j[i];
    const std::string rf = field + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != m)
      throw ValidationError(rf, "expected " + std::to_string(m) + " entries");
    for (int k = 0; k < m; ++k) out(i, k) = parse_entry(row[k], entry_path(field, i, k));
  }
  return out;
}

int get_int(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(key, "missing");
  if (!j[key].is_number_integer()) throw ValidationError(key, "expected an integer");
  return j[key].get<int>();
}

}  // namespace

OperatorSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "expected an object");
  const int n = get_int(j, "n");
  const int m = get_int(j, "m");
  if (n < 2 || n > 4) throw ValidationError("n", "must lie in [2, 4]");
  if (m < 2 || m > kMaxSystem) throw ValidationError("m", "must lie in [2, 8]");
  const std::string name = j.value("name", std::string("operator"));
  const std::string form = j.value("form", std::string("symbol"));

  if (form == "symbol") {
    if (!j.contains("A1")) throw ValidationError("A1", "missing");
    ExprMatrix A1 = parse_matrix(j["A1"], "A1", m, false);
    ExprMatrix A0 = j.contains("A0") ? parse_matrix(j["A0"], "A0", m, true) : ExprMatrix(m, m);
    return make_symbol_spec(name, n, std::move(A1), std::move(A0));
  }
  if (form == "torus_differential") {
    if (!j.contains("C") || !j["C"].is_array() || static_cast<int>(j["C"].size()) != n)
      throw ValidationError("C", "expected " + std::to_string(n) + " coefficient matrices");
    std::vector<ExprMatrix> C;
    for (int a = 0; a < n; ++a)
      C.push_back(parse_matrix(j["C"][a], "C[" + std::to_string(a) + "]", m, false));
    ExprMatrix V = j.contains("V") ? parse_matrix(j["V"], "V", m, true) : ExprMatrix(m, m);
    return make_torus_spec(name, n, std::move(C), std::move(V));
  }
  throw ValidationError("form", "must be \"symbol\" or \"torus_differential\"");
}

OperatorSpec load_spec(std::string_view text, const ValidationOptions& opt) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ValidationError("$", std::string("malformed JSON: ") + err.what());
  }
  OperatorSpec spec = spec_from_json(j);
  validate(spec, opt);
  return spec;
}

OperatorSpec load_spec_file(const std::string& path, const ValidationOptions& opt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_spec(ss.str(), opt);
}

namespace {

json matrix_json(const ExprMatrix& e) {
  json rows = json::array();
  for (int i = 0; i < e.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < e.cols(); ++j) row.push_back(print(e(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json spec_to_json(const OperatorSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["n"] = spec.n;
  j["m"] = spec.m;
  if (spec.is_torus()) {
    j["form"] = "torus_differential";
    json C = json::array();
    for (const ExprMatrix& c : spec.torus().C) C.push_back(matrix_json(c));
    j["C"] = C;
    j["V"] = matrix_json(spec.torus().V);
  } else {
    j["form"] = "symbol";
    j["A1"] = matrix_json(spec.A1);
    j["A0"] = matrix_json(spec.A0);
  }
  return j;
}

}  // namespace weyl
