#include "weyl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "weyl/asymptotics.hpp"
#include "weyl/brackets.hpp"
#include "weyl/eigensystem.hpp"
#include "weyl/errors.hpp"
#include "weyl/flow.hpp"
#include "weyl/torus.hpp"
#include "weyl/wave_invariants.hpp"

namespace weyl {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;
constexpr const char* kNormalization =
    "dxi' = (2*pi)^(-n) dxi; a_global, b_global integrate a(x), b(x) over [0, 2*pi)^n";

struct Options {
  std::string config, out;
  int grid = 16;
  int sphere_order = 0;
  int K = 12;
  double lambda_max = 5.0;
  double mollifier_width = 0.0;
  int samples = 200;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int threads = 1;
  bool force = false;
  int j = 1;
  std::vector<double> point;
  double t_end = 10.0;
  int directions = 16;
  double t_max = 4.0 * kPi;
  bool drop_curvature = false;

  // set from the parser: was the flag given?
  bool tol_given = false, samples_given = false;
};

struct Loaded {
  OperatorSpec spec;
  std::string hash;
};

Loaded load(const Options& o) {
  if (o.config.empty()) throw ValidationError("--config", "a configuration file is required");
  std::ifstream in(o.config, std::ios::binary);
  if (!in) throw IoError("cannot read " + o.config);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return {load_spec(text), buf};
}

struct Run {
  std::string command;
  const Options& opt;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  json extra = json::object();

  void emit(const std::string& body, const std::string& hash, const json& tolerances) {
    if (opt.out.empty()) {
      out << body;
      return;
    }
    {
      std::ofstream f(opt.out, std::ios::binary);
      if (!f) throw IoError("cannot write " + opt.out);
      f << body;
      if (!f) throw IoError("write failed for " + opt.out);
    }
    json m;
    m["command"] = command;
    m["tool_version"] = kToolVersion;
    m["config"] = opt.config;
    m["config_hash"] = hash;
    m["seed"] = opt.seed;
    m["tolerances"] = tolerances;
    m["threads"] = opt.threads;
    m["normalization"] = kNormalization;
    m["output"] = opt.out;
    m["timing_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    const std::string path = opt.out + ".manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << m.dump(2) << '\n';
  }
};

std::vector<int> positive_indices(const OperatorSpec& spec) {
  const std::vector<double> x(spec.n, 0.0);
  std::vector<double> xi(spec.n, 0.0);
  xi[0] = 1.0;
  const EigenSystem es = decompose(symbol_at(spec, x, xi));
  std::vector<int> js;
  for (int j = 1; j <= es.m_plus; ++j) js.push_back(j);
  return js;
}

// ------------------------------------------------------------------ coeffs

int cmd_coeffs(Run& r) {
  const Loaded L = load(r.opt);
  CoeffOptions co;
  co.sphere_order = r.opt.sphere_order;
  co.drop_curvature = r.opt.drop_curvature;
  const AsymptoticCoeffs c = compute_coeffs(L.spec, r.opt.grid, co, r.opt.threads);
  json j = coeffs_to_json(c);
  j["operator"] = L.spec.name;
  j["tolerances"] = {{"imag_residue_limit", 1e-9}};
  r.emit(j.dump(2) + "\n", L.hash, j["tolerances"]);
  return 0;
}

// -------------------------------------------------------------- identities

struct Check {
  std::string name;
  double residual = 0;
  double tol = 0;
  bool pass() const { return residual < tol; }
};

std::vector<double> random_x(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

std::vector<double> random_xi(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> xi(n);
  double r = 0.0;
  for (double& v : xi) {
    v = g(rng);
    r += v * v;
  }
  const double s = u(rng) / std::sqrt(r);
  for (double& v : xi) v *= s;
  return xi;
}

// exp(i theta(x) H) with the reflection H = I - 2 u u^*, u = (1, ..., 1)/sqrt(m).
ExprMatrix probe_unitary(int n, int m) {
  Expr theta = Expr::constant(0.4) * Expr::call(Func::Sin, Expr::x(1));
  if (n >= 2) theta = theta + Expr::constant(0.2) * Expr::call(Func::Cos, Expr::x(2));
  const Expr c = Expr::call(Func::Cos, theta), s = Expr::call(Func::Sin, theta);
  ExprMatrix R(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double H = (a == b ? 1.0 : 0.0) - 2.0 / m;
      R(a, b) = Expr::constant(cd(0.0, H)) * s;
      if (a == b) R(a, b) = c + R(a, b);
    }
  return R;
}

int cmd_identities(Run& r) {
  const Loaded L = load(r.opt);
  const OperatorSpec& s = L.spec;
  const int n = s.n, m = s.m;
  const double tol = r.opt.tol_given ? r.opt.tol : 1e-10;
  const int samples = r.opt.samples;
  std::mt19937_64 rng(r.opt.seed);

  Check ortho{"eigenvector orthonormality", 0, tol};
  Check curv{"sum_j {v*, v} = 0", 0, tol};
  Check um1{"sum_j u_{-1}(0) = 0", 0, tol};
  Check u0{"sum_j u_0(0) = I", 0, tol};
  Check euler{"xi . h_xi = h", 0, tol};
  Check trace{"tr U_sub = -i{v*, v}", 0, tol};
  std::vector<std::vector<double>> xs;
  for (int k = 0; k < samples; ++k) {
    const std::vector<double> x = random_x(rng, n), xi = random_xi(rng, n);
    if (k < 4) xs.push_back(x);
    const SymbolJet sj = symbol_at(s, x, xi);
    const EigenSystem es = decompose(sj);
    CMat V(m, m);
    for (int a = 0; a < m; ++a) V.col(a) = es.v[a];
    ortho.residual = std::max(ortho.residual, max_abs(V.adjoint() * V - CMat::Identity(m, m)));
    const WaveInvariantSet w = compute_wave_invariants(s, x, xi);
    double cs = 0.0;
    CMat Psum = CMat::Zero(m, m), Usum = CMat::Zero(m, m);
    for (int sl = 0; sl < m; ++sl) {
      const double c = curvature_scalar(es, es.index(sl));
      cs += c;
      Psum += es.P[sl];
      Usum += w.u_minus1_at0[sl];
      trace.residual = std::max(trace.residual, std::abs(w.trace_U_sub[sl] - c));
      double e = 0.0;
      for (int a = 0; a < n; ++a) e += xi[a] * es.dh[sl][n + a];
      euler.residual =
          std::max(euler.residual, std::abs(e - es.h(sl)) / std::max(1.0, std::abs(es.h(sl))));
    }
    curv.residual = std::max(curv.residual, std::abs(cs));
    um1.residual = std::max(um1.residual, max_abs(Usum));
    u0.residual = std::max(u0.residual, max_abs(Psum - CMat::Identity(m, m)));
  }

  CoeffOptions plain, random;
  plain.sphere_order = random.sphere_order = r.opt.sphere_order;
  plain.drop_curvature = random.drop_curvature = r.opt.drop_curvature;
  random.gauge_seed = r.opt.seed * 2654435761ull + 1;
  Check gauge{"b integrand gauge invariance", 0, tol};
  Check unitary{"b(x) U(m) invariance", 0, tol};
  const OperatorSpec conj = unitary_conjugate(s, probe_unitary(n, m));
  for (const auto& x : xs) {
    const BTerms a = coeff_b(s, x, plain), b = coeff_b(s, x, random);
    gauge.residual = std::max({gauge.residual, std::abs(a.sub - b.sub),
                               std::abs(a.bracket - b.bracket),
                               std::abs(a.curvature - b.curvature)});
    unitary.residual =
        std::max(unitary.residual, std::abs(a.total() - coeff_b(conj, x, plain).total()));
  }

  std::ostringstream os;
  os << "operator " << s.name << ", " << samples << " samples, seed " << r.opt.seed << "\n";
  bool ok = true;
  for (const Check* c : {&ortho, &curv, &um1, &u0, &euler, &trace, &gauge, &unitary}) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-30s max_residual %.3e (tol %.1e)\n",
                  c->pass() ? "PASS" : "FAIL", c->name.c_str(), c->residual, c->tol);
    os << line;
    ok = ok && c->pass();
  }
  r.emit(os.str(), L.hash, {{"tol", tol}});
  return ok ? 0 : 1;
}

// -------------------------------------------------------------------- flow

int cmd_flow(Run& r) {
  const Loaded L = load(r.opt);
  const int n = L.spec.n;
  if (static_cast<int>(r.opt.point.size()) != 2 * n)
    throw ValidationError("--point", "needs 2n = " + std::to_string(2 * n) + " values x..., xi...");
  const std::vector<double> x(r.opt.point.begin(), r.opt.point.begin() + n);
  const std::vector<double> xi(r.opt.point.begin() + n, r.opt.point.end());
  const double tol = r.opt.tol_given ? r.opt.tol : 1e-10;
  const Trajectory tr = integrate(L.spec, r.opt.j, x, xi, r.opt.t_end, tol);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  r.extra["h0"] = tr.h0;
  r.extra["j"] = r.opt.j;
  r.emit(os.str(), L.hash, {{"ode_tol", tol}});
  return 0;
}

// ------------------------------------------------------------------- loops

json loop_json(const LoopReport& rep) {
  json j;
  j["j"] = rep.j;
  j["y"] = rep.y;
  j["directions"] = rep.directions;
  j["looping_fraction"] = rep.looping_fraction;
  j["T_min"] = std::isfinite(rep.T_min) ? json(rep.T_min) : json(nullptr);
  j["loops"] = json::array();
  for (const Loop& l : rep.loops)
    j["loops"].push_back({{"direction", l.direction}, {"eta", l.eta}, {"T", l.T},
                          {"defect", l.defect}});
  return j;
}

std::vector<LoopReport> scan_loops(const OperatorSpec& spec, const Options& o, double loop_tol,
                                   const std::vector<std::vector<double>>& bases) {
  std::vector<LoopReport> reps;
  for (int j : positive_indices(spec))
    for (const auto& y : bases)
      reps.push_back(find_loops(spec, j, y, o.directions, o.t_max, loop_tol, o.threads));
  return reps;
}

int cmd_loops(Run& r) {
  const Loaded L = load(r.opt);
  const int n = L.spec.n;
  std::vector<double> y(n, 0.0);
  if (!r.opt.point.empty()) {
    if (static_cast<int>(r.opt.point.size()) != n)
      throw ValidationError("--point", "needs n = " + std::to_string(n) + " values");
    y = r.opt.point;
  }
  const double loop_tol = r.opt.tol_given ? r.opt.tol : 1e-6;
  const auto reps = scan_loops(L.spec, r.opt, loop_tol, {y});
  json j;
  j["operator"] = L.spec.name;
  j["t_max"] = r.opt.t_max;
  j["loop_tol"] = loop_tol;
  j["reports"] = json::array();
  for (const auto& rep : reps) j["reports"].push_back(loop_json(rep));
  const double T = shortest_loop(reps);
  j["T_estimate"] = std::isfinite(T) ? json(T) : json(nullptr);
  r.emit(j.dump(2) + "\n", L.hash, {{"loop_tol", loop_tol}, {"ode_tol", 1e-10}});
  return 0;
}

// ------------------------------------------------------------------ verify

int cmd_verify(Run& r) {
  const Loaded L = load(r.opt);
  const OperatorSpec& s = L.spec;
  if (s.n != 2) throw ValidationError("n", "verify supports n = 2 only");
  if (!s.is_torus())
    throw ValidationError("form", "verify needs a torus_differential declaration");

  std::vector<std::vector<double>> bases{{0.0, 0.0}, {1.3, 2.1}};
  const auto reps = scan_loops(s, r.opt, 1e-6, bases);
  const double T = shortest_loop(reps);
  const double T_bound = std::isfinite(T) ? T : r.opt.t_max;
  const double T0 = r.opt.mollifier_width > 0.0 ? r.opt.mollifier_width : 0.9 * T_bound;
  const Mollifier mol = make_mollifier(
      T0, 1 << 16, r.opt.force ? std::numeric_limits<double>::infinity() : T_bound);

  GalerkinOptions go;
  go.vectors = false;
  const SpectrumSample ss = assemble_and_solve(s, r.opt.K, go);
  if (r.opt.lambda_max > ss.trust_lambda) {
    std::ostringstream os;
    os << "lambda_max = " << r.opt.lambda_max << " exceeds the trust ceiling " << ss.trust_lambda;
    throw BeyondTrust(os.str());
  }
  CoeffOptions co;
  co.sphere_order = r.opt.sphere_order;
  co.drop_curvature = r.opt.drop_curvature;
  const AsymptoticCoeffs c = compute_coeffs(s, r.opt.grid, co, r.opt.threads);

  std::ostringstream os;
  os.precision(17);
  os << "lambda,N,mollified_N,weyl_two_term,residual\n";
  double worst = 0.0, tail = 0.0;
  const int steps = 100;
  for (int i = 1; i <= steps; ++i) {
    const double lam = r.opt.lambda_max * i / steps;
    const int N = counting(ss, lam).count;
    const MollifiedCount mc = mollified_counting(ss, mol, lam);
    const double two = c.a_global * lam * lam + c.b_global * lam;
    worst = std::max(worst, std::abs(mc.value - two));
    tail = std::max(tail, mc.tail_bound);
    os << lam << ',' << N << ',' << mc.value << ',' << two << ',' << mc.value - two << '\n';
  }
  r.err << "verify: T estimate " << T << ", T0 " << T0 << ", a " << c.a_global << ", b "
        << c.b_global << ", max |mollified N - (a l^2 + b l)| " << worst << ", tail bound "
        << tail << "\n";
  r.extra["T_estimate"] = std::isfinite(T) ? json(T) : json(nullptr);
  r.extra["T0"] = T0;
  r.extra["a_global"] = c.a_global;
  r.extra["b_global"] = c.b_global;
  r.extra["max_abs_residual"] = worst;
  r.extra["tail_bound"] = tail;
  r.extra["K"] = r.opt.K;
  r.emit(os.str(), L.hash,
         {{"trust_lambda", ss.trust_lambda}, {"zero_eigenvalue", kZeroEigenvalue},
          {"band", go.band}});
  return 0;
}

// -------------------------------------------------------------------- asym

int cmd_asym(Run& r) {
  const Loaded L = load(r.opt);
  const OperatorSpec& s = L.spec;
  const OperatorSpec rev = time_reverse(s);
  const double tol = r.opt.tol_given ? r.opt.tol : 1e-10;
  const int samples = r.opt.samples_given ? r.opt.samples : 16;
  CoeffOptions co;
  co.sphere_order = r.opt.sphere_order;
  co.drop_curvature = r.opt.drop_curvature;
  double da = 0.0, db = 0.0;
  for (const PhaseSample& p : halton_samples(s.n, samples)) {
    da = std::max(da, std::abs(coeff_a(s, p.x, co) - coeff_a(rev, p.x, co)));
    db = std::max(db, std::abs(coeff_b(s, p.x, co).total() + coeff_b(rev, p.x, co).total()));
  }
  std::ostringstream os;
  double odd = 0.0;
  for (const PhaseSample& p : halton_samples(s.n, 16)) {
    std::vector<double> minus = p.xi;
    for (double& c : minus) c = -c;
    odd = std::max(odd, max_abs(symbol_at(s, p.x, p.xi).A1.value() +
                                symbol_at(s, p.x, minus).A1.value()));
  }
  if (odd > 1e-12)
    os << "note: A1(x, -xi) != -A1(x, xi) (residual " << odd
       << "); the operator is not differential and a = a~ is not expected\n";
  char line[160];
  std::snprintf(line, sizeof line, "%s a = a~ max_residual %.3e (tol %.1e)\n",
                da < tol ? "PASS" : "FAIL", da, tol);
  os << line;
  std::snprintf(line, sizeof line, "%s b = -b~ max_residual %.3e (tol %.1e)\n",
                db < tol ? "PASS" : "FAIL", db, tol);
  os << line;
  r.emit(os.str(), L.hash, {{"tol", tol}});
  return da < tol && db < tol ? 0 : 1;
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Category::Config:
    case Category::Usage:
      return 2;
    case Category::Math:
      return 3;
    case Category::Io:
      return 4;
  }
  return 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  o.threads = std::max(1u, std::thread::hardware_concurrency());
  CLI::App app{"Two-term Weyl asymptotics for first order systems", "weylsys"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", o.config, "operator declaration (JSON)");
  app.add_option("--out", o.out, "output file (stdout if omitted); a manifest is written beside it");
  app.add_option("--grid", o.grid, "points per axis for a(x), b(x)")->check(CLI::PositiveNumber);
  app.add_option("--sphere-order", o.sphere_order, "cosphere quadrature order (0: default)");
  app.add_option("--K", o.K, "Fourier cutoff |k_a| <= K")->check(CLI::PositiveNumber);
  app.add_option("--lambda-max", o.lambda_max, "largest lambda in the verify report");
  app.add_option("--mollifier-width", o.mollifier_width, "T0 (0: 0.9 times the loop estimate)");
  auto* samples = app.add_option("--samples", o.samples, "random sample points");
  app.add_option("--seed", o.seed, "random seed");
  auto* tol = app.add_option("--tol", o.tol, "tolerance (meaning depends on the command)");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--force", o.force, "allow T0 beyond the loop estimate");
  app.add_option("--j", o.j, "signed eigenvalue index");
  app.add_option("--point", o.point, "x..., xi... (flow) or y... (loops)")->delimiter(',');
  app.add_option("--t-end", o.t_end, "flow time");
  app.add_option("--directions", o.directions, "cosphere directions scanned for loops");
  app.add_option("--t-max", o.t_max, "loop search horizon");
  app.add_flag("--debug-drop-curvature", o.drop_curvature)->group("");

  std::string command;
  for (const char* name : {"coeffs", "identities", "flow", "loops", "verify", "asym"}) {
    auto* sub = app.add_subcommand(name);
    sub->callback([&command, name] { command = name; });
  }
  app.get_subcommand("coeffs")->description("a(x), b(x) and their integrals (JSON)");
  app.get_subcommand("identities")->description("identity suite at random points");
  app.get_subcommand("flow")->description("Hamiltonian trajectory with transported phase (CSV)");
  app.get_subcommand("loops")->description("loops through a point and the shortest length (JSON)");
  app.get_subcommand("verify")->description("Galerkin spectrum against the mollified Weyl law (CSV)");
  app.get_subcommand("asym")->description("a and b of -A against those of A");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  o.tol_given = tol->count() > 0;
  o.samples_given = samples->count() > 0;

  Run run{command, o, out, err};
  try {
    if (command == "coeffs") return cmd_coeffs(run);
    if (command == "identities") return cmd_identities(run);
    if (command == "flow") return cmd_flow(run);
    if (command == "loops") return cmd_loops(run);
    if (command == "verify") return cmd_verify(run);
    if (command == "asym") return cmd_asym(run);
  } catch (const Error& e) {
    err << "weylsys " << command << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "weylsys " << command << ": " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace weyl
