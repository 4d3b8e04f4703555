#include "weyl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "weyl/eigensystem.hpp"
#include "weyl/errors.hpp"

namespace weyl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxStep = 0.1;

using State = Eigen::VectorXd;  // x (n), xi (n), Re v (m), Im v (m), Re Phi, Im Phi

struct Layout {
  int n, m;
  int xi() const { return n; }
  int vr() const { return 2 * n; }
  int vi() const { return 2 * n + m; }
  int ph() const { return 2 * n + 2 * m; }
  int size() const { return 2 * n + 2 * m + 2; }
};

EigenSystem decompose_on_path(const SymbolJet& sj) {
  try {
    return decompose(sj);
  } catch (const DegenerateEigenvalue& e) {
    throw DegenerateEigenvalueOnPath(e.what());
  }
}

State rhs(const OperatorSpec& spec, int j, const Layout& L, const State& y) {
  const int n = L.n, m = L.m;
  std::vector<double> x(y.data(), y.data() + n), xi(y.data() + n, y.data() + 2 * n);
  const SymbolJet sj = symbol_at(spec, x, xi);
  const EigenSystem es = decompose_on_path(sj);
  const int s = es.pos(j);
  State f = State::Zero(L.size());
  std::vector<double> zdot(2 * n);
  for (int a = 0; a < n; ++a) {
    zdot[a] = es.dh[s][n + a];
    zdot[n + a] = -es.dh[s][a];
  }
  for (int mu = 0; mu < 2 * n; ++mu) f(mu) = zdot[mu];

  CMat Adot = CMat::Zero(m, m);
  for (int mu = 0; mu < 2 * n; ++mu) Adot += zdot[mu] * es.dA[mu];
  CVec v(m);
  for (int k = 0; k < m; ++k) v(k) = cd(y(L.vr() + k), y(L.vi() + k));
  CVec vd = CVec::Zero(m);
  const CVec Av = Adot * v;
  for (int l = 0; l < m; ++l)
    if (l != s) vd += es.P[l] * Av / (es.h(s) - es.h(l));
  for (int k = 0; k < m; ++k) {
    f(L.vr() + k) = vd(k).real();
    f(L.vi() + k) = vd(k).imag();
  }

  const CMat B = sj.A1.value() - es.h(s) * CMat::Identity(m, m);
  cd br = 0.0;
  for (int a = 0; a < n; ++a)
    br += (es.dP[s][a] * B * es.dP[s][n + a] - es.dP[s][n + a] * B * es.dP[s][a]).trace();
  const cd q = (es.P[s] * subprincipal(sj)).trace() + cd(0.0, -0.5) * br;
  f(L.ph()) = q.real();
  f(L.ph() + 1) = q.imag();
  return f;
}

State rk4(const OperatorSpec& spec, int j, const Layout& L, const State& y, const State& k1,
          double h) {
  const State k2 = rhs(spec, j, L, y + 0.5 * h * k1);
  const State k3 = rhs(spec, j, L, y + 0.5 * h * k2);
  const State k4 = rhs(spec, j, L, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FlowSample to_sample(const Layout& L, double t, const State& y) {
  FlowSample s;
  s.t = t;
  s.x.resize(L.n);
  s.winding.resize(L.n);
  s.xi.resize(L.n);
  for (int a = 0; a < L.n; ++a) {
    const double w = std::floor(y(a) / kTwoPi);
    s.winding[a] = static_cast<long>(w);
    s.x[a] = y(a) - kTwoPi * w;
    if (s.x[a] >= kTwoPi) {
      s.x[a] -= kTwoPi;
      ++s.winding[a];
    }
    s.xi[a] = y(L.xi() + a);
  }
  s.v.resize(L.m);
  for (int k = 0; k < L.m; ++k) s.v(k) = cd(y(L.vr() + k), y(L.vi() + k));
  s.phase = cd(y(L.ph()), y(L.ph() + 1));
  return s;
}

State from_sample(const Layout& L, const FlowSample& s) {
  State y(L.size());
  for (int a = 0; a < L.n; ++a) {
    y(a) = s.x[a] + kTwoPi * static_cast<double>(s.winding[a]);
    y(L.xi() + a) = s.xi[a];
  }
  for (int k = 0; k < L.m; ++k) {
    y(L.vr() + k) = s.v(k).real();
    y(L.vi() + k) = s.v(k).imag();
  }
  y(L.ph()) = s.phase.real();
  y(L.ph() + 1) = s.phase.imag();
  return y;
}

// Integrates from (t0, y) to t1, calling emit(t, y) after every accepted step.
template <class Emit>
State advance(const OperatorSpec& spec, int j, const Layout& L, State y, double t0, double t1,
              double tol, Emit&& emit) {
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::min(kMaxStep, std::abs(t1 - t0));
  while (dir * (t1 - t) > 0.0) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    const State k1 = rhs(spec, j, L, y);
    const State full = rk4(spec, j, L, y, k1, h);
    const State mid = rk4(spec, j, L, y, k1, 0.5 * h);
    const State two = rk4(spec, j, L, mid, rhs(spec, j, L, mid), 0.5 * h);
    double err = 0.0;
    for (int i = 0; i < L.size(); ++i)
      err = std::max(err, std::abs(two(i) - full(i)) / (15.0 * std::max(1.0, std::abs(two(i)))));
    if (err <= tol) {
      y = two + (two - full) / 15.0;
      t = (dir * (t + h - t1) >= 0.0) ? t1 : t + h;
      emit(t, y);
    }
    const double grow = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 4.0);
    h = dir * std::min(kMaxStep, std::abs(h) * grow);
    if (err > tol && std::abs(h) < 1e-13 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow at t = " << t;
      throw StepUnderflow(os.str());
    }
  }
  return y;
}

std::size_t nearest_sample(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (s.empty()) throw OutOfRange("empty trajectory");
  const double t0 = s.front().t, t1 = s.back().t;
  if (t < std::min(t0, t1) || t > std::max(t0, t1)) {
    std::ostringstream os;
    os << "t = " << t << " outside the trajectory range [" << std::min(t0, t1) << ", "
       << std::max(t0, t1) << "]";
    throw OutOfRange(os.str());
  }
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (dir * (s[i].t - t) <= 0.0) k = i;
  return k;
}

template <class Work>
void parallel_for(int count, int threads, Work&& work) {
  const int T = std::max(1, std::min(threads, count));
  if (T == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(T);
  for (int t = 0; t < T; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += T) work(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Local minima of dist(t) along the stored samples, refined by golden section.
template <class Dist>
std::vector<std::pair<double, double>> minima(const Trajectory& traj, Dist&& dist,
                                              double coarse) {
  std::vector<std::pair<double, double>> out;
  const auto& s = traj.samples;
  std::vector<double> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = dist(s[i]);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (!(d[i] <= d[i - 1] && d[i] <= d[i + 1]) || d[i] > coarse) continue;
    if (d[i] == d[i - 1] && i > 1) continue;
    double a = s[i - 1].t, b = s[i + 1].t;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double t) { return dist(state_at(traj, t)); };
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = f(c), fe = f(e);
    for (int it = 0; it < 80 && std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = f(e);
      }
    }
    double tm = fc < fe ? c : e, dm = std::min(fc, fe);
    if (d[i] < dm) {
      tm = s[i].t;
      dm = d[i];
    }
    out.emplace_back(tm, dm);
  }
  return out;
}

}  // namespace

Trajectory integrate(const OperatorSpec& spec, int j, std::span<const double> y,
                     std::span<const double> eta, double t_end, double ode_tol) {
  const int n = spec.n, m = spec.m;
  if (static_cast<int>(y.size()) != n || static_cast<int>(eta.size()) != n)
    throw DimensionMismatch("start point must have n coordinates");
  if (!(ode_tol > 0.0)) throw OutOfRange("ode_tol must be positive");
  const EigenSystem es = decompose_on_path(symbol_at(spec, y, eta));
  if (j < -es.m_minus || j > es.m_plus || j == 0)
    throw OutOfRange("eigenvalue index " + std::to_string(j) + " does not exist");
  const int s = es.pos(j);

  const Layout L{n, m};
  State y0 = State::Zero(L.size());
  for (int a = 0; a < n; ++a) {
    y0(a) = y[a];
    y0(L.xi() + a) = eta[a];
  }
  for (int k = 0; k < m; ++k) {
    y0(L.vr() + k) = es.v[s](k).real();
    y0(L.vi() + k) = es.v[s](k).imag();
  }

  Trajectory traj;
  traj.j = j;
  traj.h0 = es.h(s);
  traj.ode_tol = ode_tol;
  traj.spec = spec;
  traj.samples.push_back(to_sample(L, 0.0, y0));
  advance(spec, j, L, y0, 0.0, t_end, ode_tol,
          [&](double t, const State& st) { traj.samples.push_back(to_sample(L, t, st)); });
  return traj;
}

FlowSample state_at(const Trajectory& traj, double t) {
  const std::size_t k = nearest_sample(traj, t);
  const FlowSample& s0 = traj.samples[k];
  if (s0.t == t) return s0;
  const Layout L{traj.spec.n, traj.spec.m};
  const State y = advance(traj.spec, traj.j, L, from_sample(L, s0), s0.t, t, traj.ode_tol,
                          [](double, const State&) {});
  return to_sample(L, t, y);
}

CMat u0_at(const Trajectory& traj, double t) {
  const FlowSample s = state_at(traj, t);
  const CVec& v0 = traj.samples.front().v;
  return s.v * v0.adjoint() * std::exp(cd(0.0, -1.0) * s.phase);
}

double torus_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::remainder(a[k] - b[k], kTwoPi);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::vector<double>> cosphere_grid(const OperatorSpec& spec, int j,
                                               std::span<const double> y, int count) {
  if (count < 1) throw OutOfRange("direction count must be positive");
  std::vector<std::vector<double>> dirs;
  if (spec.n == 2) {
    for (int k = 0; k < count; ++k) {
      const double t = kTwoPi * k / count;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  } else if (spec.n == 3) {
    const int nl = std::max(1, static_cast<int>(std::lround(std::sqrt(count / 2.0))));
    for (int a = 0; a < nl; ++a) {
      const double th = std::numbers::pi * (a + 0.5) / nl;
      for (int b = 0; b < 2 * nl; ++b) {
        const double ph = std::numbers::pi * b / nl;
        dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
      }
    }
  } else {
    throw DimensionMismatch("cosphere grids exist for n = 2, 3");
  }
  for (auto& w : dirs) {
    const EigenSystem es = decompose(symbol_at(spec, y, w));
    const double h = es.h(es.pos(j));
    if (h <= 0.0) throw NonpositiveHamiltonian("h <= 0 on the scanned directions");
    for (double& c : w) c /= h;
  }
  return dirs;
}

LoopReport find_loops(const OperatorSpec& spec, int j, std::span<const double> y, int directions,
                      double t_max, double loop_tol, int threads) {
  if (!(t_max > 0.0)) throw OutOfRange("t_max must be positive");
  const auto dirs = cosphere_grid(spec, j, y, directions);
  std::vector<std::vector<Loop>> found(dirs.size());
  const std::vector<double> y0(y.begin(), y.end());
  parallel_for(static_cast<int>(dirs.size()), threads, [&](int d) {
    const Trajectory tr = integrate(spec, j, y0, dirs[d], t_max, 1e-10);
    auto dist = [&](const FlowSample& s) { return torus_distance(s.x, y0); };
    for (const auto& [T, defect] : minima(tr, dist, 0.5))
      if (defect < loop_tol && T > 0.0) found[d].push_back({d, dirs[d], T, defect});
  });
  LoopReport r;
  r.j = j;
  r.y = y0;
  r.directions = static_cast<int>(dirs.size());
  int looping = 0;
  for (auto& f : found) {
    if (!f.empty()) ++looping;
    for (Loop& l : f) {
      r.T_min = std::min(r.T_min, l.T);
      r.loops.push_back(std::move(l));
    }
  }
  r.looping_fraction = dirs.empty() ? 0.0 : double(looping) / dirs.size();
  return r;
}

PeriodicReport find_periodic(const OperatorSpec& spec, int j, int points_per_axis, int directions,
                             double t_max, double tol, int threads) {
  if (!(t_max > 0.0)) throw OutOfRange("t_max must be positive");
  if (points_per_axis < 1) throw OutOfRange("points_per_axis must be positive");
  const int n = spec.n;
  int bases = 1;
  for (int a = 0; a < n; ++a) bases *= points_per_axis;

  struct Start {
    std::vector<double> y, eta;
  };
  std::vector<Start> starts;
  for (int b = 0; b < bases; ++b) {
    std::vector<double> y(n);
    int r = b;
    for (int a = n - 1; a >= 0; --a) {
      y[a] = kTwoPi * (r % points_per_axis) / points_per_axis;
      r /= points_per_axis;
    }
    for (auto& eta : cosphere_grid(spec, j, y, directions)) starts.push_back({y, eta});
  }

  std::vector<std::vector<Loop>> found(starts.size());
  parallel_for(static_cast<int>(starts.size()), threads, [&](int k) {
    const Start& st = starts[k];
    const Trajectory tr = integrate(spec, j, st.y, st.eta, t_max, 1e-10);
    auto dist = [&](const FlowSample& s) {
      double d2 = std::pow(torus_distance(s.x, st.y), 2);
      for (int a = 0; a < n; ++a) d2 += std::pow(s.xi[a] - st.eta[a], 2);
      return std::sqrt(d2);
    };
    for (const auto& [T, defect] : minima(tr, dist, 0.5))
      if (defect < tol && T > 0.0) found[k].push_back({k, st.eta, T, defect});
  });

  PeriodicReport r;
  r.j = j;
  r.starts = static_cast<int>(starts.size());
  int hit = 0;
  for (std::size_t k = 0; k < found.size(); ++k) {
    if (!found[k].empty()) ++hit;
    for (Loop& l : found[k]) {
      r.T_min = std::min(r.T_min, l.T);
      r.periodic.emplace_back(static_cast<int>(k), std::move(l));
    }
  }
  r.periodic_fraction = starts.empty() ? 0.0 : double(hit) / starts.size();
  return r;
}

double shortest_loop(std::span<const LoopReport> reports) {
  double T = std::numeric_limits<double>::infinity();
  for (const LoopReport& r : reports) T = std::min(T, r.T_min);
  return T;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.spec.n;
  os << "t";
  for (int a = 1; a <= n; ++a) os << ",x" << a;
  for (int a = 1; a <= n; ++a) os << ",xi" << a;
  os << ",phase_re,phase_im\n";
  os.precision(17);
  for (const FlowSample& s : traj.samples) {
    os << s.t;
    for (int a = 0; a < n; ++a) os << ',' << s.x[a] + kTwoPi * static_cast<double>(s.winding[a]);
    for (int a = 0; a < n; ++a) os << ',' << s.xi[a];
    os << ',' << s.phase.real() << ',' << s.phase.imag() << '\n';
  }
}

}  // namespace weyl
