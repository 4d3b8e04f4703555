// Hamiltonian flow of an eigenvalue h of the principal symbol,
//
//   x' = h_xi,   xi' = -h_x,
//
// with the eigenvector carried in the parallel gauge (v^* v' = 0) and the
// accumulated phase  Phi(t) = int_0^t q,  q = v^* A_sub v - (i/2){v^*, A1 - h, v}.
// The third term of q, -i v^*{v, h} = -i v^* v', vanishes in this gauge.
// The leading propagator symbol is  u0(t) = v(t) v(0)^* exp(-i Phi(t)).
#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "weyl/linalg.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

struct FlowSample {
  double t = 0;
  std::vector<double> x;        // fundamental domain [0, 2 pi)^n
  std::vector<long> winding;    // x_unwrapped = x + 2 pi winding
  std::vector<double> xi;
  CVec v;
  cd phase = 0.0;               // int_0^t q
};

struct Trajectory {
  int j = 0;
  double h0 = 0;
  double ode_tol = 0;
  std::vector<FlowSample> samples;  // t monotone (increasing or decreasing)
  OperatorSpec spec;
};

/// Adaptive RK4 with step doubling and local extrapolation.  t_end may be
/// negative.  Throws DegenerateEigenvalueOnPath, StepUnderflow, ZeroCovector.
Trajectory integrate(const OperatorSpec& spec, int j, std::span<const double> y,
                     std::span<const double> eta, double t_end, double ode_tol = 1e-10);

/// State at time t, re-integrating from the nearest stored sample.
FlowSample state_at(const Trajectory& traj, double t);

/// u0(t) = v(t) v(0)^* exp(-i Phi(t)).  Throws OutOfRange.
CMat u0_at(const Trajectory& traj, double t);

/// Componentwise distance on the flat torus R^n / (2 pi Z)^n.
double torus_distance(std::span<const double> a, std::span<const double> b);

struct Loop {
  int direction = 0;          // index into the scanned grid
  std::vector<double> eta;    // start covector, h(y, eta) = 1
  double T = 0;
  double defect = 0;          // torus distance at return (plus |xi - eta| for periodic)
};

struct LoopReport {
  int j = 0;
  std::vector<double> y;
  int directions = 0;
  std::vector<Loop> loops;    // sorted by (direction, T)
  double T_min = std::numeric_limits<double>::infinity();
  double looping_fraction = 0;  // directions with at least one detection
};

/// Unit covectors on the cosphere h(y, .) = 1: n = 2 uses `count` angles,
/// n = 3 a latitude-longitude grid with about `count` points.
std::vector<std::vector<double>> cosphere_grid(const OperatorSpec& spec, int j,
                                               std::span<const double> y, int count);

/// Forward returns of x to y within loop_tol (strict).
LoopReport find_loops(const OperatorSpec& spec, int j, std::span<const double> y,
                      int directions, double t_max, double loop_tol = 1e-6, int threads = 1);

struct PeriodicReport {
  int j = 0;
  int starts = 0;
  std::vector<std::pair<int, Loop>> periodic;  // (start point index, detection)
  double T_min = std::numeric_limits<double>::infinity();
  double periodic_fraction = 0;
};

/// Returns to (y, eta) in both x and xi within tol (strict), scanning
/// points_per_axis^n base points times `directions` cosphere directions.
PeriodicReport find_periodic(const OperatorSpec& spec, int j, int points_per_axis, int directions,
                             double t_max, double tol = 1e-6, int threads = 1);

/// Smallest T over the reports (infinity when nothing was found).
double shortest_loop(std::span<const LoopReport> reports);

/// CSV with columns t, x1..xn, xi1..xin, phase_re, phase_im (unwrapped x).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace weyl
