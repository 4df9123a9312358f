#pragma once

// Test-side reference values computed independently of the library routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "wkam/model.hpp"

namespace oracle {

constexpr double pi = std::numbers::pi;

// V(x) = -sin^2(2 pi x) (1 + cos(2 pi x)/2), written out directly.
inline double benchmark_v(double x) {
  const double s = std::sin(2 * pi * x);
  return -s * s * (1.0 + 0.5 * std::cos(2 * pi * x));
}

// V'' at the two maxima, by symbolic differentiation.
inline double benchmark_v2_at_zero() { return -12 * pi * pi; }
inline double benchmark_v2_at_half() { return -4 * pi * pi; }

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Barrier of a mechanical system with max V = 0 between x and a maximum xi:
// the shorter of the two circle directions of int sqrt(-2V).
inline double quadrature_barrier(const std::function<double(double)>& V, double x, double xi) {
  auto speed = [&](double s) { return std::sqrt(std::max(0.0, -2.0 * V(s))); };
  double lo = std::min(x, xi), hi = std::max(x, xi);
  const double inner = simpson(speed, lo, hi);
  const double outer = simpson(speed, hi, lo + 1.0);
  return std::min(inner, outer);
}

// Minimum closed-cycle mean of the one-period transfer on a small lattice,
// by direct enumeration of k-period closed walks (k <= max_periods) built
// from the midpoint substep action.
inline double brute_force_cycle_mean(const wkam::HamiltonianModel& model, int nx, int nt, int band, int max_periods) {
  const double inf = std::numeric_limits<double>::infinity();
  auto step_cost = [&](int j, int a, int d) {
    const double xm = (a + 0.5 * d) / nx;
    const double v = double(d) * nt / nx;
    return model.lagrangian(xm, v, (j + 0.5) / nt).L / nt;
  };
  // one-period matrix by dynamic programming over substeps
  std::vector<double> W(std::size_t(nx) * nx, inf);
  for (int a = 0; a < nx; ++a) {
    std::vector<double> u(nx, inf);
    u[a] = 0.0;
    for (int j = 0; j < nt; ++j) {
      std::vector<double> next(nx, inf);
      for (int b = 0; b < nx; ++b) {
        if (u[b] == inf) continue;
        for (int d = -band; d <= band; ++d) {
          const int e = ((b + d) % nx + nx) % nx;
          next[e] = std::min(next[e], u[b] + step_cost(j, b, d));
        }
      }
      u = std::move(next);
    }
    for (int b = 0; b < nx; ++b) W[std::size_t(a) * nx + b] = u[b];
  }
  double best = inf;
  std::vector<double> P = W;
  for (int k = 1; k <= max_periods; ++k) {
    for (int a = 0; a < nx; ++a) best = std::min(best, P[std::size_t(a) * nx + a] / k);
    std::vector<double> Q(std::size_t(nx) * nx, inf);
    for (int a = 0; a < nx; ++a)
      for (int m = 0; m < nx; ++m) {
        const double pa = P[std::size_t(a) * nx + m];
        if (pa == inf) continue;
        for (int b = 0; b < nx; ++b) Q[std::size_t(a) * nx + b] = std::min(Q[std::size_t(a) * nx + b], pa + W[std::size_t(m) * nx + b]);
      }
    P = std::move(Q);
  }
  return best;
}

// c for H = (p+P)^2/2 in the continuum: the rotation vector rho = P minimizes v^2/2 - P v.
inline double shifted_kinetic_c(double P) { return 0.5 * P * P; }

// min over integer windings w of (w^2/2 - P w), negated.
inline double integer_winding_c(double P) {
  double best = std::numeric_limits<double>::infinity();
  for (int w = -5; w <= 5; ++w) best = std::min(best, 0.5 * w * w - P * w);
  return -best;
}

// Mean exit time of sqrt(2 eps) W from (-delta, delta): solves eps u'' = -1, u(+-delta) = 0 at 0.
inline double flat_exit_time(double delta, double eps) { return delta * delta / (2.0 * eps); }

}  // namespace oracle
