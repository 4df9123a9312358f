#include "wkam/orbit_hessian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkam/error.hpp"

namespace wkam {

namespace {

using Vec2 = std::array<double, 2>;

Vec2 mul(const Mat2& m, const Vec2& v) { return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]}; }

Vec2 solve(const Mat2& m, const Vec2& v) {
  const double d = m[0] * m[3] - m[1] * m[2];
  return {(m[3] * v[0] - m[1] * v[1]) / d, (-m[2] * v[0] + m[0] * v[1]) / d};
}

Vec2 normalized(Vec2 v) {
  const double n = std::hypot(v[0], v[1]);
  return {v[0] / n, v[1] / n};
}

// Eigenvector of m for the real eigenvalue mu.
Vec2 eigenvector(const Mat2& m, double mu) {
  const Vec2 a{m[1], mu - m[0]};
  const Vec2 b{mu - m[3], m[2]};
  return normalized(std::hypot(a[0], a[1]) >= std::hypot(b[0], b[1]) ? a : b);
}

double slope(const Vec2& v) {
  if (std::abs(v[0]) < 1e-8 * std::hypot(v[0], v[1]))
    throw NumericalError("invariant line is vertical: graph representation fails");
  return v[1] / v[0];
}

double trapezoid_average(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) s += 0.5 * (f[k] + f[k + 1]) * (t[k + 1] - t[k]);
  return s / (t.back() - t.front());
}

}  // namespace

HessianCurve barrier_hessian_curve(const HamiltonianModel& model, const PeriodicOrbit& orbit,
                                   const OrbitOptions& options, int orbit_index) {
  if (!orbit.hyperbolic) throw PreconditionError("barrier_hessian_curve: orbit is not hyperbolic");
  if (std::abs(orbit.multipliers[0].imag()) > 0.0 || std::abs(orbit.multipliers[1].imag()) > 0.0)
    throw PreconditionError("barrier_hessian_curve: complex multipliers");

  const int n = orbit.period * options.samples_per_unit;
  const double h = 1.0 / options.samples_per_unit;
  const int steps = std::max(1, static_cast<int>(std::ceil(h / options.max_step - 1e-9)));

  // per-sample fundamental matrices along the orbit
  std::vector<Mat2> F(n);
  std::vector<PhasePoint> states(n + 1);
  double x = orbit.anchor.x, p = orbit.anchor.p;
  Mat2 mono{1.0, 0.0, 0.0, 1.0};
  for (int k = 0; k < n; ++k) {
    states[k] = {x, p, k * h};
    const auto tr = integrate(model, {x, p, k * h}, h, steps, true, options.max_step);
    F[k] = tr.fundamental.back();
    mono = {F[k][0] * mono[0] + F[k][1] * mono[2], F[k][0] * mono[1] + F[k][1] * mono[3],
            F[k][2] * mono[0] + F[k][3] * mono[2], F[k][2] * mono[1] + F[k][3] * mono[3]};
    x = tr.x_lifted.back();
    p = tr.points.back().p;
  }
  states[n] = {x, p, double(orbit.period)};

  double det_mono = 1.0;
  for (const auto& f : F) det_mono *= f[0] * f[3] - f[1] * f[2];
  const auto mu = eigenvalues(mono, det_mono);
  const double mu_u = std::abs(mu[0].real()) >= std::abs(mu[1].real()) ? mu[0].real() : mu[1].real();
  const double mu_s = det_mono / mu_u;

  HessianCurve c;
  c.orbit_index = orbit_index;
  c.times.resize(n + 1);
  c.P.resize(n + 1);
  c.P_unstable.resize(n + 1);
  for (int k = 0; k <= n; ++k) c.times[k] = k * h;

  Vec2 vs = eigenvector(mono, mu_s);
  c.P[n] = -slope(vs);
  for (int k = n - 1; k >= 0; --k) {
    vs = normalized(solve(F[k], vs));
    c.P[k] = -slope(vs);
  }
  Vec2 vu = eigenvector(mono, mu_u);
  c.P_unstable[0] = slope(vu);
  for (int k = 0; k < n; ++k) {
    vu = normalized(mul(F[k], vu));
    c.P_unstable[k + 1] = slope(vu);
  }
  c.periodicity_residual = std::abs(c.P[n] - c.P[0]);
  c.lambda = trapezoid_average(c.times, c.P);
  c.lambda_unstable = trapezoid_average(c.times, c.P_unstable);

  // Riccati residual for the stable slope S = -P, derivative by central differences
  for (int k = 0; k < n; ++k) {
    const int prev = k == 0 ? n - 1 : k - 1;
    const double S = -c.P[k];
    const double dS = -(c.P[k + 1] - c.P[prev]) / (2.0 * h);
    const Jet j = model.jet(states[k].x, states[k].p, states[k].t);
    c.riccati_residual =
        std::max(c.riccati_residual, std::abs(dS + j.H_xx + 2.0 * j.H_xp * S + j.H_pp * S * S));
  }
  return c;
}

LambdaSummary lambda_averages(const std::vector<HessianCurve>& curves, double tie_rel) {
  if (curves.empty()) throw PreconditionError("lambda_averages: no curves");
  LambdaSummary s;
  for (const auto& c : curves) s.lambdas.push_back(c.lambda);
  s.lambda_bar = *std::min_element(s.lambdas.begin(), s.lambdas.end());
  const double tol = tie_rel * std::abs(s.lambda_bar);
  for (std::size_t i = 0; i < s.lambdas.size(); ++i)
    if (s.lambdas[i] <= s.lambda_bar + tol) s.argmin.push_back(int(i));
  return s;
}

double second_difference(const GridField& field, int i, int r, int s) {
  const double dx = double(s) / field.nx;
  return (field.at(wrap_index(i + s, field.nx), r) - 2.0 * field.at(i, r) +
          field.at(wrap_index(i - s, field.nx), r)) /
         (dx * dx);
}

double quantization_bound(const GridField& field, int s) { return double(field.nt) / (double(s) * s); }

namespace {

// Period average of the second difference at the grid nodes nearest to the orbit samples.
double orbit_second_difference(const GridField& h, const PeriodicOrbit& orbit, int s) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < orbit.samples.size(); ++k) {
    const auto& pt = orbit.samples[k];
    const double layer_pos = (pt.t - std::floor(pt.t)) * h.nt;
    if (std::abs(layer_pos - std::round(layer_pos)) > 1e-6) continue;
    const int r = static_cast<int>(std::lround(layer_pos)) % h.nt;
    sum += second_difference(h, nearest_node(pt.x, h.nx).index, r, s);
    ++count;
  }
  if (count == 0) throw PreconditionError("fd_crosscheck: no orbit sample on a grid layer");
  return sum / count;
}

}  // namespace

FdCrosscheck fd_crosscheck(const BarrierField& field, const PeriodicOrbit& orbit, const HessianCurve& curve,
                           int stencil_cells, double ripple_frac) {
  const GridField& h = field.h;
  FdCrosscheck out;
  const int requested = std::max(1, stencil_cells);
  int s = requested;
  double fd = orbit_second_difference(h, orbit, s);
  while (quantization_bound(h, s) > ripple_frac * std::abs(fd)) {
    if (4 * (s + 1) >= h.nx) throw PreconditionError("fd_crosscheck: no stencil resolves the grid ripple");
    ++s;
    fd = orbit_second_difference(h, orbit, s);
  }
  if (s != requested) {
    std::ostringstream msg;
    msg << "stencil widened from " << requested << " to " << s << " cells (grid ripple bound nt/s^2 = "
        << quantization_bound(h, s) << ")";
    out.warning = msg.str();
    out.widened = true;
  }
  out.stencil_cells = s;
  out.fd_average = fd;
  out.deviation = std::abs(fd - curve.lambda) / std::abs(curve.lambda);
  return out;
}

}  // namespace wkam
