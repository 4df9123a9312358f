#include "wkam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "wkam/error.hpp"

namespace wkam {

namespace {

double wrap01(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

struct State {
  double x, p;
  Mat2 phi;
};

State derivative(const HamiltonianModel& model, const State& s, double t, bool variational) {
  const Jet j = model.jet(s.x, s.p, t);
  State d{j.H_p, -j.H_x, {0.0, 0.0, 0.0, 0.0}};
  if (variational) {
    // A = [[H_xp, H_pp], [-H_xx, -H_xp]], dPhi = A Phi
    const double a = j.H_xp, b = j.H_pp, c = -j.H_xx, e = -j.H_xp;
    d.phi = {a * s.phi[0] + b * s.phi[2], a * s.phi[1] + b * s.phi[3],
             c * s.phi[0] + e * s.phi[2], c * s.phi[1] + e * s.phi[3]};
  }
  return d;
}

State axpy(const State& s, double h, const State& d) {
  return {s.x + h * d.x, s.p + h * d.p,
          {s.phi[0] + h * d.phi[0], s.phi[1] + h * d.phi[1], s.phi[2] + h * d.phi[2],
           s.phi[3] + h * d.phi[3]}};
}

bool finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.p) &&
         std::all_of(s.phi.begin(), s.phi.end(), [](double v) { return std::isfinite(v); });
}

double det(const Mat2& m) { return m[0] * m[3] - m[1] * m[2]; }

int substeps_per_sample(const OrbitOptions& o) {
  return std::max(1, static_cast<int>(std::ceil(1.0 / o.samples_per_unit / o.max_step - 1e-12)));
}

}  // namespace

Trajectory integrate(const HamiltonianModel& model, PhasePoint start, double duration, int steps,
                     bool with_variational, double max_step) {
  if (steps < 1 || steps < std::ceil(std::abs(duration) / max_step - 1e-9))
    throw PreconditionError("integrate: step count too small for the step cap");
  const double h = duration / steps;
  Trajectory out;
  out.points.reserve(steps + 1);
  out.x_lifted.reserve(steps + 1);
  if (with_variational) out.fundamental.reserve(steps + 1);

  State s{start.x, start.p, {1.0, 0.0, 0.0, 1.0}};
  auto record = [&](double t) {
    out.points.push_back({wrap01(s.x), s.p, t});
    out.x_lifted.push_back(s.x);
    if (with_variational) out.fundamental.push_back(s.phi);
  };
  record(start.t);
  for (int n = 0; n < steps; ++n) {
    const double t = start.t + n * h;
    const State k1 = derivative(model, s, t, with_variational);
    const State k2 = derivative(model, axpy(s, 0.5 * h, k1), t + 0.5 * h, with_variational);
    const State k3 = derivative(model, axpy(s, 0.5 * h, k2), t + 0.5 * h, with_variational);
    const State k4 = derivative(model, axpy(s, h, k3), t + h, with_variational);
    State next = s;
    next.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    next.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    for (int i = 0; i < 4; ++i)
      next.phi[i] += h / 6.0 * (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]);
    if (!finite(next)) throw IntegrationError("integrate: non-finite state", t);
    s = next;
    record(start.t + (n + 1) * h);
  }
  return out;
}

std::array<std::complex<double>, 2> eigenvalues(const Mat2& m) { return eigenvalues(m, det(m)); }

std::array<std::complex<double>, 2> eigenvalues(const Mat2& m, double d) {
  const double half_tr = 0.5 * (m[0] + m[3]);
  const double disc = half_tr * half_tr - d;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    const double big = half_tr >= 0.0 ? half_tr + r : half_tr - r;
    // small root from the determinant to avoid cancellation
    const double small = big != 0.0 ? d / big : 0.0;
    return {std::complex<double>(big), std::complex<double>(small)};
  }
  const double im = std::sqrt(-disc);
  return {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
}

namespace {

struct Shot {
  Trajectory traj;
  double fx, fp;
};

Shot shoot(const HamiltonianModel& model, double x0, double p0, int period, int winding,
           const OrbitOptions& o) {
  const int steps = period * o.samples_per_unit * substeps_per_sample(o);
  Shot s{integrate(model, {x0, p0, 0.0}, period, steps, true, o.max_step), 0.0, 0.0};
  s.fx = s.traj.x_lifted.back() - x0 - winding;
  s.fp = s.traj.points.back().p - p0;
  return s;
}

std::vector<PhasePoint> subsample(const Trajectory& traj, const OrbitOptions& o) {
  const int stride = substeps_per_sample(o);
  std::vector<PhasePoint> out;
  for (std::size_t i = 0; i < traj.points.size(); i += stride) out.push_back(traj.points[i]);
  return out;
}

// Newton on the multiple-shooting system R_k = Phi(z_k) - z_{k+1}, k = 0..M-1,
// z_M = z_0 + (winding, 0). Keeps each segment in its linear regime.
double multiple_shooting(const HamiltonianModel& model, double& x0, double& p0, int period, int winding,
                         const OrbitOptions& o, int& iterations) {
  const int M = std::max(1, period * o.segments_per_unit);
  const double seg = double(period) / M;
  const int steps = std::max(1, static_cast<int>(std::ceil(seg / o.max_step - 1e-9)));
  std::vector<double> zx(M), zp(M);
  for (int k = 0; k < M; ++k) {
    zx[k] = x0 + winding * double(k) / M;
    zp[k] = p0;
  }
  double residual = std::numeric_limits<double>::infinity();
  for (; iterations < o.max_newton; ++iterations) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * M, 2 * M);
    Eigen::VectorXd R(2 * M);
    residual = 0.0;
    for (int k = 0; k < M; ++k) {
      const auto traj = integrate(model, {zx[k], zp[k], k * seg}, seg, steps, true, o.max_step);
      const int n = (k + 1) % M;
      const double target_x = zx[n] + (k + 1 == M ? winding : 0);
      R(2 * k) = traj.x_lifted.back() - target_x;
      R(2 * k + 1) = traj.points.back().p - zp[n];
      residual = std::max({residual, std::abs(R(2 * k)), std::abs(R(2 * k + 1))});
      const Mat2& F = traj.fundamental.back();
      J(2 * k, 2 * k) += F[0];
      J(2 * k, 2 * k + 1) += F[1];
      J(2 * k + 1, 2 * k) += F[2];
      J(2 * k + 1, 2 * k + 1) += F[3];
      J(2 * k, 2 * n) -= 1.0;
      J(2 * k + 1, 2 * n + 1) -= 1.0;
    }
    if (residual <= o.shoot_tol) break;
    Eigen::VectorXd delta = J.colPivHouseholderQr().solve(-R);
    const double len = delta.cwiseAbs().maxCoeff();
    if (!std::isfinite(len)) break;
    if (len > 0.2) delta *= 0.2 / len;
    for (int k = 0; k < M; ++k) {
      zx[k] += delta(2 * k);
      zp[k] += delta(2 * k + 1);
    }
  }
  x0 = zx[0];
  p0 = zp[0];
  return residual;
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const HamiltonianModel& model, PhasePoint seed, int period,
                                  int winding, const OrbitOptions& options) {
  if (period < 1) throw PreconditionError("find_periodic_orbit: period must be >= 1");
  double x0 = seed.x, p0 = seed.p;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  {
    const Shot s = shoot(model, x0, p0, period, winding, options);
    residual = std::max(std::abs(s.fx), std::abs(s.fp));
  }
  if (residual > options.shoot_tol) multiple_shooting(model, x0, p0, period, winding, options, iterations);
  // polish on the full return map, which defines the reported residual; it
  // has its own iteration budget
  for (int polish = 0;; ++polish, ++iterations) {
    const Shot s = shoot(model, x0, p0, period, winding, options);
    residual = std::max(std::abs(s.fx), std::abs(s.fp));
    if (residual <= options.shoot_tol) {
      PeriodicOrbit orbit;
      orbit.period = period;
      orbit.winding = winding;
      orbit.anchor = {wrap01(x0), p0, 0.0};
      orbit.residual = residual;
      orbit.newton_iterations = iterations;
      return classify_orbit(model, std::move(orbit), options);
    }
    if (polish >= options.max_newton) break;
    const Mat2& M = s.traj.fundamental.back();
    const Mat2 J{M[0] - 1.0, M[1], M[2], M[3] - 1.0};
    const double dj = det(J);
    if (!(std::abs(dj) > 0.0)) break;
    double dx = -(J[3] * s.fx - J[1] * s.fp) / dj;
    double dp = -(-J[2] * s.fx + J[0] * s.fp) / dj;
    const double len = std::max(std::abs(dx), std::abs(dp));
    if (len > 0.2) {
      dx *= 0.2 / len;
      dp *= 0.2 / len;
    }
    x0 += dx;
    p0 += dp;
  }
  std::ostringstream msg;
  msg << "Newton shooting did not converge (period " << period << ", winding " << winding
      << ", residual " << residual << ")";
  throw OrbitNotFound(msg.str(), residual);
}

PeriodicOrbit classify_orbit(const HamiltonianModel& model, PeriodicOrbit orbit,
                             const OrbitOptions& options) {
  const Shot s = shoot(model, orbit.anchor.x, orbit.anchor.p, orbit.period, orbit.winding, options);
  const double residual = std::max(std::abs(s.fx), std::abs(s.fp));
  if (residual > options.shoot_tol)
    throw PreconditionError("classify_orbit: orbit residual exceeds shoot_tol");
  orbit.residual = residual;
  orbit.samples = subsample(s.traj, options);
  // Chain per-segment fundamental matrices; the determinant of the product is
  // taken as the product of well-conditioned segment determinants.
  const int M = std::max(1, orbit.period * options.segments_per_unit);
  const double seg = double(orbit.period) / M;
  const int steps = std::max(1, static_cast<int>(std::ceil(seg / options.max_step - 1e-9)));
  Mat2 mono{1.0, 0.0, 0.0, 1.0};
  double d = 1.0;
  double x = orbit.anchor.x, p = orbit.anchor.p;
  for (int k = 0; k < M; ++k) {
    const auto tr = integrate(model, {x, p, k * seg}, seg, steps, true, options.max_step);
    const Mat2& F = tr.fundamental.back();
    mono = {F[0] * mono[0] + F[1] * mono[2], F[0] * mono[1] + F[1] * mono[3],
            F[2] * mono[0] + F[3] * mono[2], F[2] * mono[1] + F[3] * mono[3]};
    d *= det(F);
    x = tr.x_lifted.back();
    p = tr.points.back().p;
  }
  orbit.monodromy = mono;
  orbit.monodromy_det = d;
  if (std::abs(d - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "monodromy is not symplectic: det = " << d;
    throw NumericalError(msg.str());
  }
  orbit.multipliers = eigenvalues(orbit.monodromy, d);
  for (int i = 0; i < 2; ++i) orbit.floquet_exponents[i] = std::log(orbit.multipliers[i]) / double(orbit.period);
  if (orbit.floquet_exponents[0].real() < orbit.floquet_exponents[1].real()) {
    std::swap(orbit.floquet_exponents[0], orbit.floquet_exponents[1]);
    std::swap(orbit.multipliers[0], orbit.multipliers[1]);
  }
  orbit.hyperbolic = std::all_of(orbit.multipliers.begin(), orbit.multipliers.end(), [&](auto mu) {
    return std::abs(std::abs(mu) - 1.0) > options.hyperbolicity_margin;
  });
  return orbit;
}

std::vector<double> potential_maxima(const Potential& V, int scan_points) {
  std::vector<double> dv(scan_points);
  for (int i = 0; i < scan_points; ++i) dv[i] = V.eval(double(i) / scan_points).v_x;
  std::vector<double> out;
  for (int i = 0; i < scan_points; ++i) {
    const int j = (i + 1) % scan_points;
    if (!(dv[i] > 0.0 && dv[j] <= 0.0)) continue;
    const double a = double(i) / scan_points;
    const double b = a + 1.0 / scan_points;
    double root = b;
    if (dv[j] < 0.0) {
      auto f = [&](double y) { return V.eval(y).v_x; };
      boost::math::tools::eps_tolerance<double> tol(52);
      std::uintmax_t iters = 100;
      const auto bracket = boost::math::tools::toms748_solve(f, a, b, dv[i], dv[j], tol, iters);
      root = 0.5 * (bracket.first + bracket.second);
    }
    if (V.eval(root).v_xx >= 0.0) continue;
    root = wrap01(root);
    const bool dup = std::any_of(out.begin(), out.end(), [&](double r) {
      const double d = std::abs(r - root);
      return std::min(d, 1.0 - d) < 1e-9;
    });
    if (!dup) out.push_back(root);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AubrySearchResult aubry_orbits(const HamiltonianModel& model, const AubrySearchOptions& options) {
  int period = 1, winding = 0;
  double seed_p = model.argmin_momentum();
  if (model.family() == Family::TravelingWave) {
    // y = x + N t/k is at rest: period k/g, winding -N/g with g = gcd(N, k)
    const int g = std::gcd(model.rescale(), model.wind());
    period = model.wind() / g;
    winding = -model.rescale() / g;
    seed_p = 0.0;
  } else if (!model.stationary_in_frame()) {
    throw PreconditionError("aubry_orbits: time-dependent potentials are not supported");
  }

  const auto maxima = potential_maxima(model.frame_potential());
  AubrySearchResult result;
  const int stride = options.orbit.samples_per_unit;
  auto on_orbit = [&](const PeriodicOrbit& orbit, double x) {
    for (int j = 0; j < orbit.period; ++j) {
      const double d = std::abs(orbit.samples[std::size_t(j) * stride].x - x);
      if (std::min(d, 1.0 - d) <= options.anchor_merge_tol) return true;
    }
    return false;
  };

  for (double y : maxima) {
    PeriodicOrbit orbit;
    try {
      orbit = find_periodic_orbit(model, {y, seed_p, 0.0}, period, winding, options.orbit);
    } catch (const Error& e) {
      result.rejected.push_back("candidate x=" + std::to_string(y) + ": " + e.what());
      continue;
    }
    auto same = std::find_if(result.orbits.begin(), result.orbits.end(),
                             [&](const PeriodicOrbit& o) { return on_orbit(o, orbit.anchor.x); });
    if (same != result.orbits.end()) {
      const double d = std::abs(same->anchor.x - orbit.anchor.x);
      if (std::min(d, 1.0 - d) <= options.anchor_merge_tol && orbit.residual < same->residual)
        *same = orbit;
      continue;
    }
    if (options.diagonal_check) {
      const double r = options.diagonal_check(orbit);
      if (!(r <= options.diagonal_tol)) {
        std::ostringstream msg;
        msg << "candidate x=" << orbit.anchor.x << ": diagonal barrier " << r << " > "
            << options.diagonal_tol;
        result.rejected.push_back(msg.str());
        continue;
      }
    }
    result.orbits.push_back(std::move(orbit));
  }
  if (result.orbits.empty()) throw PreconditionError("aubry_orbits: no candidate orbit survived");
  return result;
}

double orbit_position(const PeriodicOrbit& orbit, double t) {
  const auto& s = orbit.samples;
  if (s.size() < 2) return orbit.anchor.x;
  const double period = s.back().t - s.front().t;
  double tau = std::fmod(t, period);
  if (tau < 0) tau += period;
  const double h = (s.back().t - s.front().t) / double(s.size() - 1);
  std::size_t k = std::min(s.size() - 2, static_cast<std::size_t>(tau / h));
  const double f = (tau - s[k].t) / h;
  const double x = s[k].x + f * (s[k + 1].x - s[k].x - std::floor(s[k + 1].x - s[k].x + 0.5));
  return x - std::floor(x);
}

}  // namespace wkam
