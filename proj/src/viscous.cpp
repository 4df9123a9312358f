#include "wkam/viscous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wkam/error.hpp"

namespace wkam {

double godunov_flux(const HamiltonianModel& model, double p_minus, double p_plus, double potential) {
  if (p_minus <= p_plus) return std::max(model.kinetic(p_minus), model.kinetic(p_plus)) + potential;
  const double p_star = std::clamp(model.argmin_momentum(), p_plus, p_minus);
  return model.kinetic(p_star) + potential;
}

double cfl_step(const HamiltonianModel& model, double epsilon, const GridSpec& grid, const ViscousOptions& opts) {
  const double dx = grid.dx();
  return opts.cfl_safety / (2.0 * epsilon / (dx * dx) + model.max_abs_hp(opts.lip_cap) / dx);
}

namespace {

// Explicit Euler stepper for psi_s = eps psi_xx + H(x, psi_x, -s).
class Stepper {
public:
  Stepper(const HamiltonianModel& model, double epsilon, int nx, double ds)
      : model_(model), eps_(epsilon), nx_(nx), dx_(1.0 / nx), ds_(ds), pot_(nx), next_(nx) {
    time_dependent_ = model.time_dependent();
    if (!time_dependent_) fill_potential(0.0);
  }

  // One Euler step from s to s + ds, in place.
  void step(std::vector<double>& psi, double s) {
    if (time_dependent_) fill_potential(-s);
    const double diff = eps_ / (dx_ * dx_);
    for (int i = 0; i < nx_; ++i) {
      const double left = psi[i == 0 ? nx_ - 1 : i - 1];
      const double right = psi[i + 1 == nx_ ? 0 : i + 1];
      const double pm = (psi[i] - left) / dx_;
      const double pp = (right - psi[i]) / dx_;
      next_[i] = psi[i] + ds_ * (diff * (right - 2.0 * psi[i] + left) + godunov_flux(model_, pm, pp, pot_[i]));
    }
    psi.swap(next_);
  }

  // One substep of m Euler steps starting at s.
  void substep(std::vector<double>& psi, double s, int m) {
    for (int q = 0; q < m; ++q) step(psi, s + q * ds_);
  }

  double min_potential() const { return min_pot_; }
  double max_potential() const { return max_pot_; }

private:
  void fill_potential(double t) {
    for (int i = 0; i < nx_; ++i) {
      pot_[i] = model_.potential_at(i * dx_, t);
      min_pot_ = std::min(min_pot_, pot_[i]);
      max_pot_ = std::max(max_pot_, pot_[i]);
    }
  }

  const HamiltonianModel& model_;
  double eps_;
  int nx_;
  double dx_;
  double ds_;
  bool time_dependent_ = false;
  std::vector<double> pot_;
  std::vector<double> next_;
  double min_pot_ = std::numeric_limits<double>::infinity();
  double max_pot_ = -std::numeric_limits<double>::infinity();
};

constexpr int kMaxStepsPerSubstep = 1 << 20;

int steps_per_substep(const HamiltonianModel& model, double epsilon, const GridSpec& grid,
                      const ViscousOptions& opts) {
  const double ds_max = cfl_step(model, epsilon, grid, opts);
  const double m = std::ceil(grid.dt() / ds_max - 1e-12);
  if (!(m >= 1.0) || m > kMaxStepsPerSubstep) {
    std::ostringstream msg;
    msg << "solve_cell: CFL bound " << ds_max << " infeasible for substep " << grid.dt();
    throw ConfigurationError(msg.str());
  }
  return static_cast<int>(m);
}

}  // namespace

ViscousSolution solve_cell(const HamiltonianModel& model, double epsilon, const GridSpec& grid,
                           const ViscousOptions& opts) {
  if (!(epsilon > 0.0)) throw ConfigurationError("solve_cell: epsilon must be positive");
  if (grid.nx < 3 || grid.nt < 1) throw ConfigurationError("solve_cell: grid too small");
  if (opts.max_periods < 1) throw ConfigurationError("solve_cell: max_periods must be positive");

  const int nx = grid.nx, nt = grid.nt;
  const int m = steps_per_substep(model, epsilon, grid, opts);
  const double ds = grid.dt() / m;
  Stepper stepper(model, epsilon, nx, ds);

  ViscousSolution sol;
  sol.epsilon = epsilon;
  sol.steps_per_substep = m;
  sol.ds = ds;

  std::vector<double> psi(nx, 0.0);
  std::vector<std::vector<double>> layers(nt);  // psi at s = k + j/nt, j = 0..nt-1
  bool converged = false;
  double c = 0.0;
  for (int k = 0; k < opts.max_periods; ++k) {
    for (int j = 0; j < nt; ++j) {
      layers[j] = psi;
      stepper.substep(psi, k + double(j) / nt, m);
    }
    sol.total_steps += static_cast<long long>(nt) * m;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double d = psi[i] - layers[0][i];
      if (!std::isfinite(d)) throw NumericalError("solve_cell: non-finite values; scheme unstable");
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sum += d;
    }
    c = sum / nx;
    const double res = std::max(hi - c, c - lo);
    sol.residual_history.push_back(res);
    sol.periods = k + 1;
    if (res <= opts.cell_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "solve_cell: eps=" << epsilon << " not periodic after " << opts.max_periods
        << " periods (residual " << sol.residual_history.back() << ")";
    throw ConvergenceError(msg.str(), sol.residual_history);
  }
  sol.c_eps = c;
  sol.periodicity_residual = sol.residual_history.back();

  // Comparison with constants brackets c by the range of H(x, 0, t) seen by the scheme.
  const double h0 = model.kinetic(0.0);
  const double slack = opts.cell_tol + 1e-12;
  if (c < h0 + stepper.min_potential() - slack || c > h0 + stepper.max_potential() + slack) {
    std::ostringstream msg;
    msg << "solve_cell: c(eps)=" << c << " outside [" << h0 + stepper.min_potential() << ", "
        << h0 + stepper.max_potential() << "]";
    throw NumericalError(msg.str());
  }

  // forward time t_r = -s mod 1: layer r comes from j = (nt - r) mod nt
  sol.phi = GridField(nx, nt);
  for (int r = 0; r < nt; ++r) {
    const int j = (nt - r) % nt;
    for (int i = 0; i < nx; ++i) sol.phi.at(i, r) = layers[j][i] - c * double(j) / nt;
  }
  sol.anchor_node = nearest_node(opts.anchor_x, nx).index;
  const double base = sol.phi.at(sol.anchor_node, 0);
  for (double& v : sol.phi.values) v -= base;

  const Regularity reg = regularity_report(sol.phi);
  sol.lip_x = reg.lip_x;
  sol.semiconvexity_const = reg.semiconvexity_const;
  if (sol.lip_x > opts.lip_cap) {
    std::ostringstream msg;
    msg << "solve_cell: gradient " << sol.lip_x << " exceeds lip_cap " << opts.lip_cap
        << "; the CFL bound does not cover it";
    throw NumericalError(msg.str());
  }
  return sol;
}

Regularity regularity_report(const GridField& phi) {
  Regularity out;
  const double dx = 1.0 / phi.nx;
  for (int r = 0; r < phi.nt; ++r) {
    const double* f = phi.layer(r);
    for (int i = 0; i < phi.nx; ++i) {
      const double left = f[i == 0 ? phi.nx - 1 : i - 1];
      const double right = f[i + 1 == phi.nx ? 0 : i + 1];
      out.lip_x = std::max(out.lip_x, std::abs(right - f[i]) / dx);
      out.semiconvexity_const = std::max(out.semiconvexity_const, -(right - 2.0 * f[i] + left) / (dx * dx));
    }
  }
  return out;
}

double residual_check(const HamiltonianModel& model, const ViscousSolution& sol) {
  const int nx = sol.phi.nx, nt = sol.phi.nt;
  const int m = sol.steps_per_substep;
  Stepper stepper(model, sol.epsilon, nx, sol.ds);
  double worst = 0.0;
  std::vector<double> psi(nx);
  for (int r = 0; r < nt; ++r) {
    // layer r sits at s = (nt - r)/nt mod 1; one substep in s reaches layer r - 1
    const int j = (nt - r) % nt;
    const int target = (r + nt - 1) % nt;
    std::copy(sol.phi.layer(r), sol.phi.layer(r) + nx, psi.begin());
    stepper.substep(psi, double(j) / nt, m);
    for (int i = 0; i < nx; ++i)
      worst = std::max(worst, std::abs(psi[i] - sol.phi.at(i, target) - sol.c_eps / nt));
  }
  return worst;
}

GridField spatial_gradient(const GridField& f) {
  GridField g(f.nx, f.nt);
  const double inv = 0.5 * f.nx;
  for (int r = 0; r < f.nt; ++r)
    for (int i = 0; i < f.nx; ++i)
      g.at(i, r) = (f.at(wrap_index(i + 1, f.nx), r) - f.at(wrap_index(i - 1, f.nx), r)) * inv;
  return g;
}

}  // namespace wkam
