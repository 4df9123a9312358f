#pragma once

#include <vector>

#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

struct ViscousOptions {
  double cell_tol = 1e-8;
  int max_periods = 400;
  double cfl_safety = 0.9;
  double lip_cap = 4.0;    // a-priori gradient range used for the CFL bound
  double anchor_x = 0.0;   // normalization point: phi(anchor_x, 0) = 0
};

struct ViscousSolution {
  double epsilon = 0.0;
  double c_eps = 0.0;
  GridField phi;               // forward-time layers r = 0..nt-1
  int anchor_node = 0;
  double lip_x = 0.0;
  double semiconvexity_const = 0.0;
  double periodicity_residual = 0.0;
  std::vector<double> residual_history;  // one entry per period
  int periods = 0;
  int steps_per_substep = 0;
  long long total_steps = 0;
  double ds = 0.0;
};

/// Godunov numerical Hamiltonian for the convex-in-p H: the max of H over
/// [p-, p+] when p- <= p+, its min over [p+, p-] otherwise. Nonincreasing in
/// p- and nondecreasing in p+, so the explicit update is monotone.
double godunov_flux(const HamiltonianModel& model, double p_minus, double p_plus, double potential);

/// Largest stable explicit step: safety / (2 eps / dx^2 + max|H_p| / dx).
double cfl_step(const HamiltonianModel& model, double epsilon, const GridSpec& grid, const ViscousOptions& opts);

/// Solves phi_t + eps phi_xx + H(x, phi_x, t) = c by integrating
/// psi_s = eps psi_xx + H(x, psi_x, -s) from psi = 0 until the per-period
/// increment psi(s+1) - psi(s) is constant to within cell_tol. Then
/// phi(x, t) = psi(x, -t mod 1) - c s. Throws ConfigurationError for
/// eps <= 0 or a degenerate grid, ConvergenceError with the residual history.
ViscousSolution solve_cell(const HamiltonianModel& model, double epsilon, const GridSpec& grid,
                           const ViscousOptions& opts = {});

struct Regularity {
  double lip_x = 0.0;
  double semiconvexity_const = 0.0;
};

/// Max one-cell difference quotient and max(0, -second difference / dx^2) over all layers.
Regularity regularity_report(const GridField& phi);
inline Regularity regularity_report(const ViscousSolution& sol) { return regularity_report(sol.phi); }

/// Applies one substep of the scheme to each layer of phi and compares with
/// the next layer shifted by c/nt. Returns the sup-norm mismatch.
double residual_check(const HamiltonianModel& model, const ViscousSolution& sol);

/// Central-difference gradient of a grid field on every node and layer.
GridField spatial_gradient(const GridField& f);

}  // namespace wkam
