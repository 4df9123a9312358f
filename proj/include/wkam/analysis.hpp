#pragma once

#include <string>
#include <vector>

#include "wkam/dynamics.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"
#include "wkam/orbit_hessian.hpp"
#include "wkam/variational.hpp"
#include "wkam/viscous.hpp"

namespace wkam {

/// Range of H(x, 0, t) over a dense (x, t) lattice.
struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};
ValueRange zero_momentum_range(const HamiltonianModel& model, int nx = 4096, int nt = 64);

/// Indices i with lambda_i within tie_rel of the minimum.
std::vector<int> selected_orbits(const std::vector<double>& lambdas, double tie_rel = 1e-4);

/// phi_0 = max over the selected orbits of (anchor_values[i] - h_i), on the
/// grid of the first barrier field. Throws PreconditionError naming the pair
/// when phi_j - phi_i > h(x̄_i, x̄_j) + grid_tol for two selected orbits.
GridField predicted_limit(const std::vector<double>& anchor_values, const std::vector<BarrierField>& fields,
                          const std::vector<int>& selected, double grid_tol = 0.01);

/// Orbits i whose anchor value is a strict local maximum in the sense
/// phi_i > phi_j - h(x̄_i, x̄_j) + grid_tol for every j != i.
std::vector<int> local_maximum_set(const std::vector<double>& anchor_values,
                                   const std::vector<std::vector<double>>& barriers, double grid_tol = 0.01);

/// sup |phi - max_{i in set} (phi(x̄_i) - h_i)| with anchors read off phi at layer 0.
double representation_defect(const GridField& phi, const std::vector<BarrierField>& fields,
                             const std::vector<int>& set);

struct SweepInputs {
  std::vector<PeriodicOrbit> orbits;
  std::vector<BarrierField> fields;    // anchored at each orbit, same order
  std::vector<double> lambdas;
  double c0 = 0.0;
};

struct SweepOptions {
  std::vector<double> eps_list{0.02, 0.01, 0.005, 0.0025};
  GridSpec grid{400, 32};
  ViscousOptions viscous;
  int band_cells = 5;
  double trend_slack = 0.1;
  double grid_tol = 0.01;
  double tie_rel = 1e-4;
  double c_tol = 1e-6;
};

struct SweepReport {
  std::vector<double> eps_list;
  std::vector<double> c_records;
  double c0 = 0.0;
  std::vector<double> slope_secants;
  double lambda_bar = 0.0;
  std::vector<int> selected;
  std::vector<double> anchor_values;   // phi_0(x̄_i) for the selected orbits
  std::vector<double> limit_errors;
  std::vector<double> grad_errors;
  std::vector<double> lip_x;
  std::vector<double> semiconvexity_const;
  std::vector<double> residuals;       // residual_check per solve
  std::vector<int> periods;
  ValueRange bracket;
  bool bracket_pass = false;
  bool trend_pass = false;             // limit_errors non-increasing up to trend_slack
  bool strictly_decreasing = false;
  std::vector<ViscousSolution> solutions;
  GridField limit;                     // phi_0 on the viscous grid
};

/// Runs solve_cell for every eps (in parallel over eps) normalized at the first
/// selected orbit, and compares each phi_eps with the predicted limit.
SweepReport sweep(const HamiltonianModel& model, const SweepInputs& inputs, const SweepOptions& options);

struct SlopeVerdict {
  double slope_fit = 0.0;
  double intercept = 0.0;
  double worst_secant = 0.0;
  bool secant_pass = false;
  bool fit_pass = false;
  bool pass() const { return secant_pass && fit_pass; }
};

/// Least-squares line through (eps, c) on the smallest half of eps_list (at
/// least two points). PASS iff every secant >= -lambda_bar (1 + slope_tol)
/// and |slope + lambda_bar| <= slope_tol lambda_bar.
SlopeVerdict slope_fit(const std::vector<double>& eps_list, const std::vector<double>& c_records, double c0,
                       double lambda_bar, double slope_tol = 0.15);
inline SlopeVerdict slope_fit(const SweepReport& r, double slope_tol = 0.15) {
  return slope_fit(r.eps_list, r.c_records, r.c0, r.lambda_bar, slope_tol);
}

struct RescaleOptions {
  GridSpec grid{400, 50};
  double vmax = 4.0;
  double grid_tol = 0.01;
  double lambda_tol = 1e-6;
  OrbitOptions orbit;
  BarrierOptions barrier;
};

struct RescaleOrbit {
  double anchor_x = 0.0;
  double identity_error = 0.0;   // sup |h - N min_j h_N|
  int worst_node = 0;
  int worst_layer = 0;
  double lambda = 0.0;
  double lambda_N = 0.0;
};

struct RescaleReport {
  int N = 1;
  bool vacuous = false;
  double c = 0.0;
  double c_N = 0.0;
  std::vector<RescaleOrbit> orbits;
  double identity_error = 0.0;
  bool identity_pass = false;
  double lambda_literal_error = 0.0;   // max |lambda_N - lambda|
  bool lambda_literal_pass = false;
  double lambda_scaled_error = 0.0;    // max |N lambda_N - lambda|
  bool lambda_scaled_pass = false;
};

/// Compares the barriers and lambdas of H with those of H_N(x,p,t) = H(x,Np,Nt),
/// N = lcm of the orbit periods, on a grid with N times as many substeps. Vacuous for N = 1.
RescaleReport rescale_check(const HamiltonianModel& model, const std::vector<PeriodicOrbit>& orbits,
                            const RescaleOptions& options = {});

struct ExampleOptions {
  GridSpec grid{400, 50};
  double vmax = 4.0;
  double fd_tol = 0.05;
  double riccati_tol = 1e-3;
  double shift_tol = 0.02;
  double translate_tol = 1e-8;
  int stencil_cells = 2;
};

struct ExampleOrbit {
  double anchor_x = 0.0;
  double lambda = 0.0;
  double oracle = 0.0;           // sqrt(-V''(x_i))
  double riccati_error = 0.0;
  FdCrosscheck fd;
  double shift_error = 0.0;      // sup |h(x,t) - h(x + t/k, 0)|
};

struct ExampleReport {
  int k = 1;
  std::vector<double> maxima;
  double translate_error = 0.0;  // distance of orbit samples from x_i - t/k
  bool maxima_covered = false;
  double c = 0.0;
  std::vector<PeriodicOrbit> periodic_orbits;
  std::vector<BarrierField> fields;
  std::vector<ExampleOrbit> orbits;
  bool translates_pass = false;
  bool riccati_pass = false;
  bool fd_pass = false;
  bool shift_pass = false;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

/// TravelingWave checks for H = p^2/2 - p/k + V(x + t/k): orbits through the
/// translates of the maxima of V, the second derivative of -h along them
/// against -sqrt(-V''), and stationarity of the barriers in the moving frame.
ExampleReport example_verify(int k, const Potential& V, const ExampleOptions& options = {});

}  // namespace wkam
