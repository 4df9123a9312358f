#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wkam/dynamics.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"
#include "wkam/variational.hpp"
#include "wkam/viscous.hpp"

namespace wkam {

enum class DriftSource { Zero, OptimalFromViscous, BarrierDrift, Constant };

std::string_view to_string(DriftSource source);

/// Feedback drift U(x, t) = H_p(x, g(x, t), t) for a gradient field g on the
/// grid (bilinear in (x, t)), or a constant velocity.
struct DriftField {
  DriftSource source = DriftSource::Zero;
  GridField gradient;
  double constant = 0.0;
  // BarrierDrift only: the field is trusted within `radius` of the orbit
  const PeriodicOrbit* orbit = nullptr;
  double radius = 0.0;

  double operator()(const HamiltonianModel& model, double x, double t) const;
  /// False when a local drift is evaluated outside its tube.
  bool valid_at(double x, double t) const;
};

DriftField zero_drift();
DriftField constant_drift(double velocity);
/// U = H_p(x, D phi_eps, t) from the central-difference gradient of phi_eps.
DriftField optimal_drift(const ViscousSolution& sol);
/// U = H_p(x, -D h_I, t) with the barrier gradient smoothed over +-smoothing_cells,
/// trusted within `radius` of the orbit.
DriftField barrier_drift(const BarrierField& field, const PeriodicOrbit& orbit, double radius,
                         int smoothing_cells = 4);

/// Exit tube d(X(s), center(s)) < delta; the center is the orbit at matching
/// times, or a fixed point when no orbit is given.
struct ExitTube {
  double delta = 0.1;
  const PeriodicOrbit* orbit = nullptr;
  double center = 0.0;
  double center_at(double t) const;
};

struct SdeOptions {
  double epsilon = 0.0;
  int n_paths = 1000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  double kappa = 1.0;        // time cap
  double x0 = 0.0;
  double t0 = 0.0;
  bool track_exit = false;
  ExitTube tube;
};

struct SdeEnsemble {
  double epsilon = 0.0;
  DriftSource drift_source = DriftSource::Zero;
  int n_paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double kappa = 0.0;
  double exit_radius = 0.0;
  std::vector<double> tau_samples;   // tau ^ kappa, empty unless exits are tracked
  std::vector<double> final_x;       // lifted positions at the stopping time
  int capped = 0;
  int flagged = 0;                   // paths that left the drift's tube
};

/// Seed of the random stream of path `index`, a SplitMix64 mix of (seed, index).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Euler-Maruyama for dX = U(X, s) ds + sqrt(2 eps) dW from (x0, t0). With
/// track_exit, paths stop at the first exit from the tube, detected on the
/// grid and by the Brownian-bridge crossing probability within each step.
/// Requires dt <= delta^2 / (8 eps) when exits are tracked.
SdeEnsemble simulate_paths(const HamiltonianModel& model, const DriftField& drift, const SdeOptions& options);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  double ci_low = 0.0;   // 95% normal interval
  double ci_high = 0.0;
};
MeanEstimate estimate_mean(const std::vector<double>& samples);

struct ExitTimeRow {
  double epsilon = 0.0;
  int n_paths = 0;
  MeanEstimate tau;
  double eps_log_mean_tau = 0.0;
  double eps_log_ci_low = 0.0;
  double eps_log_ci_high = 0.0;
  double capped_fraction = 0.0;
  double dt = 0.0;
};

struct ExitTimeReport {
  std::vector<ExitTimeRow> rows;
  bool positive_pass = false;
  bool monotone_pass = false;   // nondecreasing as eps decreases, up to CI overlap
  bool pass() const { return positive_pass && monotone_pass; }
};

struct ExitTimeOptions {
  std::vector<double> eps_list{0.08, 0.04, 0.02};
  double delta = 0.1;
  int n_paths = 20000;
  double kappa = 50.0;
  std::uint64_t seed = 1;
  double dt_fraction = 0.01;    // dt = dt_fraction * delta^2 / (2 eps), capped by max_dt
  double max_dt = 1e-3;
};

using DriftProvider = std::function<DriftField(double epsilon)>;

/// Capped exit times from the delta-tube around the orbit, started on the
/// orbit at t = 0, for each eps. Throws ConfigurationError when more than half
/// of the paths hit kappa at the largest eps.
ExitTimeReport exit_time_scaling(const HamiltonianModel& model, const PeriodicOrbit& orbit,
                                 const DriftProvider& drift_for, const ExitTimeOptions& options);

struct LaxProbe {
  double x = 0.0;
  double t = 0.0;
  double lhs = 0.0;      // phi_eps(x, t)
  double rhs = 0.0;      // MC estimate of the control value
  double se = 0.0;
  double residual = 0.0; // |lhs - rhs|
  bool pass = false;
  bool advisory = false; // statistical error above half the tolerance
};

struct LaxReport {
  std::vector<LaxProbe> probes;
  double tolerance = 0.02;
  bool pass() const;
};

struct LaxOptions {
  double kappa = 2.0;
  int n_paths = 20000;
  double dt = 2e-3;
  std::uint64_t seed = 1;
  double tolerance = 0.02;
  std::vector<double> probe_x{0.1, 0.3, 0.5, 0.7, 0.9};
  double probe_t = 0.0;
};

/// E[phi(X(t+kappa), t+kappa) - int_t^{t+kappa} L(X, U, s) ds - c kappa] for the
/// drift U, with the running cost integrated by the trapezoid rule.
LaxProbe lax_estimate(const HamiltonianModel& model, const ViscousSolution& sol, const DriftField& drift,
                      double x, double t, const LaxOptions& options);

/// lax_estimate with the optimal drift at every probe; PASS iff
/// residual <= max(tolerance, 2 SE).
LaxReport lax_residual(const HamiltonianModel& model, const ViscousSolution& sol, const LaxOptions& options = {});

}  // namespace wkam
