#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "wkam/model.hpp"

namespace wkam {

/// A point of T*M x S^1. x lives in [0,1) unless a lift is requested explicitly.
struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
  double t = 0.0;
};

/// Row-major 2x2 matrix [[a, b], [c, d]] acting on (dx, dp).
using Mat2 = std::array<double, 4>;

struct Trajectory {
  std::vector<PhasePoint> points;     // x wrapped into [0,1)
  std::vector<double> x_lifted;       // continuous x, starting at start.x
  std::vector<Mat2> fundamental;      // empty unless variational equations were requested
};

/// Fixed-step RK4 for x' = H_p, p' = -H_x, optionally with the variational
/// system started from the identity. Negative durations integrate backwards.
/// Requires steps >= ceil(|duration| / max_step).
Trajectory integrate(const HamiltonianModel& model, PhasePoint start, double duration, int steps,
                     bool with_variational, double max_step = 1e-3);

struct OrbitOptions {
  double shoot_tol = 1e-10;
  int max_newton = 40;
  int segments_per_unit = 8;  // multiple-shooting segments per unit time
  double max_step = 1e-3;
  int samples_per_unit = 64;  // orbit samples per unit time (normally the grid nt)
  double hyperbolicity_margin = 0.1;
};

struct PeriodicOrbit {
  int period = 1;
  int winding = 0;
  PhasePoint anchor;
  std::vector<PhasePoint> samples;  // t = 0, 1/samples_per_unit, ..., period
  Mat2 monodromy{1.0, 0.0, 0.0, 1.0};
  double monodromy_det = 1.0;  // product of per-segment determinants
  std::array<std::complex<double>, 2> multipliers{};
  std::array<std::complex<double>, 2> floquet_exponents{};  // real part descending
  bool hyperbolic = false;
  double residual = 0.0;
  int newton_iterations = 0;
};

/// Newton shooting on (x(N) - x(0) - winding, p(N) - p(0)): multiple shooting to
/// get into the linear regime, then polishing on the full return map. Throws OrbitNotFound.
PeriodicOrbit find_periodic_orbit(const HamiltonianModel& model, PhasePoint seed, int period,
                                  int winding, const OrbitOptions& options = {});

/// x(t) along an orbit, linear between samples and wrapped into [0,1).
double orbit_position(const PeriodicOrbit& orbit, double t);

/// Recomputes the monodromy over one period and fills the Floquet data.
PeriodicOrbit classify_orbit(const HamiltonianModel& model, PeriodicOrbit orbit,
                             const OrbitOptions& options = {});

/// Eigenvalues of a real 2x2 matrix, larger modulus first.
std::array<std::complex<double>, 2> eigenvalues(const Mat2& m);
/// Same, with the determinant supplied (avoids cancellation for large entries).
std::array<std::complex<double>, 2> eigenvalues(const Mat2& m, double det);

/// Strict local maxima of y -> V(y) on [0,1), located by bracketing V' and
/// refining; V'' < 0 is required.
std::vector<double> potential_maxima(const Potential& V, int scan_points = 4096);

/// Returns the diagonal residual of a candidate; the candidate is kept when it is <= tol.
using DiagonalCheck = std::function<double(const PeriodicOrbit&)>;

struct AubrySearchOptions {
  OrbitOptions orbit;
  DiagonalCheck diagonal_check;  // optional
  double diagonal_tol = 0.01;
  double anchor_merge_tol = 1e-6;
};

struct AubrySearchResult {
  std::vector<PeriodicOrbit> orbits;
  std::vector<std::string> rejected;
};

/// Candidate Aubry orbits for the built-in families: rest points at the
/// maxima of V (Mechanical, autonomous ShiftedKinetic), or the orbits
/// y = x_i - t/k through the maxima (TravelingWave). Throws when nothing survives.
AubrySearchResult aubry_orbits(const HamiltonianModel& model, const AubrySearchOptions& options = {});

}  // namespace wkam
