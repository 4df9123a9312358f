#pragma once

#include <string>
#include <vector>

#include "wkam/dynamics.hpp"
#include "wkam/model.hpp"
#include "wkam/variational.hpp"

namespace wkam {

/// D^2 h_i along one Aubry orbit, sampled at the orbit sample times.
struct HessianCurve {
  int orbit_index = 0;
  std::vector<double> times;        // 0, ..., period (closed)
  std::vector<double> P;            // D^2_x h_i(gamma(t), [t])
  double lambda = 0.0;              // (1/N) * integral of P over one period
  std::vector<double> P_unstable;   // unstable-graph slope, for comparison
  double lambda_unstable = 0.0;
  double periodicity_residual = 0.0;  // |P(N) - P(0)|
  double riccati_residual = 0.0;      // max |S' + H_xx + 2 H_xp S + H_pp S^2|, S = -P
};

/// h_i = h(., x̄_i) is minus a forward solution, whose gradient graph is the
/// stable manifold of the orbit: with p = -D h_i the stable tangent line is
/// dp = S dx and D^2 h_i = -S. The stable eigenvector of the monodromy is
/// carried backwards in time (where it is the attracting direction) through
/// per-sample fundamental matrices. Throws PreconditionError for a
/// non-hyperbolic orbit and NumericalError if the line turns vertical.
HessianCurve barrier_hessian_curve(const HamiltonianModel& model, const PeriodicOrbit& orbit,
                                   const OrbitOptions& options = {}, int orbit_index = 0);

struct LambdaSummary {
  std::vector<double> lambdas;
  double lambda_bar = 0.0;
  std::vector<int> argmin;
};

/// lambda_bar = min lambda_i; argmin = {i : lambda_i <= lambda_bar + tie_rel * lambda_bar}.
LambdaSummary lambda_averages(const std::vector<HessianCurve>& curves, double tie_rel = 1e-4);

struct FdCrosscheck {
  double fd_average = 0.0;   // period average of the second difference of h along the orbit
  double deviation = 0.0;    // |fd - lambda| / lambda
  int stencil_cells = 2;
  bool widened = false;
  std::string warning;
};

/// Second central difference of the grid barrier at the node nearest to each
/// orbit sample lying on a grid layer, averaged over the period and compared
/// to curve.lambda. Discrete minimizers move by whole nodes per substep, which
/// leaves a ripple of height about nt/(2 nx^2) in the grid barrier near the
/// orbit and perturbs an s-cell second difference by up to nt/s^2. The stencil
/// is widened from `stencil_cells` until that bound is below ripple_frac of the
/// measured value; widening is reported in the result.
FdCrosscheck fd_crosscheck(const BarrierField& field, const PeriodicOrbit& orbit, const HessianCurve& curve,
                           int stencil_cells = 2, double ripple_frac = 0.01);

/// nt / s^2: bound on the grid-ripple contribution to an s-cell second difference.
double quantization_bound(const GridField& field, int s);

/// Second difference (f(i+s) - 2 f(i) + f(i-s)) / (s dx)^2 on layer r.
double second_difference(const GridField& field, int i, int r, int s);

}  // namespace wkam
