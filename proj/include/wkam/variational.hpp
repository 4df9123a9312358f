#pragma once

#include <cstdint>
#include <vector>

#include "wkam/dynamics.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

/// Single-substep action costs on the (x-node, substep) lattice. A move from
/// node a to a+d (|d| <= band, lifted) during substep j costs
///   K_j(a, d) = L(x_mid, nt*d/nx, (j+1/2)/nt) / nt,  x_mid = (a + d/2)/nx,
/// i.e. the midpoint rule along the straight segment. Moves outside the band
/// are simply absent.
class ActionKernelSet {
public:
  const GridSpec& grid() const { return grid_; }
  int nx() const { return grid_.nx; }
  int nt() const { return grid_.nt; }
  double vmax() const { return vmax_; }
  int band() const { return band_; }
  int width() const { return 2 * band_ + 1; }
  /// Largest number of full turns reachable within one period.
  int max_wind() const { return band_ * grid_.nt / grid_.nx; }

  double cost(int j, int a, int d) const {
    return costs_[(std::size_t(j) * grid_.nx + a) * width() + (d + band_)];
  }
  const double* row(int j, int a) const { return costs_.data() + (std::size_t(j) * grid_.nx + a) * width(); }

  /// Adds a constant to every per-unit-time Lagrangian value (a/nt per substep).
  ActionKernelSet shifted(double a) const;

private:
  friend ActionKernelSet build_kernels(const HamiltonianModel&, const GridSpec&, double);
  GridSpec grid_;
  double vmax_ = 0.0;
  int band_ = 0;
  std::vector<double> costs_;
};

/// Throws ConfigurationError unless nx, nt >= 2 and at least two neighbours per side are reachable.
ActionKernelSet build_kernels(const HamiltonianModel& model, const GridSpec& grid, double vmax);

/// Dense min-plus matrix of one full period: W(a,b) = min over chains of nt
/// substep moves from a (time 0) to b (time 1). Unreachable pairs are flagged.
struct PeriodMatrix {
  int n = 0;
  std::vector<double> w;
  std::vector<std::uint8_t> reached;
  double at(int a, int b) const { return w[std::size_t(a) * n + b]; }
  bool ok(int a, int b) const { return reached[std::size_t(a) * n + b] != 0; }
};

PeriodMatrix compose_period(const ActionKernelSet& kernels);

/// Minimum cycle mean of a period matrix by Karp's theorem.
double karp_min_cycle_mean(const PeriodMatrix& W);

struct PowerIterationResult {
  double mean = 0.0;         // eigenvalue estimate (per period)
  double lower = 0.0;        // Collatz-Wielandt bracket at the last iterate
  double upper = 0.0;
  int cyclicity = 0;         // detected period of u_k - k*mean, 0 if not detected
  int iterations = 0;
  bool exact = false;        // true when eventual periodicity was detected
};

/// u_{k+1} = u_k (x) W in min-plus arithmetic from u_0 = 0; the mean is read off
/// u_{k+s} - u_k = s*mean once that difference is constant.
PowerIterationResult minplus_power_iteration(const PeriodMatrix& W, int max_iterations = 20000,
                                             int max_cyclicity = 0);

struct CriticalValue {
  double c = 0.0;             // canonical value (Karp)
  double c_power = 0.0;       // second route
  double power_lower = 0.0;   // c-bracket from the power iteration
  double power_upper = 0.0;
  bool power_exact = false;
  int power_iterations = 0;
  int cyclicity = 0;
};

/// c = -(minimum mean cycle of the one-period composed graph).
CriticalValue critical_value(const ActionKernelSet& kernels);
/// Same, from an already composed period matrix.
CriticalValue critical_value(const PeriodMatrix& W);

struct BarrierOptions {
  double barrier_tol = 1e-9;
  int max_periods = 4000;
};

struct BarrierField {
  int anchor_node = 0;
  int anchor_layer = 0;
  double anchor_offset_cells = 0.0;  // anchor x minus node position, in cells
  int window = 1;
  double c_used = 0.0;
  GridField h;
  GridField phi_pot;
  double window_osc = 0.0;
  int periods = 0;
  std::vector<double> osc_trace;

  double at(int i, int r) const { return h.at(i, r); }
};

/// h(x,[t], anchor) by backward value iteration from the indicator at
/// (anchor_node, anchor_layer), adding c/nt per substep. The liminf over long
/// transfer times is realized as the minimum over a trailing window of
/// `window` whole periods; phi_pot is the minimum over every iterate.
BarrierField anchored_barrier(const ActionKernelSet& kernels, double c, int anchor_node, int anchor_layer,
                              int window, const BarrierOptions& options = {});

/// Convenience overload locating the nearest node to x at time layer 0.
BarrierField anchored_barrier(const ActionKernelSet& kernels, double c, double anchor_x, int window,
                              const BarrierOptions& options = {});

struct PairValue {
  double h = 0.0;
  double phi = 0.0;
  double offset_cells = 0.0;
};

/// h(x̄_from, x̄_to) and Φ(x̄_from, x̄_to), read from the field anchored at x̄_to
/// at the anchor node of field_from.
PairValue action_potential_pair(const BarrierField& field_from, const BarrierField& field_to);

/// m x m matrix B(i,j) = h(x̄_i, x̄_j).
std::vector<std::vector<double>> barrier_matrix(const std::vector<BarrierField>& fields);

struct AubryResidual {
  double residual = 0.0;
  bool pass = false;
};

/// max over the orbit samples of h(gamma(t), [t], x̄_i), linear in x between nodes.
AubryResidual aubry_residual(const BarrierField& field, const PeriodicOrbit& orbit, double aubry_tol);

std::vector<AubryResidual> aubry_verify(const std::vector<BarrierField>& fields,
                                        const std::vector<PeriodicOrbit>& orbits, double aubry_tol);

/// Field value at (x, layer r), linear between the two neighbouring nodes.
double interpolate_x(const GridField& f, double x, int r);

}  // namespace wkam
