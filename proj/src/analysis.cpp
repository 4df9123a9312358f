#include "wkam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wkam/error.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

namespace {

// Representative of a - b on the circle, in [-1/2, 1/2).
double circle_diff(double a, double b) {
  const double d = a - b;
  return d - std::floor(d + 0.5);
}

// f sampled on the (nx, nt) lattice; exact copy when the grids agree.
GridField resample(const GridField& f, int nx, int nt) {
  if (f.nx == nx && f.nt == nt) return f;
  GridField g(nx, nt);
  for (int r = 0; r < nt; ++r)
    for (int i = 0; i < nx; ++i) g.at(i, r) = f.sample(double(i) / nx, double(r) / nt);
  return g;
}

}  // namespace

ValueRange zero_momentum_range(const HamiltonianModel& model, int nx, int nt) {
  ValueRange out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const double k0 = model.kinetic(0.0);
  const int layers = model.time_dependent() ? nt : 1;
  for (int r = 0; r < layers; ++r)
    for (int i = 0; i < nx; ++i) {
      const double h = k0 + model.potential_at(double(i) / nx, double(r) / nt);
      out.min = std::min(out.min, h);
      out.max = std::max(out.max, h);
    }
  return out;
}

std::vector<int> selected_orbits(const std::vector<double>& lambdas, double tie_rel) {
  if (lambdas.empty()) throw PreconditionError("selected_orbits: no orbits");
  const double best = *std::min_element(lambdas.begin(), lambdas.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (lambdas[i] <= best + tie_rel * std::abs(best)) out.push_back(int(i));
  return out;
}

GridField predicted_limit(const std::vector<double>& anchor_values, const std::vector<BarrierField>& fields,
                          const std::vector<int>& selected, double grid_tol) {
  if (selected.empty()) throw PreconditionError("predicted_limit: empty selection");
  if (anchor_values.size() != fields.size())
    throw PreconditionError("predicted_limit: one anchor value per barrier field expected");
  for (int i : selected)
    for (int j : selected) {
      if (i == j) continue;
      const double hij = action_potential_pair(fields[i], fields[j]).h;
      if (anchor_values[j] - anchor_values[i] > hij + grid_tol) {
        std::ostringstream msg;
        msg << "predicted_limit: anchor values incompatible for pair (" << i << ", " << j << "): phi_j - phi_i = "
            << anchor_values[j] - anchor_values[i] << " > h = " << hij;
        throw PreconditionError(msg.str());
      }
    }
  const GridField& g0 = fields[selected.front()].h;
  GridField out(g0.nx, g0.nt, -std::numeric_limits<double>::infinity());
  for (int i : selected) {
    const GridField& h = fields[i].h;
    if (h.nx != g0.nx || h.nt != g0.nt) throw PreconditionError("predicted_limit: barrier grids differ");
    for (std::size_t q = 0; q < out.values.size(); ++q)
      out.values[q] = std::max(out.values[q], anchor_values[i] - h.values[q]);
  }
  return out;
}

std::vector<int> local_maximum_set(const std::vector<double>& anchor_values,
                                   const std::vector<std::vector<double>>& barriers, double grid_tol) {
  std::vector<int> out;
  const std::size_t m = anchor_values.size();
  for (std::size_t i = 0; i < m; ++i) {
    bool strict = true;
    for (std::size_t j = 0; j < m && strict; ++j)
      if (j != i && !(anchor_values[i] > anchor_values[j] - barriers[i][j] + grid_tol)) strict = false;
    if (strict) out.push_back(int(i));
  }
  return out;
}

double representation_defect(const GridField& phi, const std::vector<BarrierField>& fields,
                             const std::vector<int>& set) {
  if (set.empty()) throw PreconditionError("representation_defect: empty set");
  GridField rep(phi.nx, phi.nt, -std::numeric_limits<double>::infinity());
  for (int i : set) {
    const BarrierField& f = fields[i];
    if (f.h.nx != phi.nx || f.h.nt != phi.nt) throw PreconditionError("representation_defect: grids differ");
    const double a = phi.at(f.anchor_node, f.anchor_layer);
    for (std::size_t q = 0; q < rep.values.size(); ++q) rep.values[q] = std::max(rep.values[q], a - f.h.values[q]);
  }
  double worst = 0.0;
  for (std::size_t q = 0; q < rep.values.size(); ++q) worst = std::max(worst, std::abs(rep.values[q] - phi.values[q]));
  return worst;
}

SweepReport sweep(const HamiltonianModel& model, const SweepInputs& inputs, const SweepOptions& options) {
  const auto& eps = options.eps_list;
  if (eps.empty()) throw ConfigurationError("sweep: empty eps_list");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0)) throw ConfigurationError("sweep: eps_list must be positive");
    if (k > 0 && !(eps[k] < eps[k - 1])) throw ConfigurationError("sweep: eps_list must be strictly decreasing");
  }
  if (inputs.orbits.size() != inputs.fields.size() || inputs.orbits.size() != inputs.lambdas.size())
    throw PreconditionError("sweep: orbits, barrier fields and lambdas must match");

  SweepReport rep;
  rep.eps_list = eps;
  rep.c0 = inputs.c0;
  rep.selected = selected_orbits(inputs.lambdas, options.tie_rel);
  rep.lambda_bar = *std::min_element(inputs.lambdas.begin(), inputs.lambdas.end());
  const int I = rep.selected.front();

  ViscousOptions vopts = options.viscous;
  vopts.anchor_x = inputs.orbits[I].anchor.x;
  const std::size_t n = eps.size();
  rep.solutions.resize(n);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](std::size_t k) {
    try {
      rep.solutions[k] = solve_cell(model, eps[k], options.grid, vopts);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < n; ++k)
    if (!errors[k].empty()) {
      std::ostringstream msg;
      msg << "sweep at eps=" << eps[k] << ": " << errors[k];
      throw NumericalError(msg.str());
    }

  // anchor values of the limit from the smallest eps, phi_0(x̄_I) = 0
  const ViscousSolution& finest = rep.solutions.back();
  std::vector<double> anchors(inputs.fields.size(), 0.0);
  for (int i : rep.selected) {
    const int node = nearest_node(inputs.orbits[i].anchor.x, finest.phi.nx).index;
    anchors[i] = finest.phi.at(node, 0) - finest.phi.at(finest.anchor_node, 0);
  }
  anchors[I] = 0.0;
  for (int i : rep.selected) rep.anchor_values.push_back(anchors[i]);
  rep.limit = resample(predicted_limit(anchors, inputs.fields, rep.selected, options.grid_tol), options.grid.nx,
                       options.grid.nt);
  const GridField limit_grad = spatial_gradient(rep.limit);

  rep.bracket = zero_momentum_range(model);
  rep.bracket_pass = true;
  for (std::size_t k = 0; k < n; ++k) {
    const ViscousSolution& s = rep.solutions[k];
    rep.c_records.push_back(s.c_eps);
    rep.slope_secants.push_back((s.c_eps - inputs.c0) / eps[k]);
    rep.lip_x.push_back(s.lip_x);
    rep.semiconvexity_const.push_back(s.semiconvexity_const);
    rep.periods.push_back(s.periods);
    rep.residuals.push_back(residual_check(model, s));
    if (s.c_eps < rep.bracket.min - options.c_tol || s.c_eps > rep.bracket.max + options.c_tol)
      rep.bracket_pass = false;

    double err = 0.0;
    for (std::size_t q = 0; q < s.phi.values.size(); ++q)
      err = std::max(err, std::abs(s.phi.values[q] - rep.limit.values[q]));
    rep.limit_errors.push_back(err);

    const GridField g = spatial_gradient(s.phi);
    double gerr = 0.0;
    for (int i : rep.selected)
      for (int r = 0; r < g.nt; ++r) {
        const int c = nearest_node(orbit_position(inputs.orbits[i], double(r) / g.nt), g.nx).index;
        for (int d = -options.band_cells; d <= options.band_cells; ++d) {
          const int node = wrap_index(c + d, g.nx);
          gerr = std::max(gerr, std::abs(g.at(node, r) - limit_grad.at(node, r)));
        }
      }
    rep.grad_errors.push_back(gerr);
  }
  rep.trend_pass = true;
  rep.strictly_decreasing = true;
  for (std::size_t k = 1; k < n; ++k) {
    if (rep.limit_errors[k] > rep.limit_errors[k - 1] * (1.0 + options.trend_slack)) rep.trend_pass = false;
    if (!(rep.limit_errors[k] < rep.limit_errors[k - 1])) rep.strictly_decreasing = false;
  }
  return rep;
}

SlopeVerdict slope_fit(const std::vector<double>& eps_list, const std::vector<double>& c_records, double c0,
                       double lambda_bar, double slope_tol) {
  if (eps_list.size() != c_records.size() || eps_list.size() < 3)
    throw PreconditionError("slope_fit: at least three (eps, c) points required");
  std::vector<std::size_t> idx(eps_list.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return eps_list[a] < eps_list[b]; });
  const std::size_t m = std::max<std::size_t>(2, (idx.size() + 1) / 2);
  double se = 0, sc = 0, see = 0, sec = 0;
  for (std::size_t q = 0; q < m; ++q) {
    const double e = eps_list[idx[q]], c = c_records[idx[q]];
    se += e;
    sc += c;
    see += e * e;
    sec += e * c;
  }
  SlopeVerdict v;
  v.slope_fit = (m * sec - se * sc) / (m * see - se * se);
  v.intercept = (sc - v.slope_fit * se) / m;
  v.worst_secant = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < eps_list.size(); ++k)
    v.worst_secant = std::min(v.worst_secant, (c_records[k] - c0) / eps_list[k]);
  v.secant_pass = v.worst_secant >= -lambda_bar * (1.0 + slope_tol);
  v.fit_pass = std::abs(v.slope_fit + lambda_bar) <= slope_tol * lambda_bar;
  return v;
}

RescaleReport rescale_check(const HamiltonianModel& model, const std::vector<PeriodicOrbit>& orbits,
                            const RescaleOptions& options) {
  if (orbits.empty()) throw PreconditionError("rescale_check: no orbits");
  RescaleReport rep;
  int N = 1;
  for (const auto& o : orbits) N = std::lcm(N, o.period);
  rep.N = N;
  if (N == 1) {
    rep.vacuous = true;
    rep.identity_pass = rep.lambda_literal_pass = rep.lambda_scaled_pass = true;
    return rep;
  }

  const GridSpec& g = options.grid;
  const HamiltonianModel HN = model.rescaled(N);
  const GridSpec gN{g.nx, g.nt * N};
  const ActionKernelSet K = build_kernels(model, g, options.vmax);
  const ActionKernelSet KN = build_kernels(HN, gN, options.vmax * N);
  rep.c = critical_value(K).c;
  rep.c_N = critical_value(KN).c;

  OrbitOptions oN = options.orbit;
  oN.samples_per_unit = gN.nt;
  // every orbit closes after N units, so every H_N orbit has period one
  const int windowN = 1;

  OrbitOptions o1 = options.orbit;
  o1.samples_per_unit = g.nt;
  for (const auto& orbit : orbits) {
    RescaleOrbit ro;
    ro.anchor_x = orbit.anchor.x;
    const BarrierField h = anchored_barrier(K, rep.c, orbit.anchor.x, N, options.barrier);
    std::vector<BarrierField> hN;
    for (int j = 0; j < N; ++j)
      hN.push_back(anchored_barrier(KN, rep.c_N, h.anchor_node, j * g.nt, windowN, options.barrier));
    for (int r = 0; r < g.nt; ++r)
      for (int i = 0; i < g.nx; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : hN) best = std::min(best, f.h.at(i, r));
        const double e = std::abs(h.h.at(i, r) - N * best);
        if (e > ro.identity_error) {
          ro.identity_error = e;
          ro.worst_node = i;
          ro.worst_layer = r;
        }
      }

    ro.lambda = barrier_hessian_curve(model, orbit, o1).lambda;
    // gamma_N(s) = gamma(N s) with momentum p / N. Built directly rather than
    // by shooting: its multiplier is mu^(N / period), which puts the return-map
    // residual at x != 0 above shoot_tol through rounding alone.
    PeriodicOrbit orbitN;
    orbitN.period = 1;
    orbitN.winding = orbit.winding * (N / orbit.period);
    orbitN.anchor = {orbit.anchor.x, orbit.anchor.p / N, 0.0};
    orbitN.hyperbolic = orbit.hyperbolic;
    orbitN.multipliers = orbit.multipliers;
    ro.lambda_N = barrier_hessian_curve(HN, orbitN, oN).lambda;

    rep.identity_error = std::max(rep.identity_error, ro.identity_error);
    rep.lambda_literal_error = std::max(rep.lambda_literal_error, std::abs(ro.lambda_N - ro.lambda));
    rep.lambda_scaled_error = std::max(rep.lambda_scaled_error, std::abs(N * ro.lambda_N - ro.lambda));
    rep.orbits.push_back(ro);
  }
  rep.identity_pass = rep.identity_error <= 2.0 * options.grid_tol;
  rep.lambda_literal_pass = rep.lambda_literal_error <= options.lambda_tol;
  rep.lambda_scaled_pass = rep.lambda_scaled_error <= options.lambda_tol;
  return rep;
}

ExampleReport example_verify(int k, const Potential& V, const ExampleOptions& options) {
  if (k < 1) throw ConfigurationError("example_verify: k must be positive");
  if (!V.period_divides(k)) throw PreconditionError("example_verify: V is not 1/k-periodic");
  ExampleReport rep;
  rep.k = k;
  rep.maxima = potential_maxima(V);
  const HamiltonianModel model = HamiltonianModel::traveling_wave(V, k);

  AubrySearchOptions search;
  search.orbit.samples_per_unit = options.grid.nt;
  rep.periodic_orbits = aubry_orbits(model, search).orbits;

  // (a) orbits are x_i - t/k and pass through every maximum at integer times
  std::vector<bool> covered(rep.maxima.size(), false);
  for (const auto& o : rep.periodic_orbits)
    for (const auto& s : o.samples) {
      rep.translate_error = std::max(rep.translate_error, std::abs(circle_diff(s.x, o.anchor.x - s.t / k)));
      if (std::abs(s.t - std::round(s.t)) > 1e-9) continue;
      for (std::size_t m = 0; m < rep.maxima.size(); ++m)
        if (std::abs(circle_diff(s.x, rep.maxima[m])) < 1e-6) covered[m] = true;
    }
  rep.maxima_covered = std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
  rep.translates_pass = rep.maxima_covered && rep.translate_error <= options.translate_tol;
  if (!rep.translates_pass) rep.failures.push_back("orbits are not the translates of the maxima");

  // (b) second derivative along the orbits, (c) stationarity in the moving frame
  const ActionKernelSet K = build_kernels(model, options.grid, options.vmax);
  rep.c = critical_value(K).c;
  rep.riccati_pass = rep.fd_pass = rep.shift_pass = true;
  for (std::size_t i = 0; i < rep.periodic_orbits.size(); ++i) {
    const auto& o = rep.periodic_orbits[i];
    ExampleOrbit eo;
    eo.anchor_x = o.anchor.x;
    const HessianCurve curve = barrier_hessian_curve(model, o, search.orbit, int(i));
    eo.lambda = curve.lambda;
    eo.oracle = std::sqrt(-V.eval(o.anchor.x).v_xx);
    eo.riccati_error = std::abs(eo.lambda - eo.oracle);
    BarrierField f = anchored_barrier(K, rep.c, o.anchor.x, o.period);
    eo.fd = fd_crosscheck(f, o, curve, options.stencil_cells);
    const GridField& h = f.h;
    for (int r = 0; r < h.nt; ++r)
      for (int n = 0; n < h.nx; ++n) {
        const double y = double(n) / h.nx + double(r) / h.nt / k;
        eo.shift_error = std::max(eo.shift_error, std::abs(h.at(n, r) - interpolate_x(h, y, 0)));
      }
    std::ostringstream tag;
    tag << "orbit through x=" << o.anchor.x << ": ";
    if (eo.riccati_error > options.riccati_tol) {
      rep.riccati_pass = false;
      rep.failures.push_back(tag.str() + "Riccati lambda differs from sqrt(-V'')");
    }
    if (eo.fd.deviation > options.fd_tol) {
      rep.fd_pass = false;
      rep.failures.push_back(tag.str() + "finite-difference Hessian off by more than the tolerance");
    }
    if (eo.shift_error > options.shift_tol) {
      rep.shift_pass = false;
      rep.failures.push_back(tag.str() + "barrier not stationary in the moving frame");
    }
    rep.fields.push_back(std::move(f));
    rep.orbits.push_back(eo);
  }
  return rep;
}

}  // namespace wkam
