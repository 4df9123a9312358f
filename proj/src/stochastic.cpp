#include "wkam/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "wkam/error.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

namespace {

double circle_diff(double a, double b) {
  const double d = a - b;
  return d - std::floor(d + 0.5);
}

double wrap01(double x) { return x - std::floor(x); }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string_view to_string(DriftSource source) {
  switch (source) {
    case DriftSource::Zero: return "Zero";
    case DriftSource::OptimalFromViscous: return "OptimalFromViscous";
    case DriftSource::BarrierDrift: return "BarrierDrift";
    case DriftSource::Constant: return "Constant";
  }
  return "?";
}

double DriftField::operator()(const HamiltonianModel& model, double x, double t) const {
  switch (source) {
    case DriftSource::Zero: return 0.0;
    case DriftSource::Constant: return constant;
    default: return model.velocity(gradient.sample(x, t));
  }
}

bool DriftField::valid_at(double x, double t) const {
  if (source != DriftSource::BarrierDrift || orbit == nullptr) return true;
  return std::abs(circle_diff(x, orbit_position(*orbit, t))) <= radius;
}

DriftField zero_drift() { return {}; }

DriftField constant_drift(double velocity) {
  DriftField d;
  d.source = DriftSource::Constant;
  d.constant = velocity;
  return d;
}

DriftField optimal_drift(const ViscousSolution& sol) {
  DriftField d;
  d.source = DriftSource::OptimalFromViscous;
  d.gradient = spatial_gradient(sol.phi);
  return d;
}

DriftField barrier_drift(const BarrierField& field, const PeriodicOrbit& orbit, double radius, int smoothing_cells) {
  const GridField& h = field.h;
  const int s = std::max(1, smoothing_cells);
  DriftField d;
  d.source = DriftSource::BarrierDrift;
  d.gradient = GridField(h.nx, h.nt);
  const double inv = h.nx / (2.0 * s);
  for (int r = 0; r < h.nt; ++r)
    for (int i = 0; i < h.nx; ++i)
      d.gradient.at(i, r) = -(h.at(wrap_index(i + s, h.nx), r) - h.at(wrap_index(i - s, h.nx), r)) * inv;
  d.orbit = &orbit;
  d.radius = radius;
  return d;
}

double ExitTube::center_at(double t) const { return orbit ? orbit_position(*orbit, t) : center; }

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

SdeEnsemble simulate_paths(const HamiltonianModel& model, const DriftField& drift, const SdeOptions& o) {
  if (o.n_paths < 1) throw ConfigurationError("simulate_paths: n_paths must be positive");
  if (!(o.dt > 0.0) || !(o.kappa > 0.0)) throw ConfigurationError("simulate_paths: dt and kappa must be positive");
  if (o.epsilon < 0.0) throw ConfigurationError("simulate_paths: epsilon must be nonnegative");
  if (o.track_exit) {
    if (!(o.tube.delta > 0.0 && o.tube.delta < 0.5)) throw ConfigurationError("simulate_paths: delta outside (0, 1/2)");
    if (o.epsilon > 0.0 && o.dt > o.tube.delta * o.tube.delta / (8.0 * o.epsilon))
      throw ConfigurationError("simulate_paths: dt exceeds delta^2 / (8 eps)");
  }

  SdeEnsemble ens;
  ens.epsilon = o.epsilon;
  ens.drift_source = drift.source;
  ens.n_paths = o.n_paths;
  ens.dt = o.dt;
  ens.seed = o.seed;
  ens.kappa = o.kappa;
  ens.exit_radius = o.track_exit ? o.tube.delta : 0.0;
  ens.final_x.assign(o.n_paths, 0.0);
  if (o.track_exit) ens.tau_samples.assign(o.n_paths, 0.0);
  std::vector<std::uint8_t> capped(o.n_paths, 0), flagged(o.n_paths, 0);

  const int steps = std::max(1, static_cast<int>(std::lround(o.kappa / o.dt)));
  const double dt = o.kappa / steps;
  const double sigma = std::sqrt(2.0 * o.epsilon * dt);
  const double bridge = 2.0 * o.epsilon * dt;
  const double delta = o.tube.delta;

  parallel_for(std::size_t(o.n_paths), [&](std::size_t path) {
    std::mt19937_64 rng(path_seed(o.seed, path));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    double x = o.x0;
    double y = o.track_exit ? circle_diff(x, o.tube.center_at(o.t0)) : 0.0;
    double tau = o.kappa;
    bool exited = false;
    for (int k = 0; k < steps; ++k) {
      const double s = o.t0 + k * dt;
      if (!drift.valid_at(x, s)) flagged[path] = 1;
      x += drift(model, wrap01(x), s) * dt + (sigma > 0.0 ? sigma * normal(rng) : 0.0);
      if (!o.track_exit) continue;
      const double y_next = circle_diff(x, o.tube.center_at(s + dt));
      bool out = std::abs(y_next) >= delta;
      if (!out && bridge > 0.0) {
        const double p = std::exp(-2.0 * (delta - y) * (delta - y_next) / bridge) +
                         std::exp(-2.0 * (delta + y) * (delta + y_next) / bridge);
        out = uniform(rng) < p;
      }
      y = y_next;
      if (out) {
        tau = (k + 1) * dt;
        exited = true;
        break;
      }
    }
    ens.final_x[path] = x;
    if (o.track_exit) {
      ens.tau_samples[path] = std::min(tau, o.kappa);
      capped[path] = exited ? 0 : 1;
    }
  });
  for (int i = 0; i < o.n_paths; ++i) {
    ens.capped += capped[i];
    ens.flagged += flagged[i];
  }
  return ens;
}

MeanEstimate estimate_mean(const std::vector<double>& samples) {
  MeanEstimate m;
  const std::size_t n = samples.size();
  if (n == 0) throw PreconditionError("estimate_mean: no samples");
  double sum = 0.0;
  for (double v : samples) sum += v;
  m.mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - m.mean) * (v - m.mean);
  m.se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  m.ci_low = m.mean - 1.96 * m.se;
  m.ci_high = m.mean + 1.96 * m.se;
  return m;
}

ExitTimeReport exit_time_scaling(const HamiltonianModel& model, const PeriodicOrbit& orbit,
                                 const DriftProvider& drift_for, const ExitTimeOptions& options) {
  const auto& eps = options.eps_list;
  if (eps.empty()) throw ConfigurationError("exit_time_scaling: empty eps_list");
  for (std::size_t k = 1; k < eps.size(); ++k)
    if (!(eps[k] < eps[k - 1])) throw ConfigurationError("exit_time_scaling: eps_list must be strictly decreasing");

  ExitTimeReport rep;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const double e = eps[k];
    SdeOptions so;
    so.epsilon = e;
    so.n_paths = options.n_paths;
    so.dt = std::min(options.max_dt, options.dt_fraction * options.delta * options.delta / (2.0 * e));
    so.seed = options.seed;
    so.kappa = options.kappa;
    so.x0 = orbit.anchor.x;
    so.t0 = 0.0;
    so.track_exit = true;
    so.tube.delta = options.delta;
    so.tube.orbit = &orbit;
    const DriftField drift = drift_for(e);
    const SdeEnsemble ens = simulate_paths(model, drift, so);

    ExitTimeRow row;
    row.epsilon = e;
    row.n_paths = ens.n_paths;
    row.dt = so.dt;
    row.tau = estimate_mean(ens.tau_samples);
    row.capped_fraction = double(ens.capped) / ens.n_paths;
    if (k == 0 && row.capped_fraction > 0.5) {
      std::ostringstream msg;
      msg << "exit_time_scaling: " << 100.0 * row.capped_fraction << "% of the paths reach kappa=" << options.kappa
          << " at eps=" << e << "; increase kappa";
      throw ConfigurationError(msg.str());
    }
    auto eps_log = [e](double v) { return v > 0.0 ? e * std::log(v) : -std::numeric_limits<double>::infinity(); };
    row.eps_log_mean_tau = eps_log(row.tau.mean);
    row.eps_log_ci_low = eps_log(row.tau.ci_low);
    row.eps_log_ci_high = eps_log(row.tau.ci_high);
    rep.rows.push_back(row);
  }
  rep.positive_pass = true;
  rep.monotone_pass = true;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    if (!(rep.rows[k].eps_log_mean_tau > 0.0)) rep.positive_pass = false;
    if (k > 0 && rep.rows[k].eps_log_ci_high < rep.rows[k - 1].eps_log_ci_low) rep.monotone_pass = false;
  }
  return rep;
}

LaxProbe lax_estimate(const HamiltonianModel& model, const ViscousSolution& sol, const DriftField& drift, double x,
                      double t, const LaxOptions& o) {
  if (o.n_paths < 2) throw ConfigurationError("lax_estimate: at least two paths required");
  if (!(o.dt > 0.0) || !(o.kappa > 0.0)) throw ConfigurationError("lax_estimate: dt and kappa must be positive");
  const int steps = std::max(1, static_cast<int>(std::lround(o.kappa / o.dt)));
  const double dt = o.kappa / steps;
  const double sigma = std::sqrt(2.0 * sol.epsilon * dt);
  std::vector<double> values(o.n_paths);

  parallel_for(std::size_t(o.n_paths), [&](std::size_t path) {
    std::mt19937_64 rng(path_seed(o.seed, path));
    std::normal_distribution<double> normal;
    double X = x;
    double u = drift(model, wrap01(X), t);
    double cost_prev = model.lagrangian(wrap01(X), u, t).L;
    double cost = 0.0;
    for (int k = 0; k < steps; ++k) {
      X += u * dt + sigma * normal(rng);
      const double s = t + (k + 1) * dt;
      u = drift(model, wrap01(X), s);
      const double c_next = model.lagrangian(wrap01(X), u, s).L;
      cost += 0.5 * dt * (cost_prev + c_next);
      cost_prev = c_next;
    }
    values[path] = sol.phi.sample(X, t + o.kappa) - cost - sol.c_eps * o.kappa;
  });

  const MeanEstimate m = estimate_mean(values);
  LaxProbe p;
  p.x = x;
  p.t = t;
  p.lhs = sol.phi.sample(x, t);
  p.rhs = m.mean;
  p.se = m.se;
  p.residual = std::abs(p.lhs - p.rhs);
  p.pass = p.residual <= std::max(o.tolerance, 2.0 * p.se);
  p.advisory = p.se > 0.5 * o.tolerance;
  return p;
}

bool LaxReport::pass() const {
  return !probes.empty() && std::all_of(probes.begin(), probes.end(), [](const LaxProbe& p) { return p.pass; });
}

LaxReport lax_residual(const HamiltonianModel& model, const ViscousSolution& sol, const LaxOptions& options) {
  LaxReport rep;
  rep.tolerance = options.tolerance;
  const DriftField drift = optimal_drift(sol);
  for (std::size_t i = 0; i < options.probe_x.size(); ++i) {
    LaxOptions o = options;
    o.seed = path_seed(options.seed, 1000003ULL + i);
    rep.probes.push_back(lax_estimate(model, sol, drift, options.probe_x[i], options.probe_t, o));
  }
  return rep;
}

}  // namespace wkam
