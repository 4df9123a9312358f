#include "wkam/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>

#include "wkam/analysis.hpp"
#include "wkam/cli/config.hpp"
#include "wkam/cli/reports.hpp"
#include "wkam/error.hpp"
#include "wkam/orbit_hessian.hpp"
#include "wkam/parallel.hpp"
#include "wkam/stochastic.hpp"

#ifndef WKAM_VERSION
#define WKAM_VERSION "unknown"
#endif

namespace wkam::cli {

using nlohmann::json;

const char* version() { return WKAM_VERSION; }

namespace {

json complex_pair(const std::array<std::complex<double>, 2>& z) {
  return json::array({json::array({z[0].real(), z[0].imag()}), json::array({z[1].real(), z[1].imag()})});
}

double ratio_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo <= 0.0) return *hi <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

// Lazily evaluated pipeline stages; each stage records its results, verdicts and wall time.
class Pipeline {
public:
  Pipeline(const ExperimentConfig& config, const ReportWriter& writer, std::ostream& log)
      : cfg_(config), writer_(writer), log_(log), model_(config.build_model()) {}

  json results = json::object();
  json verdicts = json::object();
  json wall_times = json::object();

  void verdict(const std::string& name, bool pass) {
    verdicts[name] = pass;
    log_ << "  " << (pass ? "PASS " : "FAIL ") << name << '\n';
  }

  template <class F>
  void timed(const std::string& stage, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    log_ << "[" << stage << "]\n";
    body();
    wall_times[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  OrbitOptions orbit_options() const {
    OrbitOptions o;
    o.shoot_tol = cfg_.numerics.shoot_tol;
    o.samples_per_unit = cfg_.grid.nt;
    return o;
  }

  const std::vector<PeriodicOrbit>& orbits() {
    if (orbits_) return *orbits_;
    timed("orbits", [&] {
      const HypothesisReport hyp = verify_hypotheses(model_);
      AubrySearchOptions search;
      search.orbit = orbit_options();
      const AubrySearchResult found = aubry_orbits(model_, search);
      json list = json::array();
      for (const auto& o : found.orbits)
        list.push_back({{"anchor_x", o.anchor.x},
                        {"anchor_p", o.anchor.p},
                        {"period", o.period},
                        {"winding", o.winding},
                        {"multipliers", complex_pair(o.multipliers)},
                        {"floquet_exponents", complex_pair(o.floquet_exponents)},
                        {"hyperbolic", o.hyperbolic},
                        {"residual", o.residual},
                        {"newton_iterations", o.newton_iterations}});
      results["orbits"] = {{"hypotheses",
                            {{"min_hpp", hyp.min_hpp},
                             {"growth_band", {hyp.growth_band_low, hyp.growth_band_high}},
                             {"growth_min", hyp.growth_min},
                             {"periodicity_x_residual", hyp.periodicity_x_residual},
                             {"periodicity_t_residual", hyp.periodicity_t_residual}}},
                           {"orbits", list},
                           {"rejected", found.rejected}};
      verdict("hypothesis_convexity", hyp.convexity_pass);
      verdict("hypothesis_growth", hyp.growth_pass);
      verdict("hypothesis_periodicity", hyp.periodicity_pass);
      verdict("orbits_hyperbolic", std::all_of(found.orbits.begin(), found.orbits.end(),
                                               [](const PeriodicOrbit& o) { return o.hyperbolic; }));
      orbits_ = found.orbits;
    });
    return *orbits_;
  }

  const ActionKernelSet& kernels() {
    if (!kernels_) kernels_ = std::make_unique<ActionKernelSet>(build_kernels(model_, cfg_.grid, cfg_.numerics.vmax));
    return *kernels_;
  }

  const CriticalValue& critical() {
    if (critical_) return *critical_;
    timed("critical", [&] {
      const CriticalValue cv = critical_value(kernels());
      results["critical"] = {{"c", cv.c},
                             {"c_power", cv.c_power},
                             {"power_lower", cv.power_lower},
                             {"power_upper", cv.power_upper},
                             {"power_exact", cv.power_exact},
                             {"power_iterations", cv.power_iterations},
                             {"cyclicity", cv.cyclicity},
                             {"band", kernels().band()},
                             {"nx", cfg_.grid.nx},
                             {"nt", cfg_.grid.nt},
                             {"vmax", cfg_.numerics.vmax}};
      verdict("critical_routes_agree", std::abs(cv.c - cv.c_power) <= 1e-6);
      critical_ = cv;
    });
    return *critical_;
  }

  const std::vector<HessianCurve>& curves() {
    if (curves_) return *curves_;
    const auto& os = orbits();
    timed("hessian", [&] {
      std::vector<HessianCurve> cs;
      for (std::size_t i = 0; i < os.size(); ++i) cs.push_back(barrier_hessian_curve(model_, os[i], orbit_options(), int(i)));
      curves_ = std::move(cs);
    });
    return *curves_;
  }

  std::vector<double> lambdas() {
    std::vector<double> out;
    for (const auto& c : curves()) out.push_back(c.lambda);
    return out;
  }

  const std::vector<BarrierField>& barriers() {
    if (barriers_) return *barriers_;
    const auto& os = orbits();
    const double c = critical().c;
    const auto& cs = curves();
    timed("barrier", [&] {
      BarrierOptions bo;
      bo.barrier_tol = cfg_.numerics.barrier_tol;
      std::vector<BarrierField> fields;
      for (const auto& o : os) fields.push_back(anchored_barrier(kernels(), c, o.anchor.x, o.period, bo));
      const auto aubry = aubry_verify(fields, os, cfg_.numerics.aubry_tol);
      const LambdaSummary ls = lambda_averages(cs);
      json per = json::array();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const BarrierField& f = fields[i];
        double phi_excess = -std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < f.h.values.size(); ++q)
          phi_excess = std::max(phi_excess, f.phi_pot.values[q] - f.h.values[q]);
        const FdCrosscheck fd = fd_crosscheck(f, os[i], cs[i]);
        per.push_back({{"anchor_x", os[i].anchor.x},
                       {"anchor_node", f.anchor_node},
                       {"window", f.window},
                       {"periods", f.periods},
                       {"window_osc", f.window_osc},
                       {"h_at_anchor", f.h.at(f.anchor_node, f.anchor_layer)},
                       {"max_phi_minus_h", phi_excess},
                       {"aubry_residual", aubry[i].residual},
                       {"lambda", cs[i].lambda},
                       {"lambda_unstable", cs[i].lambda_unstable},
                       {"riccati_residual", cs[i].riccati_residual},
                       {"periodicity_residual", cs[i].periodicity_residual},
                       {"fd_average", fd.fd_average},
                       {"fd_deviation", fd.deviation},
                       {"fd_stencil_cells", fd.stencil_cells},
                       {"fd_warning", fd.warning}});
        const std::string tag = "_" + std::to_string(i);
        verdict("aubry_residual" + tag, aubry[i].pass);
        verdict("riccati_residual" + tag, cs[i].riccati_residual <= 1e-6);
        verdict("fd_crosscheck" + tag, fd.deviation <= cfg_.numerics.fd_tol);
        verdict("phi_below_h" + tag, phi_excess <= 1e-12);
        field_csv("barrier", std::to_string(i), {"x_index", "t_index", "x", "t", "h", "phi_pot"}, f.h, &f.phi_pot);
      }
      results["barrier"] = {{"c", c},
                            {"anchors", per},
                            {"barrier_matrix", barrier_matrix(fields)},
                            {"lambda_bar", ls.lambda_bar},
                            {"argmin", ls.argmin}};
      barriers_ = std::move(fields);
    });
    return *barriers_;
  }

  ViscousOptions viscous_options() {
    ViscousOptions vo;
    vo.cell_tol = cfg_.numerics.cell_tol;
    vo.max_periods = cfg_.numerics.max_periods;
    return vo;
  }

  // anchor of the viscous normalization: the first selected orbit, or x = 0 without orbits
  double viscous_anchor() {
    try {
      const auto& os = orbits();
      return os[selected_orbits(lambdas()).front()].anchor.x;
    } catch (const PreconditionError& e) {
      log_ << "  no Aubry orbit candidates (" << e.what() << "); normalizing at x = 0\n";
      return 0.0;
    }
  }

  void run_viscous() {
    ViscousOptions vo = viscous_options();
    vo.anchor_x = viscous_anchor();
    const auto& eps = cfg_.sweep.eps_list;
    timed("viscous", [&] {
      std::vector<ViscousSolution> sols(eps.size());
      std::vector<std::string> errors(eps.size());
      parallel_for(eps.size(), [&](std::size_t k) {
        try {
          sols[k] = solve_cell(model_, eps[k], cfg_.grid, vo);
        } catch (const Error& e) {
          errors[k] = e.what();
        }
      });
      for (const auto& e : errors)
        if (!e.empty()) throw NumericalError(e);
      const ValueRange range = zero_momentum_range(model_);
      json list = json::array();
      bool bracket = true, periodic = true, residual = true;
      for (std::size_t k = 0; k < sols.size(); ++k) {
        const auto& s = sols[k];
        const double res = residual_check(model_, s);
        list.push_back(solution_json(s, res));
        bracket = bracket && s.c_eps >= range.min - 1e-6 && s.c_eps <= range.max + 1e-6;
        periodic = periodic && s.periodicity_residual <= vo.cell_tol;
        residual = residual && res <= 10.0 * vo.cell_tol;
        write_viscous_csv(s, k);
      }
      results["viscous"] = {{"anchor_x", vo.anchor_x},
                            {"bracket", {range.min, range.max}},
                            {"solutions", list}};
      verdict("viscous_bracket", bracket);
      verdict("viscous_periodic", periodic);
      verdict("viscous_residual", residual);
    });
  }

  json solution_json(const ViscousSolution& s, double residual) {
    return {{"epsilon", s.epsilon},
            {"c_eps", s.c_eps},
            {"lip_x", s.lip_x},
            {"semiconvexity_const", s.semiconvexity_const},
            {"periodicity_residual", s.periodicity_residual},
            {"residual_check", residual},
            {"residual_history", s.residual_history},
            {"periods", s.periods},
            {"steps_per_substep", s.steps_per_substep},
            {"total_steps", s.total_steps},
            {"ds", s.ds}};
  }

  // field CSVs keep their stage name whichever command produced them
  void field_csv(const std::string& stage, const std::string& suffix, const std::vector<std::string>& header,
                 const GridField& a, const GridField* b = nullptr) {
    ReportWriter w(output_, stage, hash_);
    w.csv_field(suffix, header, a, b);
    field_files_.insert(field_files_.end(), w.written().begin(), w.written().end());
  }

  void write_viscous_csv(const ViscousSolution& s, std::size_t k) {
    field_csv("viscous", std::to_string(k), {"x_index", "t_index", "x", "t", "phi"}, s.phi);
  }

  const std::vector<std::string>& field_files() const { return field_files_; }

  void set_hash(const std::string& h, const OutputConfig& o) {
    hash_ = h;
    output_ = o;
  }

  void run_sweep() {
    SweepInputs in;
    in.orbits = orbits();
    in.c0 = critical().c;
    in.fields = barriers();
    in.lambdas = lambdas();
    timed("sweep", [&] {
      SweepOptions so;
      so.eps_list = cfg_.sweep.eps_list;
      so.grid = cfg_.grid;
      so.viscous = viscous_options();
      so.grid_tol = cfg_.numerics.grid_tol;
      const SweepReport r = sweep(model_, in, so);
      const SlopeVerdict sv = slope_fit(r, cfg_.numerics.slope_tol);
      std::vector<std::vector<double>> rows;
      json sols = json::array();
      for (std::size_t k = 0; k < r.eps_list.size(); ++k) {
        rows.push_back({r.eps_list[k], r.c_records[k], r.slope_secants[k], r.limit_errors[k], r.grad_errors[k],
                        r.lip_x[k], r.semiconvexity_const[k]});
        sols.push_back(solution_json(r.solutions[k], r.residuals[k]));
        write_viscous_csv(r.solutions[k], k);
      }
      writer_.csv("", {"epsilon", "c_eps", "secant", "limit_error", "grad_error", "lip_x", "semiconvexity_const"},
                  rows);
      const double lip_spread = ratio_spread(r.lip_x);
      const double semi_spread = ratio_spread(r.semiconvexity_const);
      json selected_x = json::array();
      for (int i : r.selected) selected_x.push_back(in.orbits[i].anchor.x);
      results["sweep"] = {{"eps_list", r.eps_list},
                          {"c_records", r.c_records},
                          {"c0", r.c0},
                          {"slope_secants", r.slope_secants},
                          {"slope_fit", sv.slope_fit},
                          {"slope_intercept", sv.intercept},
                          {"lambda_bar", r.lambda_bar},
                          {"selected", r.selected},
                          {"selected_x", selected_x},
                          {"anchor_values", r.anchor_values},
                          {"limit_errors", r.limit_errors},
                          {"grad_errors", r.grad_errors},
                          {"lip_x", r.lip_x},
                          {"semiconvexity_const", r.semiconvexity_const},
                          {"lip_spread", lip_spread},
                          {"semiconvexity_spread", semi_spread},
                          {"bracket", {r.bracket.min, r.bracket.max}},
                          {"solutions", sols}};
      verdict("sweep_bracket", r.bracket_pass);
      verdict("sweep_limit_trend", r.trend_pass);
      verdict("sweep_final_limit_error", r.limit_errors.back() <= cfg_.numerics.limit_tol);
      verdict("slope_secant_bound", sv.secant_pass);
      verdict("slope_fit", sv.fit_pass);
      verdict("regularity_uniform", lip_spread <= 2.0 && semi_spread <= 2.0);
    });
  }

  void run_rescale() {
    const auto& os = orbits();
    timed("rescale", [&] {
      RescaleOptions ro;
      ro.grid = cfg_.grid;
      ro.vmax = cfg_.numerics.vmax;
      ro.grid_tol = cfg_.numerics.grid_tol;
      ro.orbit = orbit_options();
      ro.barrier.barrier_tol = cfg_.numerics.barrier_tol;
      const RescaleReport r = rescale_check(model_, os, ro);
      json per = json::array();
      for (const auto& o : r.orbits)
        per.push_back({{"anchor_x", o.anchor_x},
                       {"identity_error", o.identity_error},
                       {"worst_node", o.worst_node},
                       {"worst_layer", o.worst_layer},
                       {"lambda", o.lambda},
                       {"lambda_N", o.lambda_N}});
      results["rescale"] = {{"N", r.N},
                            {"vacuous", r.vacuous},
                            {"c", r.c},
                            {"c_N", r.c_N},
                            {"identity_error", r.identity_error},
                            {"lambda_literal_error", r.lambda_literal_error},
                            {"lambda_scaled_error", r.lambda_scaled_error},
                            {"orbits", per}};
      verdict("rescale_identity", r.identity_pass);
      verdict("rescale_lambda", r.lambda_scaled_pass);
    });
  }

  void run_example() {
    if (!cfg_.example.enabled) {
      log_ << "[example] skipped: no example block and the model is not TravelingWave\n";
      return;
    }
    timed("example", [&] {
      ExampleOptions eo;
      eo.grid = cfg_.example.grid;
      eo.vmax = cfg_.numerics.vmax;
      eo.fd_tol = cfg_.numerics.fd_tol;
      eo.shift_tol = 2.0 * cfg_.numerics.grid_tol;
      const ExampleReport r = example_verify(cfg_.example.k, cfg_.example.potential, eo);
      json per = json::array();
      for (const auto& o : r.orbits)
        per.push_back({{"anchor_x", o.anchor_x},
                       {"lambda", o.lambda},
                       {"sqrt_minus_v2", o.oracle},
                       {"riccati_error", o.riccati_error},
                       {"fd_average", o.fd.fd_average},
                       {"fd_deviation", o.fd.deviation},
                       {"fd_stencil_cells", o.fd.stencil_cells},
                       {"shift_error", o.shift_error}});
      results["example"] = {{"k", r.k},
                            {"maxima", r.maxima},
                            {"translate_error", r.translate_error},
                            {"c", r.c},
                            {"orbits", per},
                            {"failures", r.failures}};
      verdict("example_translates", r.translates_pass);
      verdict("example_riccati", r.riccati_pass);
      verdict("example_fd", r.fd_pass);
      verdict("example_shift", r.shift_pass);
    });
  }

  void run_stochastic() {
    const auto& os = orbits();
    const auto ls = lambdas();
    const PeriodicOrbit& orbit = os[selected_orbits(ls).front()];
    const auto& sc = cfg_.stochastic;
    timed("stochastic", [&] {
      ViscousOptions vo = viscous_options();
      vo.anchor_x = orbit.anchor.x;
      ExitTimeOptions eo;
      eo.eps_list = sc.eps_list;
      eo.delta = sc.delta;
      eo.n_paths = sc.n_paths;
      eo.kappa = sc.kappa;
      eo.seed = sc.seed;
      eo.max_dt = sc.dt;
      const ExitTimeReport fw = exit_time_scaling(
          model_, orbit, [&](double e) { return optimal_drift(solve_cell(model_, e, cfg_.grid, vo)); }, eo);
      std::vector<std::vector<double>> rows;
      for (const auto& r : fw.rows)
        rows.push_back({r.epsilon, double(r.n_paths), r.tau.mean, r.tau.ci_low, r.tau.ci_high, r.eps_log_mean_tau,
                        r.capped_fraction});
      writer_.csv("", {"epsilon", "n_paths", "mean_tau", "ci_low", "ci_high", "eps_log_mean_tau", "capped_fraction"},
                  rows);

      const ViscousSolution sol = solve_cell(model_, sc.lax_epsilon, cfg_.grid, vo);
      LaxOptions lo;
      lo.kappa = sc.lax_kappa;
      lo.n_paths = sc.lax_paths;
      lo.dt = sc.lax_dt;
      lo.seed = sc.seed;
      const LaxReport lax = lax_residual(model_, sol, lo);
      std::vector<std::vector<double>> probe_rows;
      json probes = json::array();
      for (const auto& p : lax.probes) {
        probe_rows.push_back({p.x, p.t, p.lhs, p.rhs, p.se, p.residual});
        probes.push_back({{"x", p.x}, {"t", p.t}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"se", p.se},
                          {"residual", p.residual}, {"pass", p.pass}, {"advisory_more_paths", p.advisory}});
      }
      writer_.csv("lax", {"x", "t", "lhs", "rhs", "se", "residual"}, probe_rows);

      json fw_rows = json::array();
      for (const auto& r : fw.rows)
        fw_rows.push_back({{"epsilon", r.epsilon},
                           {"n_paths", r.n_paths},
                           {"mean_tau", r.tau.mean},
                           {"se", r.tau.se},
                           {"ci_low", r.tau.ci_low},
                           {"ci_high", r.tau.ci_high},
                           {"eps_log_mean_tau", r.eps_log_mean_tau},
                           {"capped_fraction", r.capped_fraction},
                           {"dt", r.dt}});
      results["stochastic"] = {{"orbit_x", orbit.anchor.x},
                               {"delta", sc.delta},
                               {"kappa", sc.kappa},
                               {"seed", sc.seed},
                               {"exit_times", fw_rows},
                               {"lax_epsilon", sc.lax_epsilon},
                               {"lax_probes", probes}};
      verdict("exit_time_positive", fw.positive_pass);
      verdict("exit_time_monotone", fw.monotone_pass);
      verdict("lax_residual", lax.pass());
    });
  }

private:
  const ExperimentConfig& cfg_;
  const ReportWriter& writer_;
  std::ostream& log_;
  HamiltonianModel model_;
  std::string hash_;
  OutputConfig output_;
  std::vector<std::string> field_files_;
  std::optional<std::vector<PeriodicOrbit>> orbits_;
  std::unique_ptr<ActionKernelSet> kernels_;
  std::optional<CriticalValue> critical_;
  std::optional<std::vector<HessianCurve>> curves_;
  std::optional<std::vector<BarrierField>> barriers_;
};

}  // namespace

int run_config(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(commands().begin(), commands().end(), options.command) == commands().end())
      throw ConfigurationError("command: unknown command '" + options.command + "'");
    ExperimentConfig cfg = load_config(options.config_path, options.seed);
    if (options.out_dir) cfg.output.directory = *options.out_dir;
    set_worker_count(options.workers);

    const std::string hash = config_hash(cfg.raw);
    const ReportWriter writer(cfg.output, options.command, hash);
    Pipeline p(cfg, writer, out);
    p.set_hash(hash, cfg.output);

    const std::string& c = options.command;
    const bool all = c == "all";
    if (all || c == "orbits") p.orbits();
    if (all || c == "critical") p.critical();
    if (all || c == "barrier") p.barriers();
    if (c == "viscous") p.run_viscous();
    if (all || c == "sweep") p.run_sweep();
    if (all || c == "rescale") p.run_rescale();
    if (all || c == "example") p.run_example();
    if (all || c == "stochastic") p.run_stochastic();

    bool pass = true;
    for (auto it = p.verdicts.begin(); it != p.verdicts.end(); ++it) pass = pass && it.value().get<bool>();
    const json report = {{"command", c},
                         {"version", version()},
                         {"config_hash", hash},
                         {"config", cfg.raw},
                         {"results", p.results},
                         {"verdicts", p.verdicts},
                         {"pass", pass},
                         {"wall_times", p.wall_times}};
    writer.json(report);
    for (const auto& f : p.field_files()) out << "wrote " << f << '\n';
    for (const auto& f : writer.written()) out << "wrote " << f << '\n';
    out << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace wkam::cli
