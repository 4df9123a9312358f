#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wkam/error.hpp"
#include "wkam/parallel.hpp"
#include "wkam/stochastic.hpp"

using namespace wkam;
using doctest::Approx;

namespace {

Potential double_well() { return Potential({{0, 0, -0.5, 0.0}, {2, 0, 0.5, 0.0}}); }

SdeOptions flat_exit(double eps, double delta, int n) {
  SdeOptions o;
  o.epsilon = eps;
  o.n_paths = n;
  o.dt = std::min(1e-3, 0.01 * delta * delta / (2 * eps));
  o.kappa = 50.0;
  o.seed = 42;
  o.x0 = 0.3;
  o.track_exit = true;
  o.tube.delta = delta;
  o.tube.center = 0.3;
  return o;
}

}  // namespace

TEST_CASE("noiseless paths") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  SUBCASE("zero drift keeps paths constant") {
    SdeOptions o;
    o.epsilon = 0.0;
    o.n_paths = 10;
    o.kappa = 1.0;
    o.x0 = 0.37;
    const auto e = simulate_paths(m, zero_drift(), o);
    for (double x : e.final_x) CHECK(x == 0.37);
  }
  SUBCASE("constant drift moves at that speed") {
    SdeOptions o;
    o.n_paths = 3;
    o.kappa = 2.0;
    o.x0 = 0.1;
    const auto e = simulate_paths(m, constant_drift(0.25), o);
    for (double x : e.final_x) CHECK(x == Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("optimal drift of the traveling wave follows the orbit") {
  const auto m = HamiltonianModel::traveling_wave(double_well(), 2);
  ViscousOptions vo;
  vo.anchor_x = 0.0;
  const auto sol = solve_cell(m, 0.002, {400, 50}, vo);
  SdeOptions o;
  o.epsilon = 0.0;
  o.n_paths = 1;
  o.kappa = 1.0;
  o.dt = 1e-3;
  o.x0 = 0.0;
  const auto e = simulate_paths(m, optimal_drift(sol), o);
  CHECK(std::abs(e.final_x[0] - (0.0 - 1.0 / 2)) <= 0.01);
}

TEST_CASE("martingale property of the driftless walk") {
  const auto m = HamiltonianModel::mechanical(Potential{});
  SdeOptions o;
  o.epsilon = 0.05;
  o.n_paths = 4000;
  o.kappa = 1.0;
  o.dt = 1e-2;
  o.x0 = 0.5;
  const auto e = simulate_paths(m, zero_drift(), o);
  double mean = 0.0;
  for (double x : e.final_x) mean += (x - 0.5) / e.final_x.size();
  CHECK(std::abs(mean) <= 3 * std::sqrt(2 * o.epsilon * o.kappa / o.n_paths));
}

TEST_CASE("flat exit time") {
  const auto m = HamiltonianModel::mechanical(Potential{});
  const auto e = simulate_paths(m, zero_drift(), flat_exit(0.01, 0.1, 4000));
  const auto est = estimate_mean(e.tau_samples);
  CHECK(std::abs(est.mean - oracle::flat_exit_time(0.1, 0.01)) <= 3 * est.se);
  for (double t : e.tau_samples) {
    REQUIRE(t > 0.0);
    REQUIRE(t <= 50.0);
  }
  CHECK(est.ci_low < est.mean);
  CHECK(est.ci_high == Approx(est.mean + 1.96 * est.se));

  SUBCASE("a wider tube takes longer to leave") {
    const auto wide = simulate_paths(m, zero_drift(), flat_exit(0.01, 0.2, 2000));
    CHECK(estimate_mean(wide.tau_samples).mean > est.mean);
  }
  SUBCASE("too coarse a step is rejected") {
    auto o = flat_exit(0.01, 0.1, 10);
    o.dt = 0.2;
    CHECK_THROWS_AS(simulate_paths(m, zero_drift(), o), ConfigurationError);
  }
}

TEST_CASE("reproducibility") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  auto o = flat_exit(0.02, 0.1, 500);
  set_worker_count(1);
  const auto a = simulate_paths(m, constant_drift(0.1), o);
  set_worker_count(4);
  const auto b = simulate_paths(m, constant_drift(0.1), o);
  set_worker_count(0);
  CHECK(a.tau_samples == b.tau_samples);
  CHECK(a.final_x == b.final_x);
  o.seed = 43;
  CHECK(simulate_paths(m, constant_drift(0.1), o).tau_samples != a.tau_samples);
  CHECK(path_seed(1, 0) != path_seed(1, 1));
  CHECK(path_seed(1, 5) == path_seed(1, 5));
}

TEST_CASE("exit-time scaling configuration errors") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const auto orbit = find_periodic_orbit(m, {0.5, 0.0, 0.0}, 1, 0);
  ExitTimeOptions o;
  o.n_paths = 200;
  o.kappa = 0.01;
  CHECK_THROWS_AS(exit_time_scaling(m, orbit, [](double) { return zero_drift(); }, o), ConfigurationError);
}

TEST_CASE("Lax formula") {
  SUBCASE("free particle: both sides vanish") {
    const auto m = HamiltonianModel::mechanical(Potential{});
    const auto sol = solve_cell(m, 0.02, {64, 16});
    LaxOptions lo;
    lo.n_paths = 500;
    const auto r = lax_residual(m, sol, lo);
    for (const auto& p : r.probes) CHECK(p.residual <= std::max(2 * p.se, 1e-12));
    CHECK(r.pass());
  }
  SUBCASE("benchmark: optimal drift attains the value, a constant drift does not exceed it") {
    const auto m = HamiltonianModel::mechanical(benchmark_potential());
    ViscousOptions vo;
    vo.anchor_x = 0.5;
    const auto sol = solve_cell(m, 0.02, {400, 32}, vo);
    LaxOptions lo;
    lo.n_paths = 2000;
    const auto best = lax_estimate(m, sol, optimal_drift(sol), 0.3, 0.0, lo);
    CHECK(best.residual <= std::max(lo.tolerance, 2 * best.se));
    const auto sub = lax_estimate(m, sol, constant_drift(0.3), 0.3, 0.0, lo);
    CHECK(sub.rhs <= sub.lhs + 2 * sub.se);
  }
}
