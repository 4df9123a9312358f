#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "wkam/orbit_hessian.hpp"
#include "wkam/variational.hpp"

using namespace wkam;
using doctest::Approx;

namespace {

Potential double_well() { return Potential({{0, 0, -0.5, 0.0}, {2, 0, 0.5, 0.0}}); }

PeriodicOrbit rest_orbit(double x, int samples_per_unit) {
  PeriodicOrbit o;
  o.anchor = {x, 0.0, 0.0};
  for (int r = 0; r <= samples_per_unit; ++r) o.samples.push_back({x, 0.0, double(r) / samples_per_unit});
  return o;
}

}  // namespace

TEST_CASE("benchmark curvature along the fixed points") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const auto orbits = aubry_orbits(m).orbits;
  REQUIRE(orbits.size() == 2);
  std::vector<HessianCurve> curves;
  for (std::size_t i = 0; i < orbits.size(); ++i) curves.push_back(barrier_hessian_curve(m, orbits[i], {}, int(i)));

  for (std::size_t i = 0; i < orbits.size(); ++i) {
    const bool at_zero = std::abs(orbits[i].anchor.x) < 0.25 || orbits[i].anchor.x > 0.75;
    const double expect = at_zero ? 2 * oracle::pi * std::sqrt(3.0) : 2 * oracle::pi;
    CHECK(std::abs(curves[i].lambda - expect) <= 1e-3);
    const auto [lo, hi] = std::minmax_element(curves[i].P.begin(), curves[i].P.end());
    CHECK(*hi - *lo <= 1e-6);
    CHECK(curves[i].periodicity_residual <= 1e-8);
    CHECK(curves[i].riccati_residual <= 1e-6);
    CHECK(curves[i].lambda_unstable == Approx(curves[i].lambda).epsilon(1e-6));
  }

  const auto s = lambda_averages(curves);
  CHECK(std::abs(s.lambda_bar - 2 * oracle::pi) <= 1e-3);
  REQUIRE(s.argmin.size() == 1);
  CHECK(std::abs(orbits[s.argmin[0]].anchor.x - 0.5) <= 1e-9);
}

TEST_CASE("traveling wave curvature equals the autonomous value") {
  const Potential V = double_well();
  const auto m = HamiltonianModel::traveling_wave(V, 2);
  const auto orbits = aubry_orbits(m).orbits;
  REQUIRE_FALSE(orbits.empty());
  for (const auto& o : orbits) {
    const auto c = barrier_hessian_curve(m, o);
    const double y = o.anchor.x + o.anchor.t / 2;
    CHECK(std::abs(c.lambda - std::sqrt(-V.eval(y).v_xx)) <= 1e-3);
    CHECK(c.riccati_residual <= 1e-6);
  }
}

TEST_CASE("lambda averages and ties") {
  SUBCASE("symmetric double well: both orbits are selected") {
    const auto m = HamiltonianModel::mechanical(double_well());
    const auto orbits = aubry_orbits(m).orbits;
    REQUIRE(orbits.size() == 2);
    std::vector<HessianCurve> curves;
    for (const auto& o : orbits) curves.push_back(barrier_hessian_curve(m, o));
    CHECK(curves[0].lambda == Approx(2 * oracle::pi * std::sqrt(2.0)).epsilon(1e-6));
    const auto s = lambda_averages(curves);
    CHECK(s.argmin == std::vector<int>{0, 1});
  }
  SUBCASE("a single orbit") {
    HessianCurve c;
    c.lambda = 3.5;
    const auto s = lambda_averages({c});
    CHECK(s.lambda_bar == 3.5);
    CHECK(s.argmin == std::vector<int>{0});
  }
}

TEST_CASE("finite differences on an injected quadratic") {
  const double a = 50.0, x0 = 0.5;
  BarrierField f;
  f.h = GridField(400, 2);
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < 400; ++i) f.h.at(i, r) = a * (i / 400.0 - x0) * (i / 400.0 - x0);
  f.phi_pot = f.h;
  HessianCurve curve;
  curve.lambda = 2 * a;
  const auto fd = fd_crosscheck(f, rest_orbit(x0, 2), curve);
  CHECK(std::abs(fd.fd_average - 2 * a) <= 1e-6);
  CHECK(fd.deviation <= 1e-8);
  CHECK_FALSE(fd.widened);
  CHECK(second_difference(f.h, 200, 0, 3) == Approx(2 * a).epsilon(1e-9));
  CHECK(quantization_bound(f.h, 4) == Approx(2.0 / 16.0));
}

TEST_CASE("finite-difference crosscheck on the benchmark barrier") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const auto o = find_periodic_orbit(m, {0.5, 0.0, 0.0}, 1, 0, [] {
    OrbitOptions opts;
    opts.samples_per_unit = 32;
    return opts;
  }());
  const auto curve = barrier_hessian_curve(m, o);
  std::vector<double> deviations;
  for (int nx : {200, 400}) {
    const auto K = build_kernels(m, {nx, 32}, 4.0);
    const auto f = anchored_barrier(K, critical_value(K).c, 0.5, 1);
    deviations.push_back(fd_crosscheck(f, o, curve).deviation);
  }
  CHECK(deviations[1] <= 0.05);
  CHECK(deviations[1] < deviations[0]);
  MESSAGE("fd deviation nx=200: " << deviations[0] << ", nx=400: " << deviations[1]);
}
