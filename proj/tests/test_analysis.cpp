#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wkam/analysis.hpp"
#include "wkam/error.hpp"

using namespace wkam;
using doctest::Approx;

namespace {

Potential double_well() { return Potential({{0, 0, -0.5, 0.0}, {2, 0, 0.5, 0.0}}); }

PeriodicOrbit rest_orbit(double x, int samples_per_unit) {
  PeriodicOrbit o;
  o.anchor = {x, 0.0, 0.0};
  for (int r = 0; r <= samples_per_unit; ++r) o.samples.push_back({x, 0.0, double(r) / samples_per_unit});
  o.hyperbolic = true;
  return o;
}

struct WellBarriers {
  ActionKernelSet kernels;
  std::vector<BarrierField> fields;
};

const WellBarriers& well_barriers() {
  static const WellBarriers w = [] {
    WellBarriers b{build_kernels(HamiltonianModel::mechanical(double_well()), {200, 16}, 4.0), {}};
    const double c = critical_value(b.kernels).c;
    b.fields = {anchored_barrier(b.kernels, c, 0.0, 1), anchored_barrier(b.kernels, c, 0.5, 1)};
    return b;
  }();
  return w;
}

}  // namespace

TEST_CASE("orbit selection") {
  CHECK(selected_orbits({10.88, 6.28}) == std::vector<int>{1});
  CHECK(selected_orbits({5.0, 5.0 * (1 + 1e-6), 7.0}) == std::vector<int>{0, 1});
  CHECK(selected_orbits({3.0}) == std::vector<int>{0});
}

TEST_CASE("predicted limit") {
  const auto& f = well_barriers().fields;
  SUBCASE("unique minimizer gives -h_I") {
    const GridField lim = predicted_limit({0.0, 0.0}, f, {1});
    for (std::size_t q = 0; q < lim.values.size(); ++q) REQUIRE(lim.values[q] == -f[1].h.values[q]);
  }
  SUBCASE("single orbit with an anchor value") {
    const GridField lim = predicted_limit({0.3}, {f[0]}, {0});
    for (std::size_t q = 0; q < lim.values.size(); ++q) REQUIRE(lim.values[q] == Approx(0.3 - f[0].h.values[q]));
  }
  SUBCASE("symmetric double well: max of both, invariant under a half turn") {
    const GridField lim = predicted_limit({0.0, 0.0}, f, {0, 1});
    double asym = 0.0;
    for (int r = 0; r < lim.nt; ++r)
      for (int i = 0; i < lim.nx; ++i) {
        REQUIRE(lim.at(i, r) == std::max(-f[0].h.at(i, r), -f[1].h.at(i, r)));
        asym = std::max(asym, std::abs(lim.at(i, r) - lim.at((i + lim.nx / 2) % lim.nx, r)));
      }
    CHECK(asym <= 0.01);
  }
  SUBCASE("incompatible anchor values are rejected") {
    CHECK_THROWS_AS(predicted_limit({0.0, 5.0}, f, {0, 1}), PreconditionError);
  }
}

TEST_CASE("local maxima and representation") {
  const auto& f = well_barriers().fields;
  const auto B = barrier_matrix(f);
  CHECK(local_maximum_set({0.0, 0.0}, B) == std::vector<int>{0, 1});
  CHECK(local_maximum_set({0.0, -B[1][0]}, B) == std::vector<int>{0});
  GridField phi(f[0].h.nx, f[0].h.nt);
  for (std::size_t q = 0; q < phi.values.size(); ++q) phi.values[q] = std::max(-f[0].h.values[q], -f[1].h.values[q]);
  CHECK(representation_defect(phi, f, {0, 1}) <= 0.01);
  CHECK(representation_defect(phi, f, {0}) > 0.1);
}

TEST_CASE("free particle sweep has zero limit error") {
  const GridSpec g{64, 16};
  BarrierField h0;
  h0.h = GridField(g.nx, g.nt);
  h0.phi_pot = h0.h;
  SweepInputs in;
  in.orbits = {rest_orbit(0.0, g.nt)};
  in.fields = {h0};
  in.lambdas = {1.0};
  SweepOptions opts;
  opts.grid = g;
  opts.eps_list = {0.02, 0.01};
  const auto r = sweep(HamiltonianModel::mechanical(Potential{}), in, opts);
  for (double e : r.limit_errors) CHECK(e == 0.0);
  for (double c : r.c_records) CHECK(c == 0.0);
  CHECK(r.bracket_pass);
  CHECK(r.trend_pass);

  opts.eps_list = {0.01, 0.02};
  CHECK_THROWS_AS(sweep(HamiltonianModel::mechanical(Potential{}), in, opts), ConfigurationError);
}

TEST_CASE("slope fit") {
  const double c0 = 0.1, lam = 2 * oracle::pi;
  std::vector<double> eps{0.02, 0.01, 0.005, 0.0025}, c;
  for (double e : eps) c.push_back(c0 - lam * e + e * e);
  const auto v = slope_fit(eps, c, c0, lam);
  // the fit runs on the two smallest eps, where the curvature adds eps_a + eps_b to the slope
  CHECK(std::abs(v.slope_fit + lam) <= 2 * eps.front());
  CHECK(v.slope_fit == Approx(-lam + 0.0075).epsilon(1e-9));
  CHECK(v.intercept == Approx(c0 - 0.005 * 0.0025).epsilon(1e-9));
  CHECK(v.pass());

  std::vector<double> steep;
  for (double e : eps) steep.push_back(c0 - 2 * lam * e);
  const auto w = slope_fit(eps, steep, c0, lam);
  CHECK_FALSE(w.secant_pass);
  CHECK_FALSE(w.fit_pass);
}

TEST_CASE("zero-momentum range") {
  const auto r = zero_momentum_range(HamiltonianModel::mechanical(benchmark_potential()));
  double lo = 0.0;
  for (int i = 0; i < 100000; ++i) lo = std::min(lo, oracle::benchmark_v(i / 100000.0));
  CHECK(r.max == Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(r.min - lo) <= 1e-5);
}

TEST_CASE("rescaling") {
  SUBCASE("autonomous benchmark is vacuous") {
    const auto m = HamiltonianModel::mechanical(benchmark_potential());
    RescaleOptions opts;
    opts.grid = {100, 16};
    const auto r = rescale_check(m, aubry_orbits(m).orbits, opts);
    CHECK(r.N == 1);
    CHECK(r.vacuous);
    CHECK(r.identity_pass);
  }
  SUBCASE("traveling wave k = 2") {
    const auto m = HamiltonianModel::traveling_wave(double_well(), 2);
    OrbitOptions oo;
    oo.samples_per_unit = 50;
    AubrySearchOptions ao;
    ao.orbit = oo;
    RescaleOptions opts;
    opts.orbit = oo;
    const auto r = rescale_check(m, aubry_orbits(m, ao).orbits, opts);
    CHECK(r.N == 2);
    CHECK(r.identity_error <= 0.02);
    CHECK(r.lambda_scaled_error <= 1e-6);
    for (const auto& o : r.orbits) CHECK(o.lambda_N == Approx(o.lambda / 2).epsilon(1e-8));
  }
}

TEST_CASE("traveling wave example") {
  // V(y) = (cos 4 pi y - 1)/2, maxima at 0 and 1/2 with V'' = -8 pi^2
  const auto r = example_verify(2, double_well());
  CHECK(r.maxima_covered);
  REQUIRE(r.maxima.size() == 2);
  CHECK(r.translate_error <= 1e-8);
  for (const auto& o : r.orbits) {
    CHECK(o.oracle == Approx(std::sqrt(8.0) * oracle::pi).epsilon(1e-12));
    CHECK(std::abs(o.lambda - o.oracle) <= 1e-3);
    CHECK(o.fd.deviation <= 0.05);
    CHECK(o.shift_error <= 0.02);
  }
  CHECK(r.pass());
}
