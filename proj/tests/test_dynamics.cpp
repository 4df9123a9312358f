#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wkam/dynamics.hpp"
#include "wkam/error.hpp"

using namespace wkam;
using doctest::Approx;

namespace {

Potential double_well() { return Potential({{0, 0, -0.5, 0.0}, {2, 0, 0.5, 0.0}}); }

double circle_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d - std::floor(d), 1.0 - (d - std::floor(d)));
}

}  // namespace

TEST_CASE("rest point at a critical point of V stays put") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const auto tr = integrate(m, {0.5, 0.0, 0.0}, 3.0, 3000, false);
  for (const auto& pt : tr.points) {
    CHECK(std::abs(pt.x - 0.5) <= 1e-14);
    CHECK(std::abs(pt.p) <= 1e-14);
  }
}

TEST_CASE("free motion of the shifted kinetic Hamiltonian") {
  const auto m = HamiltonianModel::shifted_kinetic(Potential{}, 0.3);
  const auto tr = integrate(m, {0.2, 1.0, 0.0}, 2.0, 2000, false);
  for (std::size_t n = 0; n < tr.points.size(); n += 100) {
    const double t = tr.points[n].t;
    CHECK(circle_distance(tr.points[n].x, 0.2 + 1.3 * t) <= 1e-12);
    CHECK(tr.x_lifted[n] == Approx(0.2 + 1.3 * t).epsilon(1e-12));
  }
}

TEST_CASE("energy is conserved by the autonomous flow") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const PhasePoint start{0.1, 1.2, 0.0};
  const auto tr = integrate(m, start, 10.0, 10000, false);
  const double e0 = m.jet(start.x, start.p, 0.0).H;
  double drift = 0.0;
  for (const auto& pt : tr.points) drift = std::max(drift, std::abs(m.jet(pt.x, pt.p, pt.t).H - e0));
  CHECK(drift <= 1e-8);
}

TEST_CASE("fixed point of the benchmark") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  OrbitOptions opts;
  const auto o = find_periodic_orbit(m, {0.5, 0.0, 0.0}, 1, 0, opts);
  CHECK(std::abs(o.anchor.x - 0.5) <= 1e-12);
  CHECK(std::abs(o.anchor.p) <= 1e-12);

  SUBCASE("Floquet data") {
    const double mu = std::exp(2 * oracle::pi);
    CHECK(std::abs(o.multipliers[0]) == Approx(mu).epsilon(1e-6));
    CHECK(std::abs(o.multipliers[1]) == Approx(1.0 / mu).epsilon(1e-6));
    CHECK(o.floquet_exponents[0].real() == Approx(2 * oracle::pi).epsilon(1e-8));
    CHECK(o.floquet_exponents[1].real() == Approx(-2 * oracle::pi).epsilon(1e-8));
    CHECK(std::abs(o.monodromy_det - 1.0) <= 1e-8);
    CHECK(o.hyperbolic);
  }
  SUBCASE("perturbed seed converges quickly") {
    const auto q = find_periodic_orbit(m, {0.51, 0.01, 0.0}, 1, 0, opts);
    CHECK(circle_distance(q.anchor.x, 0.5) <= 1e-10);
    CHECK(std::abs(q.anchor.p) <= 1e-10);
    CHECK(q.newton_iterations <= 6);
  }
}

TEST_CASE("fixed point at x = 0 has exponents 2 pi sqrt 3") {
  const auto m = HamiltonianModel::mechanical(benchmark_potential());
  const auto o = find_periodic_orbit(m, {0.0, 0.0, 0.0}, 1, 0);
  CHECK(o.floquet_exponents[0].real() == Approx(2 * oracle::pi * std::sqrt(3.0)).epsilon(1e-8));
  CHECK(o.floquet_exponents[1].real() == Approx(-2 * oracle::pi * std::sqrt(3.0)).epsilon(1e-8));
}

TEST_CASE("orbit invariants") {
  const auto m = HamiltonianModel::traveling_wave(double_well(), 2);
  const auto o = find_periodic_orbit(m, {0.5, 0.0, 0.0}, 2, -1);
  const auto& first = o.samples.front();
  const auto& last = o.samples.back();
  double dx = last.x - first.x;
  dx -= std::round(dx - o.winding);
  CHECK(std::abs(dx - o.winding) <= 1e-10);
  CHECK(std::abs(last.p - first.p) <= 1e-10);
  CHECK(std::abs(o.monodromy_det - 1.0) <= 1e-8);
  const bool off_circle = std::abs(std::abs(o.multipliers[0]) - 1.0) > 0.1 && std::abs(std::abs(o.multipliers[1]) - 1.0) > 0.1;
  CHECK(o.hyperbolic == off_circle);

  SUBCASE("the orbit is the translate x_i - t/k with p = 0") {
    for (const auto& s : o.samples) {
      CHECK(circle_distance(s.x, 0.5 - s.t / 2) <= 1e-9);
      CHECK(std::abs(s.p) <= 1e-9);
    }
    CHECK(circle_distance(orbit_position(o, 0.75), 0.5 - 0.375) <= 1e-9);
  }
}

TEST_CASE("free particle rest orbit is not hyperbolic") {
  const auto m = HamiltonianModel::mechanical(Potential{});
  PeriodicOrbit o;
  o.period = 1;
  o.anchor = {0.3, 0.0, 0.0};
  o = classify_orbit(m, o);
  CHECK(std::abs(o.multipliers[0]) == Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(o.multipliers[1]) == Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(o.hyperbolic);
}

TEST_CASE("eigenvalues of 2x2 matrices") {
  const auto e = eigenvalues(Mat2{2.0, 0.0, 0.0, 0.5});
  CHECK(e[0].real() == Approx(2.0));
  CHECK(e[1].real() == Approx(0.5));
  const auto r = eigenvalues(Mat2{0.0, -1.0, 1.0, 0.0});
  CHECK(std::abs(r[0]) == Approx(1.0));
  CHECK(std::abs(r[0].imag()) == Approx(1.0));
}

TEST_CASE("maxima of V") {
  const auto mx = potential_maxima(benchmark_potential());
  REQUIRE(mx.size() == 2);
  CHECK(circle_distance(mx[0], 0.0) <= 1e-12);
  CHECK(circle_distance(mx[1], 0.5) <= 1e-12);
}

TEST_CASE("Aubry candidates") {
  SUBCASE("benchmark: two hyperbolic fixed points") {
    const auto r = aubry_orbits(HamiltonianModel::mechanical(benchmark_potential()));
    REQUIRE(r.orbits.size() == 2);
    for (const auto& o : r.orbits) {
      CHECK(o.period == 1);
      CHECK(o.hyperbolic);
    }
  }
  SUBCASE("single maximum") {
    const auto r = aubry_orbits(HamiltonianModel::mechanical(Potential({{0, 0, -0.5, 0.0}, {1, 0, 0.5, 0.0}})));
    REQUIRE(r.orbits.size() == 1);
    CHECK(circle_distance(r.orbits[0].anchor.x, 0.0) <= 1e-10);
  }
  SUBCASE("traveling wave: the translates of the maxima collapse to one k-periodic orbit") {
    // maxima at 0 and 1/2 of a 1/2-periodic V lie on the same orbit x = -t/2
    const auto r = aubry_orbits(HamiltonianModel::traveling_wave(double_well(), 2));
    REQUIRE(r.orbits.size() == 1);
    for (const auto& o : r.orbits) {
      CHECK(o.period == 2);
      CHECK(o.winding == -1);
      CHECK(o.hyperbolic);
    }
  }
  SUBCASE("diagonal check rejects candidates") {
    AubrySearchOptions opts;
    opts.diagonal_check = [](const PeriodicOrbit& o) { return circle_distance(o.anchor.x, 0.0) < 0.1 ? 1.0 : 0.0; };
    const auto r = aubry_orbits(HamiltonianModel::mechanical(benchmark_potential()), opts);
    REQUIRE(r.orbits.size() == 1);
    CHECK(circle_distance(r.orbits[0].anchor.x, 0.5) <= 1e-10);
    CHECK(r.rejected.size() == 1);
  }
  SUBCASE("no maxima") {
    CHECK_THROWS_AS(aubry_orbits(HamiltonianModel::mechanical(Potential{})), Error);
  }
}
