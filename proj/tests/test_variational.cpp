#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wkam/error.hpp"
#include "wkam/variational.hpp"

using namespace wkam;
using doctest::Approx;

namespace {

const HamiltonianModel& benchmark() {
  static const auto m = HamiltonianModel::mechanical(benchmark_potential(), 8.0);
  return m;
}

const ActionKernelSet& benchmark_kernels() {
  static const auto k = build_kernels(benchmark(), {400, 32}, 4.0);
  return k;
}

}  // namespace

TEST_CASE("kernel entries") {
  const auto& K = benchmark_kernels();
  SUBCASE("staying put costs -V / nt") {
    for (int a : {0, 57, 200, 333})
      CHECK(K.cost(5, a, 0) == Approx(-oracle::benchmark_v(double(a) / 400) / 32).epsilon(1e-13));
  }
  SUBCASE("every stored entry is finite") {
    for (int j = 0; j < K.nt(); ++j)
      for (int a = 0; a < K.nx(); ++a)
        for (int d = -K.band(); d <= K.band(); ++d) REQUIRE(std::isfinite(K.cost(j, a, d)));
  }
  SUBCASE("close to the exact action of the straight segment") {
    // midpoint rule per substep: error O(dt^2) per unit time
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> ua(0, K.nx() - 1), ud(-K.band(), K.band()), uj(0, K.nt() - 1);
    const double dt = 1.0 / K.nt();
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const int a = ua(rng), d = ud(rng), j = uj(rng);
      const double x0 = double(a) / K.nx(), v = double(d) * K.nt() / K.nx();
      const double exact = oracle::simpson([&](double s) { return 0.5 * v * v - oracle::benchmark_v(x0 + v * s); }, 0.0, dt);
      worst = std::max(worst, std::abs(K.cost(j, a, d) - exact) / dt);
    }
    // midpoint remainder bound: max|L_xx| (v dt)^2 / 24 per unit time, with |V''| <= 12 pi^2 and |v| <= vmax
    CHECK(worst <= 12 * oracle::pi * oracle::pi * 16.0 / 24.0 * dt * dt);
    CHECK(worst > 0.0);
  }
  SUBCASE("a too small velocity range is rejected") {
    CHECK_THROWS_AS(build_kernels(benchmark(), {400, 32}, 0.1), ConfigurationError);
  }
}

TEST_CASE("critical value of the free particle is zero") {
  const auto K = build_kernels(HamiltonianModel::mechanical(Potential{}), {64, 8}, 2.0);
  const auto cv = critical_value(K);
  CHECK(std::abs(cv.c) <= 1e-12);
  CHECK(std::abs(cv.c - cv.c_power) <= 1e-6);
}

TEST_CASE("benchmark critical value") {
  const auto cv = critical_value(benchmark_kernels());
  CHECK(std::abs(cv.c) <= 1e-3);
  CHECK(std::abs(cv.c - cv.c_power) <= 1e-6);
  CHECK(cv.power_lower <= cv.c + 1e-9);
  CHECK(cv.power_upper >= cv.c - 1e-9);
}

TEST_CASE("critical value against brute-force cycle enumeration") {
  // small lattices where walks of up to 40 periods contain the optimal cycle
  const std::vector<HamiltonianModel> models{HamiltonianModel::shifted_kinetic(Potential{}, 0.7),
                                             HamiltonianModel::mechanical(benchmark_potential()),
                                             HamiltonianModel::shifted_kinetic(Potential({{1, 1, 0.2, 0.1}}), 0.3)};
  for (const auto& m : models) {
    const GridSpec g{20, 5};
    const auto K = build_kernels(m, g, 2.0);
    const double brute = oracle::brute_force_cycle_mean(m, g.nx, g.nt, K.band(), 40);
    const auto cv = critical_value(K);
    CHECK(cv.c == Approx(-brute).epsilon(1e-10));
    CHECK(std::abs(cv.c - cv.c_power) <= 1e-6);
  }
}

TEST_CASE("shifted kinetic critical value approaches P^2/2") {
  const auto K = build_kernels(HamiltonianModel::shifted_kinetic(Potential{}, 0.7), {400, 64}, 4.0);
  const auto cv = critical_value(K);
  // velocities are multiples of nt/nx = 0.16 per substep, so c is within the grid bias of the continuum value
  CHECK(std::abs(cv.c - oracle::shifted_kinetic_c(0.7)) <= 0.5 * 0.16 * 0.16);
  CHECK(cv.c <= oracle::shifted_kinetic_c(0.7) + 1e-12);
}

TEST_CASE("adding a constant to L shifts c by minus that constant") {
  const auto K = build_kernels(benchmark(), {100, 16}, 4.0);
  const double c = critical_value(K).c;
  for (double a : {0.25, -1.5}) CHECK(critical_value(K.shifted(a)).c == Approx(c - a).epsilon(1e-12));
}

TEST_CASE("benchmark barriers") {
  const auto& K = benchmark_kernels();
  const double c = critical_value(K).c;
  const auto f0 = anchored_barrier(K, c, 0.0, 1);
  const auto f1 = anchored_barrier(K, c, 0.5, 1);
  const double grid_tol = 0.01;

  SUBCASE("vanishing at the anchor, and h above phi") {
    for (const auto* f : {&f0, &f1}) {
      CHECK(std::abs(f->at(f->anchor_node, f->anchor_layer)) <= grid_tol);
      for (std::size_t q = 0; q < f->h.values.size(); ++q) REQUIRE(f->h.values[q] >= f->phi_pot.values[q] - grid_tol);
    }
  }
  SUBCASE("quadrature oracle") {
    double worst = 0.0;
    for (const auto* f : {&f0, &f1}) {
      const double xi = f == &f0 ? 0.0 : 0.5;
      for (int i = 0; i < 400; i += 4)
        worst = std::max(worst, std::abs(f->at(i, 0) - oracle::quadrature_barrier(oracle::benchmark_v, i / 400.0, xi)));
    }
    CHECK(worst <= 0.02);
  }
  SUBCASE("pairwise values") {
    const double half = oracle::quadrature_barrier(oracle::benchmark_v, 0.0, 0.5);
    const auto p01 = action_potential_pair(f0, f1);
    const auto p10 = action_potential_pair(f1, f0);
    CHECK(p01.h == Approx(half).epsilon(0.02 / half));
    CHECK(p10.h == Approx(half).epsilon(0.02 / half));
    CHECK(p01.phi <= p01.h + 1e-12);
    const auto B = barrier_matrix({f0, f1});
    CHECK(std::abs(B[0][0]) <= grid_tol);
    CHECK(std::abs(B[1][1]) <= grid_tol);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(B[i][j] <= B[i][k] + B[k][j] + 2 * grid_tol);
  }
  SUBCASE("Aubry residual of the fixed points, and a non-Aubry probe") {
    PeriodicOrbit o;
    o.anchor = {0.5, 0.0, 0.0};
    o.samples.assign(33, o.anchor);
    for (int r = 0; r <= 32; ++r) o.samples[r].t = r / 32.0;
    CHECK(aubry_residual(f1, o, grid_tol).pass);
    const auto probe = anchored_barrier(K, c, 0.25, 1);
    const double round_trip = f1.at(probe.anchor_node, 0) + probe.at(f1.anchor_node, 0);
    CHECK(round_trip > 0.1);
  }
}

TEST_CASE("interpolation between nodes") {
  GridField f(10, 2);
  for (int i = 0; i < 10; ++i) f.at(i, 1) = i;
  CHECK(interpolate_x(f, 0.25, 1) == Approx(2.5));
  CHECK(interpolate_x(f, 0.95, 1) == Approx(4.5));
}
