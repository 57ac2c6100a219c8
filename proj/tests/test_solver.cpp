#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "degenwave/error.hpp"
#include "degenwave/random_models.hpp"
#include "degenwave/solver.hpp"

using namespace degenwave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Field sine(std::size_t n, double mean, double amp) {
  const Grid g(n);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = mean + amp * std::sin(2.0 * std::numbers::pi * g.center(j));
  }
  return Field(g, std::move(v));
}

/// 0.5 (phi(l) + phi(r)) - 0.5 int_l^r |phi'|. The interval is cut at every
/// breakpoint and at sign changes of phi' (located by scan and bisection), so
/// 3-point Gauss-Legendre is exact on each sub-interval.
double eo_reference(const PiecewiseFunction& phi, double l, double r) {
  const double lo = std::min(l, r);
  const double hi = std::max(l, r);
  std::vector<double> cuts{lo};
  for (double x : phi.breakpoints()) {
    if (x > lo && x < hi) cuts.push_back(x);
  }
  cuts.push_back(hi);
  std::vector<double> fine;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    fine.push_back(cuts[i]);
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const int m = 4000;
    // Derivative sampled strictly inside the piece.
    auto d = [&](double x) { return phi.derivative(std::clamp(x, a + 1e-13 * (b - a), b - 1e-13 * (b - a))); };
    for (int k = 0; k < m; ++k) {
      double x0 = a + (b - a) * k / m;
      double x1 = a + (b - a) * (k + 1) / m;
      if ((d(x0) < 0) == (d(x1) < 0)) continue;
      for (int it = 0; it < 200; ++it) {
        const double xm = 0.5 * (x0 + x1);
        if ((d(xm) < 0) == (d(x0) < 0)) x0 = xm; else x1 = xm;
      }
      fine.push_back(0.5 * (x0 + x1));
    }
  }
  fine.push_back(hi);
  const double gx = std::sqrt(0.6);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
    const double c = 0.5 * (fine[i] + fine[i + 1]);
    const double h = 0.5 * (fine[i + 1] - fine[i]);
    if (h <= 0.0) continue;
    integral += h * (5.0 / 9.0 * std::abs(phi.derivative(c - gx * h)) +
                     8.0 / 9.0 * std::abs(phi.derivative(c)) +
                     5.0 / 9.0 * std::abs(phi.derivative(c + gx * h)));
  }
  if (r < l) integral = -integral;
  return 0.5 * (phi.eval(l) + phi.eval(r)) - 0.5 * integral;
}

}  // namespace

TEST_CASE("eo flux examples") {
  const auto b = PiecewiseFunction::burgers();
  for (double u : {-0.7, 0.0, 0.3, 1.0}) CHECK_THAT(eo_flux(b, u, u), WithinAbs(b.eval(u), 1e-15));
  CHECK_THAT(eo_flux(b, -1.0, 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(eo_flux(b, 1.0, -1.0), WithinAbs(1.0, 1e-15));
  const auto lin = PiecewiseFunction::linear(2.0, 0.0);
  CHECK(eo_flux(lin, 0.3, -0.6) == lin.eval(0.3));
  CHECK(eo_flux(lin, -0.9, 0.4) == lin.eval(-0.9));
  CHECK_THROWS_AS(eo_flux(b, 0.0, 2.0), OutOfRange);
}

TEST_CASE("eo flux against quadrature on random fluxes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto phi = testing::random_flux(rng);
    const double l = testing::uniform(rng, -2.0, 2.0);
    const double r = testing::uniform(rng, -2.0, 2.0);
    CHECK_THAT(eo_flux(phi, l, r), WithinAbs(eo_reference(phi, l, r), 1e-12));
  }
}

TEST_CASE("constants are fixed points") {
  const Grid g(16);
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto phi = testing::random_flux(rng);
    const auto gg = testing::random_diffusion(rng);
    const Field k(g, testing::uniform(rng, -1.5, 1.5));
    const double dt = stable_time_step(phi, gg, k.min(), k.max(), 16, 1.0);
    CHECK(step(phi, gg, k, dt) == k);
  }
}

TEST_CASE("upwind at unit CFL is the exact shift") {
  const Grid g(32);
  std::mt19937_64 rng(33);
  const Field u = testing::random_field(rng, g, -1.0, 1.0);
  const auto phi = PiecewiseFunction::linear(1.0, 0.0);
  const auto zero = PiecewiseFunction::constant(0.0);
  CHECK(step(phi, zero, u, g.dx()) == shift(u, 1));
  CHECK_THROWS_AS(step(phi, zero, u, 1.5 * g.dx()), CflViolation);
}

TEST_CASE("random pairs: monotone, contractive, conservative") {
  std::mt19937_64 rng(34);
  const Grid grid(48);
  for (int trial = 0; trial < 40; ++trial) {
    const auto phi = testing::random_flux(rng);
    const auto g = testing::random_diffusion(rng);
    Field u = testing::random_field(rng, grid, -1.5, 1.0);
    Field v = testing::random_field(rng, grid, -1.0, 1.5);
    Field w = u;  // ordered partner: w >= u
    {
      std::vector<double> vals(u.values().begin(), u.values().end());
      for (auto& x : vals) x = std::min(1.9, x + testing::uniform(rng, 0.0, 0.4));
      w = Field(grid, vals);
    }
    const double lo = std::min({u.min(), v.min(), w.min()});
    const double hi = std::max({u.max(), v.max(), w.max()});
    const double dt = stable_time_step(phi, g, lo, hi, grid.n_cells(), 0.9);
    const double mu = mean(u);
    for (int s = 0; s < 20; ++s) {
      const Field u1 = step(phi, g, u, dt);
      const Field v1 = step(phi, g, v, dt);
      const Field w1 = step(phi, g, w, dt);
      for (std::size_t j = 0; j < grid.n_cells(); ++j) {
        CHECK(u1[j] <= w1[j] + 1e-14);  // rounding slack only
        CHECK(u1[j] >= lo);
        CHECK(u1[j] <= hi);
      }
      CHECK(positive_part_distance(u1, v1) <= positive_part_distance(u, v) + 1e-12);
      CHECK(positive_part_distance(v1, u1) <= positive_part_distance(v, u) + 1e-12);
      CHECK(l1_distance(u1, v1) <= l1_distance(u, v) + 1e-12);
      u = u1;
      v = v1;
      w = w1;
    }
    CHECK_THAT(mean(u), WithinAbs(mu, 1e-12));
  }
}

TEST_CASE("run schedule") {
  const auto phi = PiecewiseFunction::burgers();
  const auto g = PiecewiseFunction::constant(0.0);
  const Field u0 = sine(32, 0.5, 0.25);

  SchemeParams zero;
  zero.t_end = 0.0;
  const RunResult r0 = run(phi, g, u0, zero);
  REQUIRE(r0.snapshots.size() == 1);
  CHECK(r0.final() == u0);
  CHECK(r0.step_count == 0);

  SchemeParams p;
  p.t_end = 0.5;
  p.snapshot_times = {0.1, 0.2, 0.3};
  const RunResult r = run(phi, g, u0, p);
  REQUIRE(r.snapshots.size() == 5);
  CHECK(r.snapshots[0].time == 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.snapshots[i + 1].time >= p.snapshot_times[i] - 1e-12);
    CHECK(r.snapshots[i + 1].time < p.snapshot_times[i] + r.dt);
  }
  CHECK(r.snapshots.back().time >= 0.5 - 1e-12);
  for (const auto& s : r.snapshots) CHECK_THAT(mean(s.field), WithinAbs(mean(u0), 1e-12));

  SchemeParams bad = p;
  bad.cfl_safety = 1.5;
  CHECK_THROWS_AS(run(phi, g, u0, bad), InvalidArgument);
  bad = p;
  bad.snapshot_times = {0.3, 0.2};
  CHECK_THROWS_AS(run(phi, g, u0, bad), InvalidArgument);
  CHECK_THROWS(run(PiecewiseFunction::burgers(0.0, 0.5), g, u0, p));
}

TEST_CASE("heat equation decay against the Fourier solution") {
  const std::size_t n = 64;
  const Grid grid(n);
  // Exact cell averages of 0.5 + 0.1 sin(2 pi x).
  std::vector<double> vals(n);
  const double w = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < n; ++j) {
    vals[j] = 0.5 + 0.1 * (std::cos(w * grid.left_edge(j)) - std::cos(w * grid.left_edge(j + 1))) /
                        (w * grid.dx());
  }
  const Field u0(grid, vals);
  SchemeParams p;
  p.t_end = 0.05;
  p.snapshot_times = {0.01, 0.02, 0.03, 0.04};
  const RunResult r =
      run(PiecewiseFunction::constant(0.0), PiecewiseFunction::linear(1.0, 0.0), u0, p);
  for (const auto& s : r.snapshots) {
    if (s.time < 0.01) continue;
    const double expected = 2.0 / std::numbers::pi * 0.1 * std::exp(-4.0 * std::numbers::pi * std::numbers::pi * s.time);
    CHECK_THAT(l1_distance(s.field, Field(grid, 0.5)), WithinRel(expected, 0.02));
  }
}

TEST_CASE("run_pair shares one step") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const auto g = PiecewiseFunction::constant(0.0, -2.0, 2.0);
  SchemeParams p;
  p.t_end = 0.2;
  const Field u = sine(32, 0.5, 0.25);
  const Field v = sine(32, 0.2, 1.5);
  const auto [a, b] = run_pair(phi, g, u, v, p);
  CHECK(a.dt == b.dt);
  CHECK(a.step_count == b.step_count);
  CHECK(a.dt == stable_time_step(phi, g, v.min(), v.max(), 32, 0.5));
}
