#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "degenwave/diagnostics.hpp"
#include "degenwave/error.hpp"
#include "degenwave/random_models.hpp"

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

SchemeParams schedule(double t_end, int count, double cfl = 0.5) {
  SchemeParams p;
  p.cfl_safety = cfl;
  p.t_end = t_end;
  for (int i = 1; i <= count; ++i) p.snapshot_times.push_back(t_end * i / count);
  return p;
}

const PiecewiseFunction kZero = PiecewiseFunction::constant(0.0, -2.0, 2.0);

}  // namespace

TEST_CASE("bump derivatives against finite differences") {
  const TestBump f(0.5, 0.9, 0.3, 0.25);  // wraps around x = 1
  const double h = 1e-5;
  for (double t : {0.3, 0.45, 0.6, 0.75}) {
    for (double x : {0.0, 0.05, 0.8, 0.95}) {
      const double ft = (f.value(t + h, x) - f.value(t - h, x)) / (2 * h);
      const double fx = (f.value(t, x + h) - f.value(t, x - h)) / (2 * h);
      const double fxx = (f.value(t, x + h) - 2 * f.value(t, x) + f.value(t, x - h)) / (h * h);
      CHECK_THAT(f.d_t(t, x), WithinAbs(ft, 1e-5));
      CHECK_THAT(f.d_x(t, x), WithinAbs(fx, 1e-5));
      CHECK_THAT(f.d_xx(t, x), WithinAbs(fxx, 1e-2));
    }
  }
  CHECK(f.value(0.5, 0.9) == 1.0);
  CHECK(f.value(0.85, 0.9) == 0.0);
  CHECK(f.value(0.5, 0.5) == 0.0);
  CHECK(f.value(0.5, 0.1) > 0.0);
  CHECK_THROWS_AS(TestBump(0.5, 0.5, 0.1, 0.6), InvalidArgument);
}

TEST_CASE("bump sup norms") {
  double d1 = 0.0;
  double d2 = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double s = -1.0 + 2.0 * i / 200000.0;
    d1 = std::max(d1, std::abs(bump_d1(s)));
    d2 = std::max(d2, std::abs(bump_d2(s)));
  }
  CHECK(bump_d1_max() >= d1);
  CHECK_THAT(bump_d1_max(), WithinRel(d1, 1e-6));
  CHECK(bump_d2_max() >= d2);
  CHECK_THAT(bump_d2_max(), WithinRel(d2, 1e-6));
}

TEST_CASE("default k values and bumps") {
  const auto ks = default_k_values(Field(Grid(4), {0.0, 1.0, 0.5, 0.5}));
  REQUIRE(ks.size() == 9);
  CHECK_THAT(ks.front(), WithinAbs(-0.1, 1e-15));
  CHECK_THAT(ks.back(), WithinAbs(1.1, 1e-15));
  const auto bumps = default_bumps(2.0);
  REQUIRE(bumps.size() == 6);
  for (const auto& b : bumps) {
    CHECK(b.t0() - b.sigma_t() > 0.0);
    CHECK(b.t0() + b.sigma_t() < 2.0);
  }
}

TEST_CASE("entropy residual vanishes on constant runs") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  SchemeParams p = schedule(1.0, 2000);
  p.dt_override = 5e-4;
  const RunResult r = run(phi, kZero, Field(Grid(40), 0.3), p);
  const auto rep = entropy_residual(r, phi, kZero, {-0.5, 0.0, 0.3, 0.9}, default_bumps(1.0));
  // Only time-quadrature error remains; it vanishes rapidly as snapshots refine.
  CHECK(std::abs(rep.observed) <= 1e-10);
  CHECK(rep.passed);
}

TEST_CASE("entropy form reduces to the weak form for k above the range") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const auto g = PiecewiseFunction::from_breakpoints({-2.0, 0.6, 2.0}, {{0.0}, {0.1}}, 0.0, true);
  const RunResult r = run(phi, g, sine(64, 0.5, 0.25), schedule(1.0, 40));
  for (const auto& f : default_bumps(1.0)) {
    for (double k : {0.8, 1.2, -0.3}) {
      const double e = entropy_integral(r, phi, g, k, f);
      const double w = weak_form_integral(r, phi, g, f);
      const double c = constant_state_integral(r, phi, g, k, f);
      // k above the range: |u-k| = k-u; below: u-k.
      const double expected = k > 0.75 ? c - w : w - c;
      CHECK_THAT(e, WithinAbs(expected, 1e-10));
    }
  }
  const auto rep = entropy_residual(r, phi, g, {1.2}, default_bumps(1.0));
  for (const auto& f : default_bumps(1.0)) {
    CHECK(std::abs(weak_form_integral(r, phi, g, f)) <= rep.threshold);
  }
}

TEST_CASE("entropy residual on the Burgers shock") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const RunResult r = run(phi, kZero, sine(200, 0.5, 0.25), schedule(2.0, 200));
  const auto rep =
      entropy_residual(r, phi, kZero, default_k_values(r.initial()), default_bumps(2.0));
  CHECK(rep.passed);
  // Dissipation at the shock: positive for k = I with a bump covering it.
  double best = -1.0;
  for (double x0 : {0.25, 0.5, 0.75, 1.0}) {
    best = std::max(best, entropy_integral(r, phi, kZero, 0.5, TestBump(1.4, x0, 0.4, 0.25)));
  }
  CHECK(best > 0.0);
  CHECK_THROWS_AS(entropy_residual(r, phi, kZero, {0.5}, {TestBump(0.2, 0.5, 0.2, 0.25)}),
                  UnsupportedTestFn);
}

TEST_CASE("contraction monitor") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const Field u0 = sine(64, 0.5, 0.25);
  const auto [a, b] = run_pair(phi, kZero, u0, u0, schedule(1.0, 20));
  const auto same = contraction_monitor(a, b);
  CHECK(same.passed);
  for (const auto& tv : same.series) CHECK(tv.value == 0.0);

  std::vector<double> up(u0.values().begin(), u0.values().end());
  for (auto& x : up) x += 0.05 + 0.05 * std::cos(x * 10.0);
  const auto [lo, hi] = run_pair(phi, kZero, u0, Field(u0.grid(), up), schedule(1.0, 20));
  const auto ordered = contraction_monitor(lo, hi);
  CHECK(ordered.passed);
  for (const auto& tv : ordered.aux[0].second) CHECK(tv.value == 0.0);  // (u - v)^+ with u <= v

  const auto [s1, s2] = run_pair(phi, kZero, u0, shift(u0, 10), schedule(1.5, 30));
  CHECK(contraction_monitor(s1, s2).passed);

  const RunResult other = run(phi, kZero, u0, schedule(1.0, 10));
  CHECK_THROWS(contraction_monitor(a, other));
}

TEST_CASE("conservation, decay and cutoff basics") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const RunResult flat = run(phi, kZero, Field(Grid(32), 0.5), schedule(1.0, 10));
  CHECK(conservation_monitor(flat).observed == 0.0);
  const auto d = decay_metric(flat);
  for (const auto& tv : d.series) CHECK(tv.value == 0.0);
  CHECK(d.passed);

  const RunResult burgers = run(phi, kZero, sine(100, 0.5, 0.25), schedule(2.0, 20));
  CHECK(conservation_monitor(burgers).observed <= 1e-12);
  const auto heat = run(PiecewiseFunction::constant(0.0), PiecewiseFunction::linear(1.0, 0.0),
                        sine(32, 0.5, 0.1), schedule(0.05, 5));
  CHECK(conservation_monitor(heat).observed <= 1e-12);

  // Degenerate band: cutoff to a point is the decay metric.
  const auto c = cutoff_convergence(burgers, 0.5, 0.5);
  const auto dm = decay_metric(burgers);
  for (std::size_t i = 0; i < c.series.size(); ++i) {
    CHECK_THAT(c.series[i].value, WithinAbs(dm.series[i].value, 1e-15));
  }
  // Data inside the band stay there.
  const auto inside = cutoff_convergence(burgers, 0.0, 1.0);
  for (const auto& tv : inside.series) CHECK(tv.value == 0.0);
}

TEST_CASE("transport does not decay") {
  const auto phi = PiecewiseFunction::linear(2.0, 0.0);
  const auto zero = PiecewiseFunction::constant(0.0);
  const Field u0 = sine(100, 0.5, 0.25);
  const RunResult r = run(phi, zero, u0, schedule(1.0, 10, 1.0));
  const auto d = decay_metric(r);
  CHECK_FALSE(d.passed);
  CHECK_THAT(d.series.back().value, WithinAbs(d.series.front().value, 1e-12));
}

TEST_CASE("squeeze bounds") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const RunResult r = run(phi, kZero, sine(80, 0.5, 0.25), schedule(1.0, 10));
  const auto zero = squeeze_bounds(r, phi, kZero, 0.0, 0.0);
  CHECK(zero.passed);
  for (std::size_t i = 0; i < zero.series.size(); ++i) {
    CHECK(zero.series[i].value == zero.aux[0].second[i].value);
  }
  const auto wide = squeeze_bounds(r, phi, kZero, 0.25, -0.25);
  CHECK(wide.passed);
  CHECK(wide.aux[0].second.back().value < wide.aux[0].second.front().value);
  CHECK_THROWS_AS(squeeze_bounds(r, phi, kZero, 1.5, 0.0), CoverageError);
}

TEST_CASE("profile of exact transport") {
  const auto phi = PiecewiseFunction::linear(2.0, 0.0);
  const auto zero = PiecewiseFunction::constant(0.0);
  const Field u0 = sine(50, 0.5, 0.25);
  SchemeParams p = schedule(1.0, 10, 1.0);
  const ProfileEstimate est = profile_operator_T(phi, zero, u0, p);
  CHECK(est.c_used == 2.0);
  CHECK(l1_distance(est.v, u0) <= 1e-14);
  for (const auto& tv : est.residual_history) CHECK(tv.value <= 1e-14);
  CHECK(est.converged);
}

TEST_CASE("profile of Burgers is the mean") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const Field u0 = sine(100, 0.5, 0.25);
  const ProfileEstimate est = profile_operator_T(phi, kZero, u0, schedule(10.0, 20));
  for (double x : est.v.values()) CHECK(x == mean(u0));
  CHECK(est.converged);
  CHECK_THAT(mean(est.v), WithinAbs(mean(u0), 1e-10));
}

TEST_CASE("profile operator is non-expansive on simple pairs") {
  const auto phi = PiecewiseFunction::burgers(-2.0, 2.0);
  const Field u0 = sine(64, 0.5, 0.25);
  const auto same = t_nonexpansive_check(phi, kZero, u0, u0, schedule(2.0, 4));
  CHECK(same.passed);
  CHECK(same.observed == 0.0);

  std::vector<double> up(u0.values().begin(), u0.values().end());
  for (auto& x : up) x += 0.1;
  const auto lifted = t_nonexpansive_check(phi, kZero, u0, Field(u0.grid(), up), schedule(2.0, 4));
  CHECK(lifted.passed);
  CHECK_THAT(lifted.observed, WithinAbs(0.1, 1e-12));
  CHECK_THAT(lifted.threshold, WithinAbs(0.1 + 0.005 + 4.0 / 64, 1e-12));
}
