#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "degenwave/error.hpp"
#include "degenwave/piecewise_fn.hpp"
#include "degenwave/random_models.hpp"

using namespace degenwave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// -u on [-1, 0], 2u on [0, 1], 2 + 5 (u - 1) on [1, 2]
PiecewiseFunction kinked_flux() {
  return PiecewiseFunction::from_breakpoints({-1.0, 0.0, 1.0, 2.0}, {{-1.0}, {2.0}, {5.0}}, 1.0);
}

// 0 on [-1, 0.8], (u - 0.8)^2 on [0.8, 1]
PiecewiseFunction degenerate_diffusion() {
  return PiecewiseFunction({-1.0, 0.8, 1.0}, {{0.0}, {0.0, 0.0, 1.0}}, true);
}

PiecewiseFunction cube() { return PiecewiseFunction({-1.0, 1.0}, {{-1.0, 3.0, -3.0, 1.0}}); }

}  // namespace

TEST_CASE("eval on closed forms") {
  CHECK_THAT(PiecewiseFunction::linear(1.0, 0.0).eval(0.3), WithinAbs(0.3, 1e-15));
  CHECK(PiecewiseFunction::burgers().eval(0.5) == 0.125);
  const auto f = PiecewiseFunction::from_breakpoints({-1.0, 0.0, 1.0}, {{-1.0}, {2.0}}, 1.0);
  CHECK(f.eval(-0.5) == 0.5);
  CHECK(f.eval(0.5) == 1.0);
  CHECK_THAT(cube().eval(0.5), WithinAbs(0.125, 1e-15));
}

TEST_CASE("eval outside the covered range throws") {
  const auto f = PiecewiseFunction::burgers();
  CHECK_THROWS_AS(f.eval(1.5), OutOfRange);
  CHECK_THROWS_AS(f.eval(-1.0 - 1e-6), OutOfRange);
  CHECK_NOTHROW(f.eval(1.0));
  CHECK_NOTHROW(f.eval(-1.0));
}

TEST_CASE("lipschitz constants") {
  CHECK(PiecewiseFunction::burgers().lipschitz_on(-1.0, 1.0) == 1.0);
  CHECK(PiecewiseFunction::linear(1.0, 0.0).lipschitz_on(-1.0, 1.0) == 1.0);
  CHECK_THAT(cube().lipschitz_on(-1.0, 1.0), WithinAbs(3.0, 1e-14));
  CHECK_THAT(cube().lipschitz_on(-0.5, 0.25), WithinAbs(0.75, 1e-14));
  CHECK(kinked_flux().lipschitz_on(-0.5, 0.5) == 2.0);
  CHECK(kinked_flux().lipschitz_on(-0.5, 1.5) == 5.0);
  CHECK_THROWS_AS(PiecewiseFunction::burgers().lipschitz_on(-2.0, 0.0), OutOfRange);
}

TEST_CASE("construction validates breakpoints, degree and continuity") {
  CHECK_THROWS(PiecewiseFunction({0.0, 0.0}, {{1.0}}));
  CHECK_THROWS(PiecewiseFunction({0.0, 1.0}, {{1.0, 0.0, 0.0, 0.0, 1.0}}));
  CHECK_THROWS_AS(PiecewiseFunction({0.0, 1.0, 2.0}, {{0.0, 1.0}, {5.0}}), RangeError);
  CHECK_THROWS_AS(PiecewiseFunction({0.0, 1.0}, {{0.0, -1.0}}, true), RangeError);
  // u^3 - 0.75 u has a negative dip, so it is not monotone.
  CHECK_THROWS_AS(PiecewiseFunction({-1.0, 1.0}, {{0.25, 2.25, -3.0, 1.0}}, true), RangeError);
  CHECK_NOTHROW(degenerate_diffusion());
}

TEST_CASE("continuity across breakpoints on random functions") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = testing::random_flux(rng);
    const auto& bp = f.breakpoints();
    for (std::size_t i = 1; i + 1 < bp.size(); ++i) {
      const double eps = 1e-9;
      const double lip = std::max(1.0, f.lipschitz_on(bp[i] - eps, bp[i] + eps));
      CHECK(std::abs(f.eval(bp[i] - eps) - f.eval(bp[i] + eps)) <= 1e-7 * lip);
    }
  }
}

TEST_CASE("monotone-flagged functions are nondecreasing") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_diffusion(rng);
    REQUIRE(g.monotone());
    for (int k = 0; k < 20; ++k) {
      double x = testing::uniform(rng, g.lower(), g.upper());
      double y = testing::uniform(rng, g.lower(), g.upper());
      if (x > y) std::swap(x, y);
      CHECK(g.eval(x) <= g.eval(y));
    }
  }
}

TEST_CASE("maximal affine interval") {
  const auto I0 = maximal_affine_interval(PiecewiseFunction::burgers(), 0.0, -1.0, 1.0);
  CHECK(I0 == Interval{0.0, 0.0});
  CHECK(maximal_affine_interval(kinked_flux(), 0.5, -1.0, 1.0) == Interval{0.0, 1.0});
  CHECK(maximal_affine_interval(PiecewiseFunction::linear(3.0, 1.0), 0.2, -1.0, 1.0) ==
        Interval{-1.0, 1.0});
  // Two collinear pieces merge.
  const auto collinear = PiecewiseFunction::from_breakpoints({-1.0, 0.0, 1.0}, {{2.0}, {2.0}}, 0.0);
  CHECK(maximal_affine_interval(collinear, 0.3, -1.0, 1.0) == Interval{-1.0, 1.0});
  // I on a kink: no affine neighbourhood.
  CHECK(maximal_affine_interval(kinked_flux(), 0.0, -1.0, 1.0) == Interval{0.0, 0.0});
}

TEST_CASE("maximal constant interval") {
  CHECK(maximal_constant_interval(PiecewiseFunction::linear(1.0, 0.0), 0.5, -1.0, 1.0) ==
        Interval{0.5, 0.5});
  CHECK(maximal_constant_interval(degenerate_diffusion(), 0.3, 0.0, 1.0) == Interval{0.0, 0.8});
  CHECK(maximal_constant_interval(PiecewiseFunction::constant(7.0), 0.0, -1.0, 1.0) ==
        Interval{-1.0, 1.0});
}

TEST_CASE("interval properties on random functions") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = testing::random_flux(rng, -2.0, 2.0, 5);
    const double lo = testing::uniform(rng, -2.0, -0.5);
    const double hi = testing::uniform(rng, 0.5, 2.0);
    const double I = testing::uniform(rng, lo, hi);
    const Interval aff = maximal_affine_interval(f, I, lo, hi);
    const Interval con = maximal_constant_interval(f, I, lo, hi);
    CHECK(aff.a <= I);
    CHECK(I <= aff.b);
    CHECK(lo <= aff.a);
    CHECK(aff.b <= hi);
    CHECK(aff.a <= con.a);
    CHECK(con.b <= aff.b);
    if (!aff.degenerate()) {
      const double fa = f.eval(aff.a);
      const double slope = (f.eval(aff.b) - fa) / (aff.b - aff.a);
      for (int k = 0; k <= 50; ++k) {
        const double x = aff.a + (aff.b - aff.a) * k / 50.0;
        CHECK(std::abs(f.eval(x) - (fa + slope * (x - aff.a))) <= 1e-10);
      }
    }
  }
}

TEST_CASE("decreasing part matches its definition") {
  const auto b = PiecewiseFunction::burgers();
  CHECK(b.decreasing_part(-1.0) == 0.0);
  CHECK_THAT(b.decreasing_part(0.0), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(b.decreasing_part(1.0), WithinAbs(-0.5, 1e-15));
  CHECK(PiecewiseFunction::linear(2.0, 0.0).decreasing_part(0.7) == 0.0);
}

TEST_CASE("plus_linear shifts slope and keeps structure") {
  const auto f = kinked_flux().plus_linear(0.5, 3.0);
  CHECK_THAT(f.eval(0.5), WithinAbs(1.0 + 0.25 + 3.0, 1e-15));
  CHECK(maximal_affine_interval(f, 0.5, -1.0, 1.0) == Interval{0.0, 1.0});
}
