#include "degenwave/structure_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kBandTol = 1e-12;

/// Slope of the affine piece of phi that contains I's neighbourhood.
double affine_slope(const PiecewiseFunction& phi, double I) {
  const auto& piece = phi.pieces()[phi.piece_index(I)];
  return piece.size() > 1 ? piece[1] : 0.0;
}

}  // namespace

StructureReport analyze(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
                        double tol, std::optional<double> bound) {
  if (!g.monotone()) throw InvalidArgument("diffusion g must be flagged monotone");
  StructureReport r;
  r.I = mean(u0);
  r.M = u0.sup_norm();
  if (bound) {
    if (!(*bound >= r.M)) throw InvalidArgument("bound must dominate sup|u0|");
    r.M = *bound;
  }
  if (!phi.covers(-r.M, r.M) || !g.covers(-r.M, r.M)) {
    std::ostringstream os;
    os << "phi and g must cover [-M, M] with M = " << r.M;
    throw CoverageError(os.str());
  }
  // Rounding can push the mean a hair past M for constant data.
  r.I = std::clamp(r.I, -r.M, r.M);

  const Interval ab = maximal_affine_interval(phi, r.I, -r.M, r.M, tol);
  r.a = ab.a;
  r.b = ab.b;
  if (ab.degenerate()) {
    r.degenerate_speed = true;
    r.a2 = r.b2 = r.I;
    const double h = 1e-6 * std::max(1.0, r.M);
    const double lo = std::max(phi.lower(), r.I - h);
    const double hi = std::min(phi.upper(), r.I + h);
    r.c = (phi.eval(hi) - phi.eval(lo)) / (hi - lo);
    return r;
  }
  r.c = affine_slope(phi, r.I);
  const Interval ab2 = maximal_constant_interval(g, r.I, r.a, r.b, tol);
  r.a2 = ab2.a;
  r.b2 = ab2.b;
  return r;
}

Field cutoff(const Field& u, double a, double b) {
  if (a > b) throw BandError("cutoff band needs a <= b");
  std::vector<double> out(u.values().begin(), u.values().end());
  for (double& x : out) x = std::min(b, std::max(a, x));
  return Field(u.grid(), std::move(out));
}

Field band_project_mean(const Field& u, const Field& v, double a, double b) {
  if (a > b) throw BandError("band needs a <= b");
  if (!(u.grid() == v.grid())) throw GridMismatch("fields live on different grids");
  const double I = mean(u);
  if (I < a - kBandTol || I > b + kBandTol) throw MeanOutOfBand("mean(u) lies outside [a, b]");
  for (double x : v.values()) {
    if (x < a - kBandTol || x > b + kBandTol) throw BandError("v leaves the band [a, b]");
  }
  const double I_v = mean(v);
  if (I_v == I) return v;

  const double edge = I_v > I ? a : b;
  const double s = (I_v - I) / (I_v - edge);
  std::vector<double> w(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    w[j] = std::clamp(s * edge + (1.0 - s) * v[j], a, b);
  }
  return Field(v.grid(), std::move(w));
}

}  // namespace degenwave
