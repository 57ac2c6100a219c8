#pragma once

#include <optional>

#include "degenwave/grid_state.hpp"
#include "degenwave/piecewise_fn.hpp"

namespace degenwave {

/// Asymptotic skeleton of a problem (phi, g, u0).
///
/// Ordering: -M <= a <= a2 <= I <= b2 <= b <= M. On [a2, b2] both
/// phi(u) - c u and g(u) are constant, so the dynamics there reduce to
/// transport with speed c.
struct StructureReport {
  double I = 0.0;  ///< spatial mean of u0 (conserved)
  double M = 0.0;  ///< L-infinity bound used to clip the intervals
  double a = 0.0;
  double b = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  double c = 0.0;
  /// Set when a == b == I; c is then a nominal secant slope only.
  bool degenerate_speed = false;

  bool operator==(const StructureReport&) const = default;
};

/// Computes the report. `bound` overrides M (must be >= sup|u0|); by default
/// M = sup|u0|, valid by the maximum principle. Throws CoverageError if phi or
/// g does not cover [-M, M], InvalidArgument if g is not flagged monotone.
StructureReport analyze(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
                        double tol = kDefaultTol, std::optional<double> bound = std::nullopt);

/// Pointwise clamp min(b, max(a, u)). Throws BandError if a > b.
Field cutoff(const Field& u, double a, double b);

/// Mean-preserving projection into the band [a, b].
///
/// Given v inside the band and u with mean I in [a, b], returns w in the band
/// with mean(w) = I and ||u - w||_1 <= 2 ||u - v||_1: w mixes v with the band
/// endpoint on the far side of I, w = s * edge + (1 - s) * v.
Field band_project_mean(const Field& u, const Field& v, double a, double b);

}  // namespace degenwave
