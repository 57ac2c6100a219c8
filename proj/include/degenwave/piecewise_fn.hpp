#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace degenwave {

/// Default tolerance for affinity/constancy detection. Applied to
/// coefficients scaled by (hi - lo)^degree.
inline constexpr double kDefaultTol = 1e-10;

/// Closed interval [a, b] returned by the structure queries.
struct Interval {
  double a = 0.0;
  double b = 0.0;

  bool degenerate() const noexcept { return !(a < b); }
  bool operator==(const Interval&) const = default;
};

/// Continuous piecewise polynomial of degree <= 3.
///
/// Piece i lives on [x_i, x_{i+1}] and is stored in the local variable
/// s = u - x_i, lowest degree first: p_i(s) = c0 + c1 s + c2 s^2 + c3 s^3.
/// The constant coefficient of each piece after the first is anchored to the
/// right value of its predecessor, so neighbouring pieces agree exactly at
/// shared breakpoints.
///
/// Immutable after construction.
class PiecewiseFunction {
 public:
  using Coeffs = std::vector<double>;

  /// Validating constructor. Rejects non-increasing breakpoints, degree > 3,
  /// continuity mismatches above 1e-12 (relative), and, when `monotone` is
  /// set, any piece with a negative derivative.
  PiecewiseFunction(std::vector<double> breakpoints, std::vector<Coeffs> pieces,
                    bool monotone = false);

  /// Anchored builder: `higher_order[i]` holds {c1, c2, c3} (any prefix) of
  /// piece i; constant terms are chained from `value_at_left_end`.
  static PiecewiseFunction from_breakpoints(std::vector<double> breakpoints,
                                            const std::vector<Coeffs>& higher_order,
                                            double value_at_left_end,
                                            bool monotone = false);
  /// u^2 / 2 on [lo, hi].
  static PiecewiseFunction burgers(double lo = -1.0, double hi = 1.0);
  /// slope * u + intercept on [lo, hi].
  static PiecewiseFunction linear(double slope, double intercept, double lo = -1.0,
                                  double hi = 1.0);
  static PiecewiseFunction constant(double value, double lo = -1.0, double hi = 1.0);

  double eval(double u) const;
  double derivative(double u) const;

  /// max |f'| over [lo, hi], exact per piece.
  double lipschitz_on(double lo, double hi) const;

  /// D(u) = integral from the left end of min(f', 0). Zero for nondecreasing f.
  double decreasing_part(double u) const;

  struct ValueAndDecreasing {
    double value;
    double decreasing;
  };
  /// eval(u) and decreasing_part(u) with a single piece lookup.
  ValueAndDecreasing eval_with_decreasing(double u) const;

  /// f + slope * u + shift; same breakpoints. Monotone flag is dropped unless
  /// slope >= 0 and the input was monotone.
  PiecewiseFunction plus_linear(double slope, double shift) const;

  double lower() const noexcept { return breakpoints_.front(); }
  double upper() const noexcept { return breakpoints_.back(); }
  bool covers(double lo, double hi) const noexcept;
  bool monotone() const noexcept { return monotone_; }
  std::size_t piece_count() const noexcept { return pieces_.size(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Coeffs>& pieces() const noexcept { return pieces_; }

  /// Index of the piece containing u (the right piece at an interior
  /// breakpoint). Throws OutOfRange.
  std::size_t piece_index(double u) const;

  bool operator==(const PiecewiseFunction&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<Coeffs> pieces_;
  bool monotone_ = false;
  double piece_decreasing(std::size_t i, double s_end) const;

  std::vector<double> decreasing_at_left_;  // D(x_i)
  // Per piece: 0, interior roots of p', width; and whether p' < 0 between
  // consecutive cuts.
  std::vector<std::vector<double>> cuts_;
  std::vector<std::vector<char>> falling_;
};

/// Largest [a, b] within [lo, hi] with a < I < b on which f is affine, or
/// (I, I) when no neighbourhood of I qualifies. Endpoints are breakpoints of
/// f or ends of [lo, hi].
Interval maximal_affine_interval(const PiecewiseFunction& f, double I, double lo, double hi,
                                 double tol = kDefaultTol);

/// As maximal_affine_interval with "affine" replaced by "constant".
Interval maximal_constant_interval(const PiecewiseFunction& f, double I, double lo, double hi,
                                   double tol = kDefaultTol);

/// Horner evaluation of a local polynomial.
double poly_eval(std::span<const double> coeffs, double s) noexcept;

}  // namespace degenwave
