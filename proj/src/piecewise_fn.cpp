#include "degenwave/piecewise_fn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <utility>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kContinuityTol = 1e-12;
constexpr double kCoverageSlack = 1e-12;

double deriv_eval(std::span<const double> c, double s) noexcept {
  double d = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) d = d * s + static_cast<double>(k) * c[k];
  return d;
}

double coeff(const PiecewiseFunction::Coeffs& c, std::size_t k) noexcept {
  return k < c.size() ? c[k] : 0.0;
}

/// Real roots of the local derivative c1 + 2 c2 s + 3 c3 s^2, ascending.
std::vector<double> derivative_roots(const PiecewiseFunction::Coeffs& c) {
  const double qa = 3.0 * coeff(c, 3);
  const double qb = 2.0 * coeff(c, 2);
  const double qc = coeff(c, 1);
  std::vector<double> roots;
  if (qa == 0.0) {
    if (qb != 0.0) roots.push_back(-qc / qb);
    return roots;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return roots;
  if (disc == 0.0) {
    roots.push_back(-qb / (2.0 * qa));
    return roots;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  if (q == 0.0) {
    const double r = std::sqrt(-qc / qa);
    roots = {-r, r};
  } else {
    roots = {q / qa, qc / q};
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Max of |p'| over [s_lo, s_hi] (p' has degree <= 2).
double piece_max_abs_slope(const PiecewiseFunction::Coeffs& c, double s_lo, double s_hi) {
  double best = std::max(std::abs(deriv_eval(c, s_lo)), std::abs(deriv_eval(c, s_hi)));
  const double c3 = coeff(c, 3);
  if (c3 != 0.0) {
    const double vertex = -coeff(c, 2) / (3.0 * c3);
    if (vertex > s_lo && vertex < s_hi) best = std::max(best, std::abs(deriv_eval(c, vertex)));
  }
  return best;
}

/// Min of p' over [0, h].
double piece_min_slope(const PiecewiseFunction::Coeffs& c, double h) {
  double lowest = std::min(deriv_eval(c, 0.0), deriv_eval(c, h));
  const double c3 = coeff(c, 3);
  if (c3 != 0.0) {
    const double vertex = -coeff(c, 2) / (3.0 * c3);
    if (vertex > 0.0 && vertex < h) lowest = std::min(lowest, deriv_eval(c, vertex));
  }
  return lowest;
}

std::string piece_msg(std::size_t i, const std::string& what) {
  std::ostringstream os;
  os << "piece " << i << ": " << what;
  return os.str();
}

enum class Shape { kAffine, kConstant };

bool has_shape(const PiecewiseFunction::Coeffs& c, Shape shape, double width, double tol) {
  const std::size_t first = shape == Shape::kAffine ? 2 : 1;
  for (std::size_t k = first; k < c.size(); ++k) {
    if (std::abs(c[k]) * std::pow(width, static_cast<double>(k)) > tol) return false;
  }
  return true;
}

Interval maximal_interval(const PiecewiseFunction& f, double I, double lo, double hi, double tol,
                          Shape shape) {
  if (!(lo <= I && I <= hi)) throw OutOfRange("I must lie in [lo, hi]");
  if (!f.covers(lo, hi)) throw OutOfRange("function does not cover [lo, hi]");
  if (!(lo < I && I < hi)) return {I, I};

  const auto& bp = f.breakpoints();
  const auto& pieces = f.pieces();
  const double width = hi - lo;

  std::size_t first = f.piece_index(I);
  std::size_t last = first;
  if (I == bp[first] && first > 0) --first;

  const double seed_slope = coeff(pieces[first], 1);
  auto fits = [&](std::size_t i) {
    if (!has_shape(pieces[i], shape, width, tol)) return false;
    if (shape == Shape::kAffine) return std::abs(coeff(pieces[i], 1) - seed_slope) * width <= tol;
    return true;
  };

  for (std::size_t i = first; i <= last; ++i) {
    if (!fits(i)) return {I, I};
  }
  while (first > 0 && bp[first] > lo && fits(first - 1)) --first;
  while (last + 1 < pieces.size() && bp[last + 1] < hi && fits(last + 1)) ++last;
  return {std::max(lo, bp[first]), std::min(hi, bp[last + 1])};
}

}  // namespace

double poly_eval(std::span<const double> coeffs, double s) noexcept {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * s + coeffs[k];
  return v;
}

PiecewiseFunction::PiecewiseFunction(std::vector<double> breakpoints, std::vector<Coeffs> pieces,
                                     bool monotone)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)), monotone_(monotone) {
  if (breakpoints_.size() < 2) throw RangeError("need at least two breakpoints");
  if (pieces_.size() + 1 != breakpoints_.size()) {
    throw RangeError("piece count must be one less than breakpoint count");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) throw RangeError("non-finite breakpoint");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw RangeError("breakpoints must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    auto& c = pieces_[i];
    if (c.empty() || c.size() > 4) throw RangeError(piece_msg(i, "degree must be 0..3"));
    for (double v : c) {
      if (!std::isfinite(v)) throw RangeError(piece_msg(i, "non-finite coefficient"));
    }
  }
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const double h = breakpoints_[i + 1] - breakpoints_[i];
    const double right = poly_eval(pieces_[i], h);
    const double next = pieces_[i + 1][0];
    const double scale = std::max({1.0, std::abs(right), std::abs(next)});
    if (std::abs(right - next) > kContinuityTol * scale) {
      throw RangeError(piece_msg(i + 1, "discontinuous at left breakpoint"));
    }
    pieces_[i + 1][0] = right;
  }
  if (monotone_) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const double h = breakpoints_[i + 1] - breakpoints_[i];
      const double scale =
          std::max({1.0, std::abs(deriv_eval(pieces_[i], 0.0)), std::abs(deriv_eval(pieces_[i], h))});
      if (piece_min_slope(pieces_[i], h) < -kContinuityTol * scale) {
        throw RangeError(piece_msg(i, "negative derivative in a monotone function"));
      }
    }
  }
  cuts_.resize(pieces_.size());
  falling_.resize(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double h = breakpoints_[i + 1] - breakpoints_[i];
    auto& cuts = cuts_[i];
    cuts.push_back(0.0);
    for (double r : derivative_roots(pieces_[i])) {
      if (r > cuts.back() && r < h) cuts.push_back(r);
    }
    cuts.push_back(h);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      falling_[i].push_back(deriv_eval(pieces_[i], 0.5 * (cuts[k] + cuts[k + 1])) < 0.0 ? 1 : 0);
    }
  }
  decreasing_at_left_.assign(pieces_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    decreasing_at_left_[i + 1] =
        decreasing_at_left_[i] + piece_decreasing(i, breakpoints_[i + 1] - breakpoints_[i]);
  }
}

double PiecewiseFunction::piece_decreasing(std::size_t i, double s_end) const {
  const auto& cuts = cuts_[i];
  const auto& falling = falling_[i];
  double total = 0.0;
  for (std::size_t k = 0; k < falling.size() && cuts[k] < s_end; ++k) {
    if (!falling[k]) continue;
    const double hi = std::min(cuts[k + 1], s_end);
    total += poly_eval(pieces_[i], hi) - poly_eval(pieces_[i], cuts[k]);
  }
  return total;
}

PiecewiseFunction PiecewiseFunction::from_breakpoints(std::vector<double> breakpoints,
                                                      const std::vector<Coeffs>& higher_order,
                                                      double value_at_left_end, bool monotone) {
  if (breakpoints.size() < 2 || higher_order.size() + 1 != breakpoints.size()) {
    throw RangeError("piece count must be one less than breakpoint count");
  }
  std::vector<Coeffs> pieces;
  pieces.reserve(higher_order.size());
  double anchor = value_at_left_end;
  for (std::size_t i = 0; i < higher_order.size(); ++i) {
    if (higher_order[i].size() > 3) throw RangeError(piece_msg(i, "degree must be 0..3"));
    Coeffs c{anchor};
    c.insert(c.end(), higher_order[i].begin(), higher_order[i].end());
    anchor = poly_eval(c, breakpoints[i + 1] - breakpoints[i]);
    pieces.push_back(std::move(c));
  }
  return PiecewiseFunction(std::move(breakpoints), std::move(pieces), monotone);
}

PiecewiseFunction PiecewiseFunction::burgers(double lo, double hi) {
  return PiecewiseFunction({lo, hi}, {{0.5 * lo * lo, lo, 0.5}}, false);
}

PiecewiseFunction PiecewiseFunction::linear(double slope, double intercept, double lo, double hi) {
  return PiecewiseFunction({lo, hi}, {{slope * lo + intercept, slope}}, slope >= 0.0);
}

PiecewiseFunction PiecewiseFunction::constant(double value, double lo, double hi) {
  return PiecewiseFunction({lo, hi}, {{value}}, true);
}

bool PiecewiseFunction::covers(double lo, double hi) const noexcept {
  const double slack = kCoverageSlack * std::max(1.0, upper() - lower());
  return lo >= lower() - slack && hi <= upper() + slack && lo <= hi;
}

std::size_t PiecewiseFunction::piece_index(double u) const {
  const double slack = kCoverageSlack * std::max(1.0, upper() - lower());
  if (!(u >= lower() - slack && u <= upper() + slack)) {
    std::ostringstream os;
    os << "argument " << u << " outside covered range [" << lower() << ", " << upper() << "]";
    throw OutOfRange(os.str());
  }
  const auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, u);
  return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
}

double PiecewiseFunction::eval(double u) const {
  const std::size_t i = piece_index(u);
  return poly_eval(pieces_[i], u - breakpoints_[i]);
}

double PiecewiseFunction::derivative(double u) const {
  const std::size_t i = piece_index(u);
  return deriv_eval(pieces_[i], u - breakpoints_[i]);
}

double PiecewiseFunction::decreasing_part(double u) const {
  const std::size_t i = piece_index(u);
  return decreasing_at_left_[i] + piece_decreasing(i, u - breakpoints_[i]);
}

PiecewiseFunction::ValueAndDecreasing PiecewiseFunction::eval_with_decreasing(double u) const {
  const std::size_t i = piece_index(u);
  const double s = u - breakpoints_[i];
  return {poly_eval(pieces_[i], s), decreasing_at_left_[i] + piece_decreasing(i, s)};
}

double PiecewiseFunction::lipschitz_on(double lo, double hi) const {
  if (!(lo <= hi)) throw OutOfRange("lipschitz_on needs lo <= hi");
  piece_index(lo);
  piece_index(hi);
  double best = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double x0 = breakpoints_[i];
    const double x1 = breakpoints_[i + 1];
    const bool first = i == 0;
    const bool last = i + 1 == pieces_.size();
    if ((x1 < lo && !last) || (x0 > hi && !first)) continue;
    const double s_lo = std::clamp(lo, x0, x1) - x0;
    const double s_hi = std::clamp(hi, x0, x1) - x0;
    best = std::max(best, piece_max_abs_slope(pieces_[i], s_lo, s_hi));
  }
  return best;
}

PiecewiseFunction PiecewiseFunction::plus_linear(double slope, double shift) const {
  std::vector<Coeffs> pieces = pieces_;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    pieces[i][0] += slope * breakpoints_[i] + shift;
    if (pieces[i].size() < 2) pieces[i].push_back(0.0);
    pieces[i][1] += slope;
  }
  return PiecewiseFunction(breakpoints_, std::move(pieces), monotone_ && slope >= 0.0);
}

Interval maximal_affine_interval(const PiecewiseFunction& f, double I, double lo, double hi,
                                 double tol) {
  return maximal_interval(f, I, lo, hi, tol, Shape::kAffine);
}

Interval maximal_constant_interval(const PiecewiseFunction& f, double I, double lo, double hi,
                                   double tol) {
  return maximal_interval(f, I, lo, hi, tol, Shape::kConstant);
}

}  // namespace degenwave
