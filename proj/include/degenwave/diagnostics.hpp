#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degenwave/grid_state.hpp"
#include "degenwave/piecewise_fn.hpp"
#include "degenwave/solver.hpp"
#include "degenwave/structure_analysis.hpp"

namespace degenwave {

struct TimeValue {
  double time = 0.0;
  double value = 0.0;

  bool operator==(const TimeValue&) const = default;
};
using Series = std::vector<TimeValue>;

/// Outcome of one named check. passed <=> observed <= threshold.
struct CheckReport {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double threshold = 0.0;
  Series series;
  /// Secondary series (e.g. the dominating series of a squeeze check).
  std::vector<std::pair<std::string, Series>> aux;
  /// Set when the check could not be evaluated.
  std::string error;
};

/// Traveling-wave profile v with its de-shifting speed.
struct ProfileEstimate {
  Field v;
  double c_used = 0.0;
  /// ||u(t) - v(. - c t)||_1 at snapshot times >= t_lo.
  Series residual_history;
  bool converged = false;
  double threshold = 0.0;
};

/// Smooth nonnegative test function
///   f(t, x) = B((t - t0) / sigma_t) * B((x - x0) / sigma_x)  (x periodic),
/// B(s) = exp(1 - 1 / (1 - s^2)) on |s| < 1, 0 outside. Requires
/// sigma_x <= 1/2 so the periodization has one active term.
class TestBump {
 public:
  TestBump(double t0, double x0, double sigma_t, double sigma_x);

  double t0() const noexcept { return t0_; }
  double x0() const noexcept { return x0_; }
  double sigma_t() const noexcept { return sigma_t_; }
  double sigma_x() const noexcept { return sigma_x_; }

  double value(double t, double x) const;
  double d_t(double t, double x) const;
  double d_x(double t, double x) const;
  double d_xx(double t, double x) const;
  /// max(sup|f|, sup|f_t|, sup|f_x|, sup|f_xx|).
  double c2_norm() const;

 private:
  double t0_, x0_, sigma_t_, sigma_x_;
};

/// Bump profile and its first two derivatives, with their sup norms.
double bump(double s);
double bump_d1(double s);
double bump_d2(double s);
double bump_d1_max();
double bump_d2_max();

/// Nine equispaced k spanning [min u0 - 0.1 range, max u0 + 0.1 range].
std::vector<double> default_k_values(const Field& u0);
/// 3 x 2 bumps inside (0, t_end) x T.
std::vector<TestBump> default_bumps(double t_end);

/// Space-time quadrature of the entropy inequality
///   |u-k| f_t + sign(u-k)(phi(u)-phi(k)) f_x + |g(u)-g(k)| f_xx
/// (midpoint in x, trapezoid over snapshot times) for one (k, f).
double entropy_integral(const RunResult& run, const PiecewiseFunction& phi,
                        const PiecewiseFunction& g, double k, const TestBump& f);
/// Same quadrature of the weak form u f_t + phi(u) f_x + g(u) f_xx.
double weak_form_integral(const RunResult& run, const PiecewiseFunction& phi,
                          const PiecewiseFunction& g, const TestBump& f);
/// Same quadrature of k f_t + phi(k) f_x + g(k) f_xx for a constant state.
double constant_state_integral(const RunResult& run, const PiecewiseFunction& phi,
                               const PiecewiseFunction& g, double k, const TestBump& f);

/// Largest gap between consecutive snapshot times.
double snapshot_spacing(const RunResult& run);

/// observed = -min over (k, f) of the entropy integral; threshold =
/// C (dx + dt_snap) max ||f||_C2 (1 + max|k|). Throws UnsupportedTestFn when
/// a bump's support leaves (0, t_end).
CheckReport entropy_residual(const RunResult& run, const PiecewiseFunction& phi,
                             const PiecewiseFunction& g, const std::vector<double>& k_values,
                             const std::vector<TestBump>& bumps, double constant = 10.0);

/// Positive-part and L1 distances between two runs on one schedule must be
/// non-increasing (to 1e-10).
CheckReport contraction_monitor(const RunResult& a, const RunResult& b);

/// max over snapshots of |mean(u(t)) - mean(u0)| against 1e-10.
CheckReport conservation_monitor(const RunResult& run);

/// ||u(t) - I||_1; default threshold 0.01 ||u0 - I||_1.
CheckReport decay_metric(const RunResult& run, std::optional<double> threshold = std::nullopt);

/// ||u(t) - cutoff(u(t), a2, b2)||_1; default threshold 0.02 (initial + dx).
CheckReport cutoff_convergence(const RunResult& run, double a2, double b2,
                               std::optional<double> threshold = std::nullopt);

/// Comparison runs from u0 + shift_upper and u0 + shift_lower on the same
/// time grid; with b = I + shift_upper, a = I + shift_lower checks
/// int (u-b)^+ <= int (v-b)^+ and int (a-u)^+ <= int (a-w)^+ per snapshot.
/// Reruns the base data too when the comparison data need a smaller step.
CheckReport squeeze_bounds(const RunResult& run, const PiecewiseFunction& phi,
                           const PiecewiseFunction& g, double shift_upper, double shift_lower);

/// Final snapshot shifted back by round(c t_end n) cells (v = I when the
/// speed is degenerate); residuals use the same de-shifting rule.
ProfileEstimate extract_profile(const RunResult& run, const StructureReport& structure,
                                double t_lo, std::optional<double> threshold = std::nullopt);

/// run followed by extract_profile with t_lo = t_end / 2.
ProfileEstimate profile_operator_T(const PiecewiseFunction& phi, const PiecewiseFunction& g,
                                   const Field& u0, const SchemeParams& params,
                                   double tol = kDefaultTol,
                                   std::optional<double> bound = std::nullopt);

/// Non-expansiveness of u0 -> v. Same (a, b): direct L1 distance of the
/// profiles; otherwise the distance of the means. Both structures use the
/// pair's common bound M. Default tolerance 0.05 ||u01 - u02||_1 + 4 dx.
CheckReport t_nonexpansive_check(const PiecewiseFunction& phi, const PiecewiseFunction& g,
                                 const Field& u01, const Field& u02, const SchemeParams& params,
                                 double tol = kDefaultTol,
                                 std::optional<double> tolerance = std::nullopt);

/// Same check from two finished runs that share a time grid.
CheckReport t_nonexpansive_from_runs(const RunResult& a, const RunResult& b,
                                     std::optional<double> tolerance = std::nullopt);

}  // namespace degenwave
