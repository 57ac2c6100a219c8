#include "degenwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kMonotoneTol = 1e-10;
constexpr double kConservationTol = 1e-10;

/// Signed distance from x to x0 on the circle, in [-1/2, 1/2).
double circle_offset(double x, double x0) {
  double d = x - x0;
  d -= std::floor(d + 0.5);
  return d;
}

double max_abs_on_grid(double (*fn)(double)) {
  // Dense scan plus golden-section polish around the best sample.
  constexpr int kSamples = 20000;
  double best_s = 0.0;
  double best = 0.0;
  for (int i = 1; i < kSamples; ++i) {
    const double s = -1.0 + 2.0 * i / kSamples;
    const double v = std::abs(fn(s));
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  double lo = std::max(-1.0 + 1e-12, best_s - 2.0 / kSamples);
  double hi = std::min(1.0 - 1e-12, best_s + 2.0 / kSamples);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double m1 = hi - ratio * (hi - lo);
    const double m2 = lo + ratio * (hi - lo);
    if (std::abs(fn(m1)) > std::abs(fn(m2))) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::max(best, std::abs(fn(0.5 * (lo + hi))));
}

/// Per-snapshot phi(u_j), g(u_j).
struct EvaluatedRun {
  std::vector<std::vector<double>> phi_u;
  std::vector<std::vector<double>> g_u;
};

EvaluatedRun evaluate(const RunResult& run, const PiecewiseFunction& phi,
                      const PiecewiseFunction& g) {
  EvaluatedRun e;
  for (const auto& snap : run.snapshots) {
    std::vector<double> pu(snap.field.size());
    std::vector<double> gu(snap.field.size());
    for (std::size_t j = 0; j < snap.field.size(); ++j) {
      pu[j] = phi.eval(snap.field[j]);
      gu[j] = g.eval(snap.field[j]);
    }
    e.phi_u.push_back(std::move(pu));
    e.g_u.push_back(std::move(gu));
  }
  return e;
}

/// Trapezoid in time of midpoint-in-space sums of
/// A_j f_t + B_j f_x + C_j f_xx, with (A, B, C) supplied per snapshot.
template <typename Integrand>
double space_time_quadrature(const RunResult& run, const TestBump& f, Integrand integrand) {
  const std::size_t n_snap = run.snapshots.size();
  if (n_snap < 2) return 0.0;
  const Grid& grid = run.initial().grid();
  const std::size_t n = grid.n_cells();
  std::vector<double> slice(n_snap, 0.0);
  std::vector<double> terms(n);
  for (std::size_t m = 0; m < n_snap; ++m) {
    const double t = run.snapshots[m].time;
    if (std::abs(t - f.t0()) >= f.sigma_t()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.center(j);
      const auto [a, b, c] = integrand(m, j);
      terms[j] = a * f.d_t(t, x) + b * f.d_x(t, x) + c * f.d_xx(t, x);
    }
    slice[m] = compensated_sum(terms) / static_cast<double>(n);
  }
  std::vector<double> panels(n_snap - 1);
  for (std::size_t m = 0; m + 1 < n_snap; ++m) {
    panels[m] = 0.5 * (slice[m] + slice[m + 1]) *
                (run.snapshots[m + 1].time - run.snapshots[m].time);
  }
  return compensated_sum(panels);
}

struct Triple {
  double a, b, c;
};

double entropy_integral_evaluated(const RunResult& run, const EvaluatedRun& e,
                                  const PiecewiseFunction& phi, const PiecewiseFunction& g,
                                  double k, const TestBump& f) {
  const double phi_k = phi.eval(k);
  const double g_k = g.eval(k);
  return space_time_quadrature(run, f, [&](std::size_t m, std::size_t j) {
    const double u = run.snapshots[m].field[j];
    const double sgn = u > k ? 1.0 : (u < k ? -1.0 : 0.0);
    return Triple{std::abs(u - k), sgn * (e.phi_u[m][j] - phi_k), std::abs(e.g_u[m][j] - g_k)};
  });
}

/// Largest increase between consecutive entries.
double max_increase(const Series& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    worst = std::max(worst, s[i + 1].value - s[i].value);
  }
  return worst;
}

void require_same_schedule(const RunResult& a, const RunResult& b) {
  if (!(a.initial().grid() == b.initial().grid())) throw GridMismatch("runs use different grids");
  if (a.snapshots.size() != b.snapshots.size()) {
    throw InvalidArgument("runs have different snapshot schedules");
  }
  for (std::size_t m = 0; m < a.snapshots.size(); ++m) {
    if (a.snapshots[m].time != b.snapshots[m].time) {
      throw InvalidArgument("runs have different snapshot schedules");
    }
  }
}

Field add_constant(const Field& u, double shift) {
  std::vector<double> values(u.values().begin(), u.values().end());
  for (double& v : values) v += shift;
  return Field(u.grid(), std::move(values));
}

std::int64_t deshift_cells(double c, double t, std::size_t n) {
  return static_cast<std::int64_t>(std::llround(c * t * static_cast<double>(n)));
}

}  // namespace

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_d1(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return -2.0 * s / (w * w) * bump(s);
}

double bump_d2(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  const double w2 = w * w;
  return bump(s) * (4.0 * s * s / (w2 * w2) - 2.0 / w2 - 8.0 * s * s / (w2 * w));
}

double bump_d1_max() {
  static const double value = max_abs_on_grid(&bump_d1);
  return value;
}

double bump_d2_max() {
  static const double value = max_abs_on_grid(&bump_d2);
  return value;
}

TestBump::TestBump(double t0, double x0, double sigma_t, double sigma_x)
    : t0_(t0), x0_(x0), sigma_t_(sigma_t), sigma_x_(sigma_x) {
  if (!(sigma_t > 0.0) || !(sigma_x > 0.0) || sigma_x > 0.5) {
    throw InvalidArgument("bump widths need sigma_t > 0 and 0 < sigma_x <= 1/2");
  }
}

double TestBump::value(double t, double x) const {
  return bump((t - t0_) / sigma_t_) * bump(circle_offset(x, x0_) / sigma_x_);
}

double TestBump::d_t(double t, double x) const {
  return bump_d1((t - t0_) / sigma_t_) / sigma_t_ * bump(circle_offset(x, x0_) / sigma_x_);
}

double TestBump::d_x(double t, double x) const {
  return bump((t - t0_) / sigma_t_) * bump_d1(circle_offset(x, x0_) / sigma_x_) / sigma_x_;
}

double TestBump::d_xx(double t, double x) const {
  return bump((t - t0_) / sigma_t_) * bump_d2(circle_offset(x, x0_) / sigma_x_) /
         (sigma_x_ * sigma_x_);
}

double TestBump::c2_norm() const {
  return std::max({1.0, bump_d1_max() / sigma_t_, bump_d1_max() / sigma_x_,
                   bump_d2_max() / (sigma_x_ * sigma_x_)});
}

std::vector<double> default_k_values(const Field& u0) {
  const double lo = u0.min();
  const double hi = u0.max();
  double range = hi - lo;
  if (range == 0.0) range = std::max(1.0, std::abs(lo));
  const double start = lo - 0.1 * range;
  const double stop = hi + 0.1 * range;
  std::vector<double> ks(9);
  for (int i = 0; i < 9; ++i) ks[i] = start + (stop - start) * i / 8.0;
  return ks;
}

std::vector<TestBump> default_bumps(double t_end) {
  std::vector<TestBump> bumps;
  for (double frac : {0.3, 0.5, 0.7}) {
    for (double x0 : {0.25, 0.75}) bumps.emplace_back(frac * t_end, x0, 0.2 * t_end, 0.25);
  }
  return bumps;
}

double snapshot_spacing(const RunResult& run) {
  double gap = 0.0;
  for (std::size_t m = 0; m + 1 < run.snapshots.size(); ++m) {
    gap = std::max(gap, run.snapshots[m + 1].time - run.snapshots[m].time);
  }
  return gap;
}

double entropy_integral(const RunResult& run, const PiecewiseFunction& phi,
                        const PiecewiseFunction& g, double k, const TestBump& f) {
  return entropy_integral_evaluated(run, evaluate(run, phi, g), phi, g, k, f);
}

double weak_form_integral(const RunResult& run, const PiecewiseFunction& phi,
                          const PiecewiseFunction& g, const TestBump& f) {
  const EvaluatedRun e = evaluate(run, phi, g);
  return space_time_quadrature(run, f, [&](std::size_t m, std::size_t j) {
    return Triple{run.snapshots[m].field[j], e.phi_u[m][j], e.g_u[m][j]};
  });
}

double constant_state_integral(const RunResult& run, const PiecewiseFunction& phi,
                               const PiecewiseFunction& g, double k, const TestBump& f) {
  const double phi_k = phi.eval(k);
  const double g_k = g.eval(k);
  return space_time_quadrature(
      run, f, [&](std::size_t, std::size_t) { return Triple{k, phi_k, g_k}; });
}

CheckReport entropy_residual(const RunResult& run, const PiecewiseFunction& phi,
                             const PiecewiseFunction& g, const std::vector<double>& k_values,
                             const std::vector<TestBump>& bumps, double constant) {
  const double t_end = run.snapshots.back().time;
  for (const auto& f : bumps) {
    if (!(f.t0() - f.sigma_t() > 0.0) || f.t0() + f.sigma_t() > t_end) {
      throw UnsupportedTestFn("test bump support must lie inside (0, t_end)");
    }
  }
  CheckReport report;
  report.name = "entropy";
  const EvaluatedRun e = evaluate(run, phi, g);
  double lowest = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  double max_k = 0.0;
  for (const auto& f : bumps) max_norm = std::max(max_norm, f.c2_norm());
  for (double k : k_values) max_k = std::max(max_k, std::abs(k));
  for (double k : k_values) {
    for (const auto& f : bumps) {
      lowest = std::min(lowest, entropy_integral_evaluated(run, e, phi, g, k, f));
    }
  }
  const double dx = run.initial().grid().dx();
  report.observed = -lowest;
  report.threshold = constant * (dx + snapshot_spacing(run)) * max_norm * (1.0 + max_k);
  report.passed = report.observed <= report.threshold;
  return report;
}

CheckReport contraction_monitor(const RunResult& a, const RunResult& b) {
  require_same_schedule(a, b);
  CheckReport report;
  report.name = "contraction";
  Series pp_ab;
  Series pp_ba;
  for (std::size_t m = 0; m < a.snapshots.size(); ++m) {
    const double t = a.snapshots[m].time;
    const Field& ua = a.snapshots[m].field;
    const Field& ub = b.snapshots[m].field;
    report.series.push_back({t, l1_distance(ua, ub)});
    pp_ab.push_back({t, positive_part_distance(ua, ub)});
    pp_ba.push_back({t, positive_part_distance(ub, ua)});
  }
  report.observed =
      std::max({max_increase(report.series), max_increase(pp_ab), max_increase(pp_ba)});
  report.threshold = kMonotoneTol;
  report.passed = report.observed <= report.threshold;
  report.aux = {{"positive_part_ab", std::move(pp_ab)}, {"positive_part_ba", std::move(pp_ba)}};
  return report;
}

CheckReport conservation_monitor(const RunResult& run) {
  CheckReport report;
  report.name = "conservation";
  const double I = mean(run.initial());
  for (const auto& snap : run.snapshots) {
    const double drift = std::abs(mean(snap.field) - I);
    report.series.push_back({snap.time, drift});
    report.observed = std::max(report.observed, drift);
  }
  report.threshold = kConservationTol;
  report.passed = report.observed <= report.threshold;
  return report;
}

CheckReport decay_metric(const RunResult& run, std::optional<double> threshold) {
  CheckReport report;
  report.name = "decay";
  const Field target(run.initial().grid(), mean(run.initial()));
  for (const auto& snap : run.snapshots) {
    report.series.push_back({snap.time, l1_distance(snap.field, target)});
  }
  report.observed = report.series.back().value;
  report.threshold = threshold.value_or(0.01 * report.series.front().value);
  report.passed = report.observed <= report.threshold;
  return report;
}

CheckReport cutoff_convergence(const RunResult& run, double a2, double b2,
                               std::optional<double> threshold) {
  CheckReport report;
  report.name = "cutoff";
  for (const auto& snap : run.snapshots) {
    report.series.push_back({snap.time, l1_distance(snap.field, cutoff(snap.field, a2, b2))});
  }
  report.observed = report.series.back().value;
  report.threshold = threshold.value_or(0.02 * (report.series.front().value +
                                                run.initial().grid().dx()));
  report.passed = report.observed <= report.threshold;
  return report;
}

CheckReport squeeze_bounds(const RunResult& run, const PiecewiseFunction& phi,
                           const PiecewiseFunction& g, double shift_upper, double shift_lower) {
  const Field& u0 = run.initial();
  const std::size_t n = u0.size();
  const Field upper0 = add_constant(u0, shift_upper);
  const Field lower0 = add_constant(u0, shift_lower);
  for (const Field* f : {&upper0, &lower0}) {
    if (!phi.covers(f->min(), f->max()) || !g.covers(f->min(), f->max())) {
      throw CoverageError("shifted comparison data leave the covered range of phi or g");
    }
  }

  SchemeParams params = run.params;
  params.snapshot_times.clear();
  for (std::size_t m = 1; m < run.snapshots.size(); ++m) {
    params.snapshot_times.push_back(run.snapshots[m].time);
  }
  params.t_end = std::max(params.t_end, run.snapshots.back().time);
  double dt = run.dt;
  for (const Field* f : {&upper0, &lower0}) {
    dt = std::min(dt, stable_time_step(phi, g, f->min(), f->max(), n, params.cfl_safety));
  }
  params.dt_override = dt;

  auto upper_job = std::async(std::launch::async, [&] { return simulate(phi, g, upper0, params); });
  auto lower_job = std::async(std::launch::async, [&] { return simulate(phi, g, lower0, params); });
  RunResult base_rerun;
  const RunResult* base = &run;
  if (dt < run.dt) {
    base_rerun = simulate(phi, g, u0, params);
    base = &base_rerun;
  }
  const RunResult upper = upper_job.get();
  const RunResult lower = lower_job.get();

  const double I = mean(u0);
  const double b = I + shift_upper;
  const double a = I + shift_lower;
  const Field b_field(u0.grid(), b);
  const Field a_field(u0.grid(), a);

  CheckReport report;
  report.name = "squeeze";
  Series above_dominant;
  Series below;
  Series below_dominant;
  double worst = 0.0;
  for (std::size_t m = 0; m < base->snapshots.size(); ++m) {
    const double t = base->snapshots[m].time;
    const double e_up = positive_part_distance(base->snapshots[m].field, b_field);
    const double d_up = positive_part_distance(upper.snapshots[m].field, b_field);
    const double e_lo = positive_part_distance(a_field, base->snapshots[m].field);
    const double d_lo = positive_part_distance(a_field, lower.snapshots[m].field);
    report.series.push_back({t, e_up});
    above_dominant.push_back({t, d_up});
    below.push_back({t, e_lo});
    below_dominant.push_back({t, d_lo});
    worst = std::max({worst, e_up - d_up, e_lo - d_lo});
  }
  report.aux = {{"above_dominant", std::move(above_dominant)},
                {"below", std::move(below)},
                {"below_dominant", std::move(below_dominant)}};
  report.observed = worst;
  report.threshold = kMonotoneTol;
  report.passed = report.observed <= report.threshold;
  return report;
}

ProfileEstimate extract_profile(const RunResult& run, const StructureReport& structure,
                                double t_lo, std::optional<double> threshold) {
  const Field& u0 = run.initial();
  const std::size_t n = u0.size();
  const double t_end = run.snapshots.back().time;
  if (t_end < t_lo) throw InvalidArgument("run ends before t_lo");

  ProfileEstimate est{Field(u0.grid(), structure.I), structure.c, {}, false, 0.0};
  if (!structure.degenerate_speed) {
    est.v = shift(run.final(), -deshift_cells(structure.c, t_end, n));
  }
  for (const auto& snap : run.snapshots) {
    if (snap.time < t_lo) continue;
    const std::int64_t k = structure.degenerate_speed ? 0 : deshift_cells(structure.c, snap.time, n);
    est.residual_history.push_back({snap.time, l1_distance(snap.field, shift(est.v, k))});
  }
  const Field mean_field(u0.grid(), mean(u0));
  est.threshold = threshold.value_or(0.02 * l1_distance(u0, mean_field) +
                                     2.0 * u0.grid().dx() * total_variation(u0));
  est.converged = est.residual_history.back().value <= est.threshold;
  return est;
}

ProfileEstimate profile_operator_T(const PiecewiseFunction& phi, const PiecewiseFunction& g,
                                   const Field& u0, const SchemeParams& params, double tol,
                                   std::optional<double> bound) {
  const RunResult r = run(phi, g, u0, params, tol, bound);
  return extract_profile(r, r.structure, 0.5 * r.snapshots.back().time);
}

CheckReport t_nonexpansive_from_runs(const RunResult& a, const RunResult& b,
                                     std::optional<double> tolerance) {
  require_same_schedule(a, b);
  const Field& u01 = a.initial();
  const Field& u02 = b.initial();
  const double initial = l1_distance(u01, u02);

  CheckReport report;
  report.name = "t_nonexpansive";
  for (std::size_t m = 0; m < a.snapshots.size(); ++m) {
    report.series.push_back(
        {a.snapshots[m].time, l1_distance(a.snapshots[m].field, b.snapshots[m].field)});
  }
  const StructureReport& sa = a.structure;
  const StructureReport& sb = b.structure;
  if (sa.a == sb.a && sa.b == sb.b) {
    const double t_half = 0.5 * a.snapshots.back().time;
    const Field v1 = extract_profile(a, sa, t_half).v;
    const Field v2 = extract_profile(b, sb, t_half).v;
    report.observed = l1_distance(v1, v2);
  } else {
    report.observed = std::abs(mean(u01) - mean(u02));
  }
  report.threshold = initial + tolerance.value_or(0.05 * initial + 4.0 * u01.grid().dx());
  report.passed = report.observed <= report.threshold;
  return report;
}

CheckReport t_nonexpansive_check(const PiecewiseFunction& phi, const PiecewiseFunction& g,
                                 const Field& u01, const Field& u02, const SchemeParams& params,
                                 double tol, std::optional<double> tolerance) {
  const double bound = std::max(u01.sup_norm(), u02.sup_norm());
  const auto [a, b] = run_pair(phi, g, u01, u02, params, tol, bound);
  return t_nonexpansive_from_runs(a, b, tolerance);
}

}  // namespace degenwave
