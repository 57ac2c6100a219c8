#include "degenwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kStepSlack = 1e-12;
constexpr double kScheduleSlack = 1e-9;

/// dt * (L_phi n + 2 L_g n^2), the quantity bounded by the CFL condition.
double cfl_number(const PiecewiseFunction& phi, const PiecewiseFunction& g, double lo, double hi,
                  std::size_t n, double dt) {
  const double nd = static_cast<double>(n);
  return dt * (phi.lipschitz_on(lo, hi) * nd + 2.0 * g.lipschitz_on(lo, hi) * nd * nd);
}

void require_coverage(const PiecewiseFunction& phi, const PiecewiseFunction& g, double lo,
                      double hi) {
  if (!phi.covers(lo, hi) || !g.covers(lo, hi)) {
    std::ostringstream os;
    os << "phi and g must cover the data range [" << lo << ", " << hi << "]";
    throw OutOfRange(os.str());
  }
}

/// Reusable update buffers for one run.
class Stepper {
 public:
  Stepper(const PiecewiseFunction& phi, const PiecewiseFunction& g, std::size_t n, double dt)
      : phi_(phi),
        g_(g),
        lambda_(dt * static_cast<double>(n)),
        mu_(dt * static_cast<double>(n) * static_cast<double>(n)),
        upwind_(n),
        downwind_(n),
        diffusion_(n) {}

  void advance(std::vector<double>& u) {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) {
      const auto split = phi_.eval_with_decreasing(u[j]);
      upwind_[j] = split.value - split.decreasing;
      downwind_[j] = split.decreasing;
      diffusion_[j] = g_.eval(u[j]);
    }
    // F_{j+1/2} = upwind_j + downwind_{j+1}
    double flux_left = upwind_[n - 1] + downwind_[0];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jp = j + 1 == n ? 0 : j + 1;
      const std::size_t jm = j == 0 ? n - 1 : j - 1;
      const double flux_right = upwind_[j] + downwind_[jp];
      const double lap = (diffusion_[jp] - diffusion_[j]) - (diffusion_[j] - diffusion_[jm]);
      u[j] = u[j] - lambda_ * (flux_right - flux_left) + mu_ * lap;
      flux_left = flux_right;
    }
  }

 private:
  const PiecewiseFunction& phi_;
  const PiecewiseFunction& g_;
  double lambda_;
  double mu_;
  std::vector<double> upwind_;
  std::vector<double> downwind_;
  std::vector<double> diffusion_;
};

void validate(const SchemeParams& p) {
  if (!(p.cfl_safety > 0.0 && p.cfl_safety <= 1.0)) {
    throw InvalidArgument("cfl_safety must lie in (0, 1]");
  }
  if (!(p.t_end >= 0.0) || !std::isfinite(p.t_end)) throw InvalidArgument("t_end must be >= 0");
  for (std::size_t i = 0; i < p.snapshot_times.size(); ++i) {
    const double t = p.snapshot_times[i];
    if (!(t >= 0.0 && t <= p.t_end)) throw InvalidArgument("snapshot time outside [0, t_end]");
    if (i > 0 && !(t > p.snapshot_times[i - 1])) {
      throw InvalidArgument("snapshot times must be increasing");
    }
  }
  if (p.dt_override && !(*p.dt_override > 0.0)) throw InvalidArgument("dt must be positive");
}

std::size_t steps_to_reach(double t, double dt) {
  if (t <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t / dt - kScheduleSlack));
}

}  // namespace

double eo_flux(const PiecewiseFunction& phi, double uL, double uR) {
  const auto left = phi.eval_with_decreasing(uL);
  return (left.value - left.decreasing) + phi.decreasing_part(uR);
}

double stable_time_step(const PiecewiseFunction& phi, const PiecewiseFunction& g, double lo,
                        double hi, std::size_t n_cells, double cfl_safety) {
  const double nd = static_cast<double>(n_cells);
  const double rate =
      phi.lipschitz_on(lo, hi) * nd + 2.0 * g.lipschitz_on(lo, hi) * nd * nd;
  // Frozen dynamics: any step is admissible; keep it on the spatial scale.
  if (rate == 0.0) return cfl_safety / nd;
  return cfl_safety / rate;
}

Field step(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u, double dt) {
  const double lo = u.min();
  const double hi = u.max();
  require_coverage(phi, g, lo, hi);
  if (!(dt > 0.0)) throw CflViolation("dt must be positive");
  const double cfl = cfl_number(phi, g, lo, hi, u.size(), dt);
  if (cfl > 1.0 + kStepSlack) {
    std::ostringstream os;
    os << "dt = " << dt << " gives CFL number " << cfl << " > 1";
    throw CflViolation(os.str());
  }
  std::vector<double> values(u.values().begin(), u.values().end());
  Stepper stepper(phi, g, u.size(), dt);
  stepper.advance(values);
  return Field(u.grid(), std::move(values));
}

RunResult run(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
              const SchemeParams& params, double tol, std::optional<double> bound) {
  validate(params);
  require_coverage(phi, g, u0.min(), u0.max());
  const StructureReport structure = analyze(phi, g, u0, tol, bound);
  RunResult result = simulate(phi, g, u0, params);
  result.structure = structure;
  return result;
}

RunResult simulate(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
                   const SchemeParams& params) {
  validate(params);
  const double lo = u0.min();
  const double hi = u0.max();
  require_coverage(phi, g, lo, hi);

  RunResult result;
  result.params = params;

  const std::size_t n = u0.size();
  double dt = stable_time_step(phi, g, lo, hi, n, params.cfl_safety);
  if (params.dt_override) {
    const double cfl = cfl_number(phi, g, lo, hi, n, *params.dt_override);
    if (cfl > params.cfl_safety * (1.0 + kStepSlack)) {
      std::ostringstream os;
      os << "dt override " << *params.dt_override << " gives CFL number " << cfl
         << " > cfl_safety " << params.cfl_safety;
      throw CflViolation(os.str());
    }
    dt = *params.dt_override;
  }
  result.dt = dt;

  std::vector<std::size_t> capture;
  for (double t : params.snapshot_times) {
    const std::size_t k = steps_to_reach(t, dt);
    if (k > 0 && (capture.empty() || capture.back() != k)) capture.push_back(k);
  }
  const std::size_t total = steps_to_reach(params.t_end, dt);
  if (total > 0 && (capture.empty() || capture.back() != total)) capture.push_back(total);

  result.snapshots.push_back({0.0, u0});
  std::vector<double> u(u0.values().begin(), u0.values().end());
  Stepper stepper(phi, g, n, dt);
  std::size_t k = 0;
  for (std::size_t target : capture) {
    for (; k < target; ++k) stepper.advance(u);
    result.snapshots.push_back({static_cast<double>(k) * dt, Field(u0.grid(), u)});
  }
  result.step_count = k;
  return result;
}

std::pair<RunResult, RunResult> run_pair(const PiecewiseFunction& phi,
                                         const PiecewiseFunction& g, const Field& u01,
                                         const Field& u02, const SchemeParams& params,
                                         double tol, std::optional<double> bound) {
  if (!(u01.grid() == u02.grid())) throw GridMismatch("pair runs need one grid");
  validate(params);
  const double lo = std::min(u01.min(), u02.min());
  const double hi = std::max(u01.max(), u02.max());
  require_coverage(phi, g, lo, hi);
  SchemeParams shared = params;
  if (!shared.dt_override) {
    shared.dt_override = stable_time_step(phi, g, lo, hi, u01.size(), params.cfl_safety);
  }
  return {run(phi, g, u01, shared, tol, bound), run(phi, g, u02, shared, tol, bound)};
}

}  // namespace degenwave
