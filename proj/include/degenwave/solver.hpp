#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "degenwave/grid_state.hpp"
#include "degenwave/piecewise_fn.hpp"
#include "degenwave/structure_analysis.hpp"

namespace degenwave {

struct SchemeParams {
  double cfl_safety = 0.5;  ///< in (0, 1]
  double t_end = 0.0;
  std::vector<double> snapshot_times;  ///< increasing, within [0, t_end]
  /// Forces the time step (still checked against the monotonicity bound).
  /// Used to put several runs on one time grid.
  std::optional<double> dt_override;

  bool operator==(const SchemeParams&) const = default;
};

struct Snapshot {
  double time = 0.0;
  Field field;
};

struct RunResult {
  /// First entry is always the initial data at t = 0, then one entry per
  /// requested time (the first step time at or after it).
  std::vector<Snapshot> snapshots;
  StructureReport structure;
  std::size_t step_count = 0;
  double dt = 0.0;
  SchemeParams params;

  const Field& initial() const { return snapshots.front().field; }
  const Field& final() const { return snapshots.back().field; }
};

/// Engquist-Osher flux phi(uL) + integral_{uL}^{uR} min(phi', 0): upwind for
/// monotone phi, exact per polynomial piece.
double eo_flux(const PiecewiseFunction& phi, double uL, double uR);

/// Largest dt with dt * (L_phi / dx + 2 L_g / dx^2) <= cfl_safety, the
/// Lipschitz constants taken over [lo, hi].
double stable_time_step(const PiecewiseFunction& phi, const PiecewiseFunction& g, double lo,
                        double hi, std::size_t n_cells, double cfl_safety);

/// One explicit conservative step. Throws CflViolation when dt is not
/// admissible for the range of u.
Field step(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u, double dt);

/// Time-steps u0 to t_end with a fixed dt chosen from the initial range.
/// `bound` is forwarded to analyze().
RunResult run(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
              const SchemeParams& params, double tol = kDefaultTol,
              std::optional<double> bound = std::nullopt);

/// As run() without the structure analysis (`structure` stays default), so
/// phi and g only need to cover the data range.
RunResult simulate(const PiecewiseFunction& phi, const PiecewiseFunction& g, const Field& u0,
                   const SchemeParams& params);

/// Two runs on a shared time step admissible for both initial data, so that
/// per-step comparison and contraction hold between them.
std::pair<RunResult, RunResult> run_pair(const PiecewiseFunction& phi,
                                         const PiecewiseFunction& g, const Field& u01,
                                         const Field& u02, const SchemeParams& params,
                                         double tol = kDefaultTol,
                                         std::optional<double> bound = std::nullopt);

}  // namespace degenwave
