#include "degenwave/grid_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

void require_same_grid(const Field& u, const Field& v) {
  if (!(u.grid() == v.grid())) throw GridMismatch("fields live on different grids");
}

std::size_t wrap(std::int64_t k, std::size_t n) {
  const auto m = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(((k % m) + m) % m);
}

}  // namespace

Grid::Grid(std::size_t n_cells) : n_(n_cells) {
  if (n_cells < 4) throw InvalidArgument("grid needs at least 4 cells");
}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_cells()) {
    throw GridMismatch("value count does not match the grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("field values must be finite");
  }
}

Field::Field(Grid grid, double value) : Field(grid, std::vector<double>(grid.n_cells(), value)) {}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::sup_norm() const { return std::max(std::abs(min()), std::abs(max())); }

double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

namespace {

template <typename Op>
double integrate_pointwise(const Field& u, const Field& v, Op op) {
  require_same_grid(u, v);
  std::vector<double> terms(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) terms[j] = op(u[j] - v[j]);
  return compensated_sum(terms) / static_cast<double>(u.size());
}

}  // namespace

double l1_distance(const Field& u, const Field& v) {
  return integrate_pointwise(u, v, [](double d) { return std::abs(d); });
}

double positive_part_distance(const Field& u, const Field& v) {
  return integrate_pointwise(u, v, [](double d) { return d > 0.0 ? d : 0.0; });
}

double mean(const Field& u) { return compensated_sum(u.values()) / static_cast<double>(u.size()); }

double total_variation(const Field& u) {
  const std::size_t n = u.size();
  std::vector<double> jumps(n);
  for (std::size_t j = 0; j < n; ++j) jumps[j] = std::abs(u[(j + 1) % n] - u[j]);
  return compensated_sum(jumps);
}

Field shift(const Field& u, std::int64_t cells) {
  const std::size_t n = u.size();
  const std::size_t k = wrap(cells, n);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[(j + k) % n] = u[j];
  return Field(u.grid(), std::move(out));
}

ShiftMatch best_shift(const Field& u, const Field& v) {
  require_same_grid(u, v);
  const std::size_t n = u.size();
  ShiftMatch best{0, std::numeric_limits<double>::infinity()};
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) terms[j] = std::abs(u[j] - v[(j + n - k) % n]);
    const double d = compensated_sum(terms) / static_cast<double>(n);
    if (d < best.distance) best = {static_cast<std::int64_t>(k), d};
  }
  return best;
}

}  // namespace degenwave
