#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace degenwave {

/// Uniform periodic grid on the unit circle. Cell j covers [j dx, (j+1) dx).
class Grid {
 public:
  explicit Grid(std::size_t n_cells);

  std::size_t n_cells() const noexcept { return n_; }
  double dx() const noexcept { return 1.0 / static_cast<double>(n_); }
  double center(std::size_t j) const noexcept {
    return (static_cast<double>(j) + 0.5) / static_cast<double>(n_);
  }
  double left_edge(std::size_t j) const noexcept {
    return static_cast<double>(j) / static_cast<double>(n_);
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t n_;
};

/// Cell averages of a periodic function on a Grid.
class Field {
 public:
  Field(Grid grid, std::vector<double> values);
  /// Constant field.
  Field(Grid grid, double value);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }

  double min() const;
  double max() const;
  /// max(|min|, |max|).
  double sup_norm() const;

  bool operator==(const Field&) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Neumaier-compensated sum; order-fixed, hence deterministic.
double compensated_sum(std::span<const double> values) noexcept;

/// Integral of |u - v| over the circle.
double l1_distance(const Field& u, const Field& v);
/// Integral of (u - v)^+ over the circle.
double positive_part_distance(const Field& u, const Field& v);
double mean(const Field& u);
/// Periodic total variation sum_j |u_{j+1} - u_j|.
double total_variation(const Field& u);

/// Circular shift to the right: shift(u, k)_j = u_{j - k}.
Field shift(const Field& u, std::int64_t cells);

struct ShiftMatch {
  std::int64_t cells = 0;
  double distance = 0.0;
};

/// Shift k in [0, n) minimising l1_distance(u, shift(v, k)); smallest k wins
/// ties. Exhaustive O(n^2) scan.
ShiftMatch best_shift(const Field& u, const Field& v);

}  // namespace degenwave
