#pragma once

// Staircase path sums shared by the lattice, semi-discrete and coupling
// modules.
//
// A staircase on a (columns x rows) grid starts at cell (0, 0), ends at
// (cols - 1, rows - 1) and moves one column right or one row up per step.
// Entering cell (i, j) from the left adds h(i, j); entering it from below
// adds v(i, j).  The accumulated value over paths is
//
//   D(i, j) = D(i - 1, j) * h(i, j)  (+)  D(i, j - 1) * v(i, j)
//
// in either the log-sum-exp or the max-plus semiring.  The state is one
// column of `rows` values, so columns can be produced on the fly.
//
//  * lattice polymer: h = v = beta * W(i, j)  (every visited cell counts once)
//  * semi-discrete:   h = beta * dB^j(k), v = 0 (jumping rows is free)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "kpzlab/errors.hpp"

namespace kpz {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == kNegInf) return kNegInf;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct LogSumExp {
  static double combine(double a, double b) { return log_add_exp(a, b); }
};

struct MaxPlus {
  static double combine(double a, double b) { return std::max(a, b); }
};

/// Column-streaming staircase accumulator.
template <class Semiring>
class Staircase {
 public:
  explicit Staircase(std::size_t rows) : state_(rows, kNegInf) {
    if (rows == 0) throw DomainError("staircase needs at least one row");
  }

  /// Cell weights: h = v = w.
  void push_cells(std::span<const double> w) {
    check(w.size());
    double below = kNegInf;
    for (std::size_t j = 0; j < state_.size(); ++j) {
      const double left = first_ && j == 0 ? 0.0 : state_[j];
      below = Semiring::combine(left, below) + w[j];
      state_[j] = below;
    }
    first_ = false;
  }

  /// Row-step weights: h = w, v = 0.
  void push_steps(std::span<const double> w) {
    check(w.size());
    double below = kNegInf;
    for (std::size_t j = 0; j < state_.size(); ++j) {
      const double left = (first_ && j == 0 ? 0.0 : state_[j]) + w[j];
      below = Semiring::combine(left, below);
      state_[j] = below;
    }
    first_ = false;
  }

  /// Value of the best/summed staircase ending in the top row of the
  /// last pushed column.
  double value() const { return state_.back(); }
  std::span<const double> column() const { return state_; }
  std::size_t rows() const { return state_.size(); }

 private:
  void check(std::size_t n) const {
    if (n != state_.size()) throw DomainError("staircase column has wrong length");
  }

  std::vector<double> state_;
  bool first_ = true;
};

/// Dense column-major (cols x rows) matrix; column i is contiguous.
/// Lattice disorder uses i = horizontal coordinate (time, 0..N-1) and
/// j = vertical coordinate (row, 0..n-1).
class DisorderField {
 public:
  DisorderField() = default;
  DisorderField(std::size_t cols, std::size_t rows, double fill = 0.0)
      : cols_(cols), rows_(rows), data_(cols * rows, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * rows_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * rows_ + j]; }

  std::span<const double> column(std::size_t i) const {
    return {data_.data() + i * rows_, rows_};
  }
  std::span<double> column(std::size_t i) { return {data_.data() + i * rows_, rows_}; }

  std::size_t cols() const { return cols_; }
  std::size_t rows() const { return rows_; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> data_;
};

/// log C(a + b, b) via lgamma.
inline double log_binomial(double a_plus_b, double b) {
  return std::lgamma(a_plus_b + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a_plus_b - b + 1.0);
}

}  // namespace kpz
