#pragma once

// Shared iteration loops. A `Step` callable performs one update of x in place
// (drawing whatever rows it needs from rng) and returns the number of rows it
// accessed.

#include <algorithm>
#include <cstddef>
#include <span>

#include "tark/kaczmarz.hpp"
#include "tark/linalg.hpp"

namespace tark::detail {

/// x <- x + relax * (b_i - <row, x>) / ||row||^2 * row
inline void project_onto_row(std::span<double> x, std::span<const double> row, double b_i,
                             double row_sq_norm, double relax) {
  const double coef = relax * ((b_i - dot(row, x)) / row_sq_norm);
  axpy(coef, row, x);
}

class CheckpointCursor {
 public:
  explicit CheckpointCursor(const Trace& trace) : trace_(trace) {}

  /// Emits once if at least one pending checkpoint is <= rows. The estimate
  /// is only materialized when needed.
  template <class Estimate>
  void advance(std::size_t rows, Estimate&& estimate) {
    if (!trace_.active()) return;
    bool due = false;
    while (next_ < trace_.checkpoints.size() && trace_.checkpoints[next_] <= rows) {
      due = true;
      ++next_;
    }
    if (due) {
      const Vector& v = estimate();
      trace_.sink(rows, v);
    }
  }

 private:
  const Trace& trace_;
  std::size_t next_ = 0;
};

template <class Step>
Vector iterate_plain(std::span<const double> x0, std::size_t steps, Rng& rng, const Trace& trace,
                     Step&& step) {
  Vector x(x0.begin(), x0.end());
  CheckpointCursor cursor(trace);
  std::size_t rows = 0;
  cursor.advance(rows, [&]() -> const Vector& { return x; });
  for (std::size_t s = 0; s < steps; ++s) {
    rows += step(std::span<double>(x), rng);
    cursor.advance(rows, [&]() -> const Vector& { return x; });
  }
  return x;
}

/// Runs t - 1 steps, feeding x_0..x_{t-1} to the averager. Checkpoints report
/// the running tail average once it covers at least one iterate, and the
/// current iterate before that.
template <class Step>
Vector iterate_averaged(std::span<const double> x0, TailAverager averager, std::size_t t, Rng& rng,
                        const Trace& trace, Step&& step) {
  Vector x(x0.begin(), x0.end());
  CheckpointCursor cursor(trace);
  Vector snapshot;
  auto estimate = [&]() -> const Vector& {
    if (averager.ready()) {
      snapshot = averager.average();
      return snapshot;
    }
    return x;
  };
  std::size_t rows = 0;
  averager.push(x);
  cursor.advance(rows, estimate);
  for (std::size_t s = 0; s + 1 < t; ++s) {
    rows += step(std::span<double>(x), rng);
    averager.push(x);
    cursor.advance(rows, estimate);
  }
  return averager.average();
}

}  // namespace tark::detail
