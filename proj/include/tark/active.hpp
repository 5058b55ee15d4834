#pragma once

// Active least squares through preconditioning: thin QR of A, a volume-sampled
// initial estimate on r rows, then TARK on the orthonormal system.

#include <cstddef>
#include <vector>

#include "tark/kaczmarz.hpp"
#include "tark/linalg.hpp"
#include "tark/rng.hpp"

namespace tark {

/// A P = Q R with Q (n x r) orthonormal and R (r x d) upper trapezoidal.
struct QRFactors {
  DenseMatrix q;
  DenseMatrix r;
  std::vector<std::size_t> pivot;  // pivot[j] = original column at position j
  std::size_t rank = 0;
};

QRFactors thin_qr(const DenseMatrix& matrix);

struct VolumeSample {
  std::vector<std::size_t> indices;  // in draw order
};

/// Draws r rows of Q with P(S) proportional to det(Q_S)^2. Sequential
/// projection sampler: pick a row with probability proportional to its
/// remaining leverage, remove that direction from Q, repeat r times.
VolumeSample volume_sample(const DenseMatrix& q, Rng& rng);

struct ActiveResult {
  Vector x;                 // estimate in the original coordinates
  Vector y;                 // tail average in Q coordinates
  Vector y0;                // Q_S^{-1} b_S
  VolumeSample subset;
  std::size_t rank = 0;
  std::size_t entries_accessed = 0;  // r + (t - 1)
  std::size_t resamples = 0;         // subsets rejected as numerically singular
};

/// Trace checkpoints are counted in TARK row accesses and receive estimates
/// in Q coordinates.
ActiveResult run_preconditioned_tark(const LeastSquaresProblem& problem, std::size_t t_b,
                                     std::size_t t, Rng& rng, const Trace& trace = {});

/// Residual inflation factor 1 + (1 - 1/r)^{t_b} r + (2r - 1)/(t - t_b).
double bound_theorem6(std::size_t r, std::size_t t_b, std::size_t t);

/// r + r log(2r/eps) + (4r - 2)/eps
double entry_budget(std::size_t r, double eps);

struct BudgetSchedule {
  std::size_t t_b = 0;
  std::size_t t = 0;
};

/// Integer (t_b, t) for which bound_theorem6 <= 1 + eps.
BudgetSchedule budget_schedule(std::size_t r, double eps);

}  // namespace tark
