#pragma once

// Row selection: squared-norm weighted sampling (alias method), rejection
// sampling against a norm bound, and the diagonal reweighting that turns
// uniform sampling into norm-weighted sampling.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tark/linalg.hpp"
#include "tark/rng.hpp"

namespace tark {

/// O(1) draws from P{i} = w_i / sum(w) using Vose's alias tables.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights);

  std::size_t sample(Rng& rng) const {
    const std::size_t column = rng.below(threshold_.size());
    return rng.uniform() < threshold_[column] ? column : alias_[column];
  }

  std::size_t size() const { return threshold_.size(); }
  double total() const { return total_; }

  /// Probability of index i reconstructed from the alias tables.
  std::vector<double> table_probabilities() const;

 private:
  std::vector<double> threshold_;
  std::vector<std::size_t> alias_;
  double total_ = 0.0;
};

inline WeightedSampler build_sampler(std::span<const double> row_sq_norms) {
  return WeightedSampler(row_sq_norms);
}

/// One draw from a continuous or finite row source.
struct OracleRow {
  Vector features;   // a(u)
  double response;   // b(u)
  double sq_norm;    // ||a(u)||^2
  double point;      // u (or the row index for finite sources)
};

/// Abstract row source for semi-infinite problems. draw() returns rows
/// already distributed proportionally to ||a(u)||^2 under the base measure.
class RowOracle {
 public:
  virtual ~RowOracle() = default;
  virtual OracleRow draw(Rng& rng) = 0;
  virtual std::size_t dim() const = 0;
  /// Upper bound on sup_u ||a(u)||^2.
  virtual double norm_bound() const = 0;
  /// Integral of ||a(u)||^2 over the base measure.
  virtual double frob_sq() const = 0;
};

/// Rejection sampler: `draw(rng)` proposes candidates from the base measure
/// (any type with a `sq_norm` member); a candidate is accepted when
/// u * norm_bound < sq_norm. A candidate above the bound is a caller error.
template <class Provider>
auto rejection_sample(double norm_bound, Provider&& draw, Rng& rng,
                      std::size_t max_attempts = std::size_t{1} << 26,
                      std::size_t* attempts_out = nullptr) {
  if (!(norm_bound > 0.0)) throw std::invalid_argument("rejection_sample: norm_bound must be > 0");
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    auto candidate = draw(rng);
    if (candidate.sq_norm > norm_bound * (1.0 + 1e-12)) {
      throw std::domain_error("rejection_sample: candidate norm exceeds the supplied bound");
    }
    if (rng.uniform() * norm_bound < candidate.sq_norm) {
      if (attempts_out) *attempts_out = attempt;
      return candidate;
    }
  }
  throw NumericalError("rejection_sample: no candidate accepted");
}

struct ReweightedProblem {
  LeastSquaresProblem problem;
  std::vector<std::size_t> kept_rows;
  std::size_t dropped_rows = 0;
};

/// Scales every row of (A, b) by 1/||a_i||. Zero rows are dropped and counted.
/// The least-squares solution of the result generally differs from the input's.
ReweightedProblem diag_reweight(const LeastSquaresProblem& problem);

}  // namespace tark
