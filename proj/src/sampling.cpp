#include "tark/sampling.hpp"

#include <cmath>

namespace tark {

WeightedSampler::WeightedSampler(std::span<const double> weights)
    : threshold_(weights.size(), 0.0), alias_(weights.size(), 0) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("WeightedSampler: no weights");
  std::size_t some_positive = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("WeightedSampler: weights must be finite and >= 0");
    }
    total_ += w;
    if (w > 0.0 && some_positive == n) some_positive = i;
  }
  if (!(total_ > 0.0)) throw std::invalid_argument("WeightedSampler: all weights are zero");

  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total_;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t l : large) {
    threshold_[l] = 1.0;
    alias_[l] = l;
  }
  // Leftovers here come from rounding; a zero-weight row must still never win.
  for (std::size_t s : small) {
    if (weights[s] > 0.0) {
      threshold_[s] = 1.0;
      alias_[s] = s;
    } else {
      threshold_[s] = 0.0;
      alias_[s] = some_positive;
    }
  }
}

std::vector<double> WeightedSampler::table_probabilities() const {
  const std::size_t n = threshold_.size();
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] += threshold_[i];
    p[alias_[i]] += 1.0 - threshold_[i];
  }
  for (double& v : p) v /= static_cast<double>(n);
  return p;
}

ReweightedProblem diag_reweight(const LeastSquaresProblem& problem) {
  const DenseMatrix& a = problem.matrix;
  std::vector<double> entries;
  Vector rhs;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double sq = a.row_sq_norm(i);
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (double v : a.row(i)) entries.push_back(v * inv);
    rhs.push_back(problem.rhs[i] * inv);
    kept.push_back(i);
  }
  if (kept.empty()) throw std::invalid_argument("diag_reweight: all rows are zero");
  const std::size_t dropped = a.rows() - kept.size();
  return ReweightedProblem{
      LeastSquaresProblem(DenseMatrix(kept.size(), a.cols(), std::move(entries)), std::move(rhs)),
      std::move(kept), dropped};
}

}  // namespace tark
