#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the solver code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tark/linalg.hpp"

namespace oracle {

/// Number of eigenvalues of symmetric g (k x k, row-major) below `shift`,
/// from the signs of the pivots of an unpivoted LDL^T of g - shift I.
inline int count_below(const std::vector<long double>& g, int k, long double shift) {
  std::vector<long double> m(g);
  for (int i = 0; i < k; ++i) m[i * k + i] -= shift;
  int negatives = 0;
  for (int p = 0; p < k; ++p) {
    long double pivot = m[p * k + p];
    if (pivot == 0.0L) pivot = -1e-30L;
    if (pivot < 0.0L) ++negatives;
    for (int i = p + 1; i < k; ++i) {
      const long double f = m[i * k + p] / pivot;
      for (int j = p + 1; j < k; ++j) m[i * k + j] -= f * m[p * k + j];
    }
  }
  return negatives;
}

/// Singular values (descending) of a small matrix by bisection on the
/// eigenvalues of A^T A formed in extended precision.
inline std::vector<double> singular_values_bisection(const tark::DenseMatrix& a) {
  const int k = static_cast<int>(a.cols());
  std::vector<long double> g(static_cast<std::size_t>(k * k), 0.0L);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        g[i * k + j] += static_cast<long double>(a(r, i)) * static_cast<long double>(a(r, j));
      }
    }
  }
  long double hi = 0.0L;
  for (long double v : g) hi += std::fabs(v);
  hi += 1.0L;
  std::vector<double> out;
  for (int idx = k - 1; idx >= 0; --idx) {
    // idx-th smallest eigenvalue: smallest x with count_below(x) > idx.
    long double lo_b = -1.0L;
    long double hi_b = hi;
    for (int it = 0; it < 200; ++it) {
      const long double mid = 0.5L * (lo_b + hi_b);
      if (count_below(g, k, mid) > idx) {
        hi_b = mid;
      } else {
        lo_b = mid;
      }
    }
    const long double lambda = 0.5L * (lo_b + hi_b);
    out.push_back(static_cast<double>(std::sqrt(std::max(0.0L, lambda))));
  }
  return out;
}

/// det(M)^2 for the r x r submatrix of q on `rows` (r <= 3), by cofactors.
inline double det_sq(const tark::DenseMatrix& q, const std::vector<std::size_t>& rows) {
  const std::size_t r = rows.size();
  auto at = [&](std::size_t i, std::size_t j) { return q(rows[i], j); };
  double det = 0.0;
  if (r == 1) {
    det = at(0, 0);
  } else if (r == 2) {
    det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  } else if (r == 3) {
    det = at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
          at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
          at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  }
  return det * det;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

/// Upper-tail probability of the chi-square distribution.
inline double chi_square_p(double statistic, double dof) {
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

/// Pearson statistic and p-value for observed counts against probabilities.
/// Cells with zero probability must have zero counts (else p = 0).
inline double chi_square_test(const std::vector<double>& probs, const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(c);
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (counts[i] != 0) return 0.0;
      continue;
    }
    const double expected = probs[i] * total;
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
    ++cells;
  }
  if (cells < 2) return 1.0;
  return chi_square_p(stat, cells - 1);
}

/// Asymptotic Kolmogorov-Smirnov p-value with the Stephens small-sample
/// correction.
inline double kolmogorov_p(double d_stat, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d_stat;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// KS distance between a sample and a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n - 1.0;
  return {mean, std::sqrt(var / n)};
}

/// Tail average of a stored trajectory, summed in extended precision.
inline tark::Vector store_all_average(const std::vector<tark::Vector>& iterates, std::size_t t_b,
                                      std::size_t t) {
  const std::size_t d = iterates.front().size();
  std::vector<long double> sum(d, 0.0L);
  for (std::size_t s = t_b; s < t; ++s) {
    for (std::size_t j = 0; j < d; ++j) sum[j] += iterates[s][j];
  }
  tark::Vector out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(sum[j] / static_cast<long double>(t - t_b));
  return out;
}

}  // namespace oracle
