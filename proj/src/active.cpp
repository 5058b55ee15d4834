#include "tark/active.hpp"

#include <cmath>
#include <stdexcept>

namespace tark {

namespace {

constexpr std::size_t max_subset_retries = 64;

}  // namespace

QRFactors thin_qr(const DenseMatrix& matrix) {
  if (!matrix.all_finite()) throw NumericalError("thin_qr: non-finite entries");
  const PivotedQR qr(matrix);
  if (qr.rank() == 0) throw NumericalError("thin_qr: matrix is numerically zero");
  return QRFactors{qr.thin_q(), qr.r_factor(), qr.permutation(), qr.rank()};
}

VolumeSample volume_sample(const DenseMatrix& q, Rng& rng) {
  const std::size_t n = q.rows();
  const std::size_t r = q.cols();
  if (n < r) throw std::invalid_argument("volume_sample: need n >= r");
  std::vector<double> basis(q.data().begin(), q.data().end());
  std::vector<double> leverage(n);
  std::vector<bool> taken(n, false);
  VolumeSample out;
  out.indices.reserve(r);

  for (std::size_t k = 0; k < r; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      if (!taken[i]) {
        for (std::size_t j = 0; j < r; ++j) s += basis[i * r + j] * basis[i * r + j];
      }
      leverage[i] = s;
      total += s;
    }
    // Remaining leverage is exactly r - k for orthonormal Q.
    if (total < 0.5) throw std::invalid_argument("volume_sample: Q has rank below its width");

    double target = rng.uniform() * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (leverage[i] <= 0.0) continue;
      pick = i;
      if (target < leverage[i]) break;
      target -= leverage[i];
    }
    taken[pick] = true;
    out.indices.push_back(pick);

    // Remove the chosen row's direction u from every row: B <- B - (B u) u^T.
    Vector u(basis.begin() + static_cast<std::ptrdiff_t>(pick * r),
             basis.begin() + static_cast<std::ptrdiff_t>((pick + 1) * r));
    const double un = norm2(u);
    for (double& v : u) v /= un;
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> row(basis.data() + i * r, r);
      const double c = dot(row, u);
      axpy(-c, u, row);
    }
  }
  return out;
}

ActiveResult run_preconditioned_tark(const LeastSquaresProblem& problem, std::size_t t_b,
                                     std::size_t t, Rng& rng, const Trace& trace) {
  if (t < 1 || t_b >= t) throw std::invalid_argument("run_preconditioned_tark: need t_b < t");
  const QRFactors f = thin_qr(problem.matrix);
  const std::size_t r = f.rank;

  ActiveResult result;
  result.rank = r;
  const double pivot_tol = 1e-12 * static_cast<double>(r);
  for (;;) {
    result.subset = volume_sample(f.q, rng);
    std::vector<double> sub(r * r);
    Vector b_sub(r);
    for (std::size_t k = 0; k < r; ++k) {
      const std::size_t i = result.subset.indices[k];
      for (std::size_t j = 0; j < r; ++j) sub[k * r + j] = f.q(i, j);
      b_sub[k] = problem.rhs[i];
    }
    if (auto y0 = lu_solve(DenseMatrix(r, r, std::move(sub)), b_sub, pivot_tol)) {
      result.y0 = std::move(*y0);
      break;
    }
    if (++result.resamples > max_subset_retries) {
      throw NumericalError("run_preconditioned_tark: every sampled subset was singular");
    }
  }

  const LeastSquaresProblem pre(f.q, problem.rhs);
  result.y = run_tark(pre, result.y0, t_b, t, rng, trace);
  result.entries_accessed = r + (t - 1);

  const Vector z = r == problem.cols() ? back_substitute(f.r, result.y, r)
                                       : min_norm_solve_wide(f.r, result.y);
  result.x.assign(problem.cols(), 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) result.x[f.pivot[j]] = z[j];
  return result;
}

double bound_theorem6(std::size_t r, std::size_t t_b, std::size_t t) {
  if (r < 1) throw std::invalid_argument("bound_theorem6: r must be >= 1");
  if (t_b >= t) throw std::invalid_argument("bound_theorem6: need t_b < t");
  const auto rr = static_cast<double>(r);
  return 1.0 + std::pow(1.0 - 1.0 / rr, static_cast<double>(t_b)) * rr +
         (2.0 * rr - 1.0) / static_cast<double>(t - t_b);
}

double entry_budget(std::size_t r, double eps) {
  if (r < 1) throw std::invalid_argument("entry_budget: r must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("entry_budget: eps must be > 0");
  const auto rr = static_cast<double>(r);
  return rr + rr * std::log(2.0 * rr / eps) + (4.0 * rr - 2.0) / eps;
}

BudgetSchedule budget_schedule(std::size_t r, double eps) {
  if (r < 1) throw std::invalid_argument("budget_schedule: r must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("budget_schedule: eps must be > 0");
  const auto rr = static_cast<double>(r);
  BudgetSchedule s;
  // (1 - 1/r)^{t_b} r <= exp(-t_b / r) r <= eps / 2
  s.t_b = static_cast<std::size_t>(std::ceil(std::max(0.0, rr * std::log(2.0 * rr / eps))));
  // (2r - 1)/(t - t_b) <= eps / 2
  s.t = s.t_b + static_cast<std::size_t>(std::ceil((4.0 * rr - 2.0) / eps)) + 1;
  return s;
}

}  // namespace tark
