#include "tark/ridge.hpp"

#include <cmath>
#include <stdexcept>

#include "tark/detail/engine.hpp"
#include "tark/sampling.hpp"

namespace tark {

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in (0, 1]");
}

struct RkrrStep {
  const LeastSquaresProblem& problem;
  const WeightedSampler& sampler;
  double mu;

  std::size_t operator()(std::span<double> x, Rng& rng) const {
    const std::size_t i = sampler.sample(rng);
    detail::project_onto_row(x, problem.matrix.row(i), problem.rhs[i],
                             problem.matrix.row_sq_norm(i), 1.0);
    for (double& v : x) v *= mu;
    return 1;
  }
};

double decayed_contraction(double kappa_dem, double mu) {
  return mu * mu * std::max(0.0, 1.0 - 1.0 / (kappa_dem * kappa_dem));
}

}  // namespace

double mu_to_lambda(double mu, double frob_sq) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu_to_lambda: mu must be in (0, 1)");
  if (!(frob_sq > 0.0)) throw std::invalid_argument("mu_to_lambda: frob_sq must be > 0");
  return (1.0 - mu) / mu * frob_sq;
}

double lambda_to_mu(double lambda, double frob_sq) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda_to_mu: lambda must be > 0");
  if (!(frob_sq > 0.0)) throw std::invalid_argument("lambda_to_mu: frob_sq must be > 0");
  return frob_sq / (frob_sq + lambda);
}

Vector rkrr_step(std::span<const double> x, std::span<const double> row, double b_i, double mu) {
  check_mu(mu);
  Vector out = rk_step(x, row, b_i);
  for (double& v : out) v *= mu;
  return out;
}

Vector run_rkrr(const LeastSquaresProblem& problem, double mu, std::span<const double> x0,
                std::size_t steps, Rng& rng, const Trace& trace) {
  check_mu(mu);
  if (x0.size() != problem.cols()) throw std::invalid_argument("run_rkrr: wrong x0 length");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_plain(x0, steps, rng, trace, RkrrStep{problem, sampler, mu});
}

Vector run_tark_rr(const LeastSquaresProblem& problem, double mu, std::span<const double> x0,
                   std::size_t t_b, std::size_t t, Rng& rng, const Trace& trace) {
  check_mu(mu);
  if (x0.size() != problem.cols()) throw std::invalid_argument("run_tark_rr: wrong x0 length");
  if (t < 1 || t_b >= t) throw std::invalid_argument("run_tark_rr: need 0 <= t_b < t");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_averaged(x0, TailAverager::fixed(x0.size(), t_b), t, rng, trace,
                                  RkrrStep{problem, sampler, mu});
}

LeastSquaresProblem augmented_problem(const LeastSquaresProblem& problem, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("augmented_problem: lambda must be > 0");
  const DenseMatrix& a = problem.matrix;
  const std::size_t n = a.rows();
  const std::size_t d = a.cols();
  std::vector<double> entries(a.data().begin(), a.data().end());
  entries.resize((n + d) * d, 0.0);
  const double root = std::sqrt(lambda);
  for (std::size_t j = 0; j < d; ++j) entries[(n + j) * d + j] = root;
  Vector rhs = problem.rhs;
  rhs.resize(n + d, 0.0);
  return LeastSquaresProblem(DenseMatrix(n + d, d, std::move(entries)), std::move(rhs));
}

Vector run_dual_rk(const LeastSquaresProblem& problem, double lambda, std::size_t steps, Rng& rng,
                   const Trace& trace) {
  if (!(lambda > 0.0)) throw std::invalid_argument("run_dual_rk: lambda must be > 0");
  const DenseMatrix& a = problem.matrix;
  std::vector<double> weights(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) weights[i] = a.row_sq_norm(i) + lambda;
  const WeightedSampler sampler(weights);
  Vector y(a.rows(), 0.0);
  const Vector x0(a.cols(), 0.0);
  return detail::iterate_plain(x0, steps, rng, trace, [&](std::span<double> x, Rng& r) {
    const std::size_t i = sampler.sample(r);
    const auto row = a.row(i);
    const double delta = (problem.rhs[i] - dot(row, x) - lambda * y[i]) / weights[i];
    y[i] += delta;
    axpy(delta, row, x);
    return std::size_t{1};
  });
}

double bound_theorem4(double kappa_dem, double mu, double lambda, double init_err_sq,
                      double residual_mu_sq, std::size_t t) {
  return 2.0 * std::pow(decayed_contraction(kappa_dem, mu), static_cast<double>(t)) * init_err_sq +
         2.0 * mu / ((1.0 + mu) * lambda) * residual_mu_sq;
}

double bound_theorem5(double kappa_dem, double mu, double lambda, double init_err_sq,
                      double residual_mu_sq, std::size_t t_b, std::size_t t) {
  if (t_b >= t) throw std::invalid_argument("bound_theorem5: need t_b < t");
  const auto tail = static_cast<double>(t - t_b);
  return 2.0 * std::pow(decayed_contraction(kappa_dem, mu), static_cast<double>(t_b)) *
             init_err_sq +
         2.0 * mu / (tail * (1.0 - mu) * lambda) * residual_mu_sq;
}

}  // namespace tark
