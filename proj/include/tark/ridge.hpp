#pragma once

// Ridge regression with Kaczmarz-type methods: RK with weight decay (RK-RR),
// its tail-averaged form (TARK-RR), the augmented-system reduction, and the
// dual-variable RK baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "tark/kaczmarz.hpp"
#include "tark/linalg.hpp"
#include "tark/rng.hpp"

namespace tark {

/// lambda = (1 - mu) / mu * ||A||_F^2
double mu_to_lambda(double mu, double frob_sq);
/// mu = ||A||_F^2 / (||A||_F^2 + lambda)
double lambda_to_mu(double lambda, double frob_sq);

struct RidgeConfig {
  double mu = 0.999;
  std::size_t t = 1;
  std::optional<std::size_t> t_b;  // default floor(t / 4)
  std::uint64_t seed = 0;

  double lambda(double frob_sq) const { return mu_to_lambda(mu, frob_sq); }
  std::size_t burn_in() const { return t_b.value_or(t / 4); }
};

/// Projection onto the sampled row followed by weight decay x <- mu * x.
Vector rkrr_step(std::span<const double> x, std::span<const double> row, double b_i, double mu);

/// RK-RR for `steps` row accesses; converges to x_mu up to a finite horizon.
/// mu = 1 is accepted and reproduces run_rk bit for bit.
Vector run_rkrr(const LeastSquaresProblem& problem, double mu, std::span<const double> x0,
                std::size_t steps, Rng& rng, const Trace& trace = {});

/// TARK-RR: mean of the RK-RR iterates x_{t_b}..x_{t-1}.
Vector run_tark_rr(const LeastSquaresProblem& problem, double mu, std::span<const double> x0,
                   std::size_t t_b, std::size_t t, Rng& rng, const Trace& trace = {});

/// [A; sqrt(lambda) I] and [b; 0]. Its least-squares solution is x_mu.
LeastSquaresProblem augmented_problem(const LeastSquaresProblem& problem, double lambda);

/// Dual RK: RK on the consistent system [A, sqrt(lambda) I_n] w = b, keeping
/// y in R^n and x = A^T y. Per step, for i drawn with probability
/// proportional to ||a_i||^2 + lambda:
///   delta = (b_i - <a_i, x> - lambda y_i) / (||a_i||^2 + lambda)
///   y_i += delta,  x += delta a_i
/// Starts from y = 0. Fixed point (A A^T + lambda I) y = b, x = x_mu.
Vector run_dual_rk(const LeastSquaresProblem& problem, double lambda, std::size_t steps, Rng& rng,
                   const Trace& trace = {});

/// RK-RR horizon bound:
/// 2 [mu^2 (1 - kappa^-2)]^t init + 2 mu / ((1 + mu) lambda) ||b - A x_mu||^2
double bound_theorem4(double kappa_dem, double mu, double lambda, double init_err_sq,
                      double residual_mu_sq, std::size_t t);

/// TARK-RR bound:
/// 2 [mu^2 (1 - kappa^-2)]^{t_b} init + 2 mu / ((t - t_b)(1 - mu) lambda) ||b - A x_mu||^2
double bound_theorem5(double kappa_dem, double mu, double lambda, double init_err_sq,
                      double residual_mu_sq, std::size_t t_b, std::size_t t);

}  // namespace tark
