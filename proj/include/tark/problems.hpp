#pragma once

// Test problems: noisy polynomial regression, the block-of-ones class with a
// known mean-square-error floor, and a continuous Chebyshev row oracle.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "tark/linalg.hpp"
#include "tark/rng.hpp"
#include "tark/sampling.hpp"

namespace tark {

enum class PolyBasis { Chebyshev, Monomial };

std::string_view to_string(PolyBasis basis);
PolyBasis parse_basis(std::string_view name);

/// f(u) = sin(pi u) exp(-2u) + cos(4 pi u)
double poly_target(double u);

/// T_0(u) .. T_{d-1}(u) by the three-term recurrence.
Vector chebyshev_values(double u, std::size_t d);
/// 1, u, .., u^{d-1}
Vector monomial_values(double u, std::size_t d);
Vector basis_values(PolyBasis basis, double u, std::size_t d);

/// Clenshaw (Chebyshev) or Horner (monomial) evaluation of sum_j c_j phi_j(u).
double eval_poly(std::span<const double> coeffs, PolyBasis basis, double u);

struct PolyRegressionSpec {
  std::size_t n = 100000;
  std::size_t d = 25;
  PolyBasis basis = PolyBasis::Chebyshev;
  double noise_std = 0.2;
  std::uint64_t seed = 0;
};

/// n equally spaced abscissae in [-1, 1], endpoints included (n = 1 gives 0).
double abscissa(std::size_t i, std::size_t n);

/// b_i = f(u_i) + noise_std * N(0, 1). The reference solution is attached
/// unless `attach_reference` is false.
LeastSquaresProblem gen_poly_regression(const PolyRegressionSpec& spec,
                                        bool attach_reference = true);

struct LowerBoundSpec {
  std::size_t d = 3;
  std::size_t m = 10;
  double v = 5.0;
  std::uint64_t seed = 0;
};

/// A is the md x d matrix whose column j is one on rows jm..jm+m-1. Each block
/// of b is g + sqrt(v) gamma 1_m with g ~ N(0, I_m), gamma ~ N(0, 1). The
/// reference solution (block means) is attached in closed form.
LeastSquaresProblem gen_lower_bound_problem(const LowerBoundSpec& spec);
LeastSquaresProblem gen_lower_bound_problem(const LowerBoundSpec& spec, Rng& rng);

/// Smallest achievable mean square error with t revealed entries of b:
/// (d/m^2)(m - t/d)[1 + v(m - t/d)/(1 + v t/d)]
double lower_bound_mse(std::size_t d, std::size_t m, double v, double t);

/// Rows a(u) = (T_0(u), .., T_{d-1}(u)) for u uniform on [-1, 1], responses
/// f(u) plus optional Gaussian noise. Draws are distributed proportionally
/// to ||a(u)||^2 by rejection against the bound d.
class ChebyshevRowOracle final : public RowOracle {
 public:
  explicit ChebyshevRowOracle(std::size_t d, double noise_std = 0.0);

  OracleRow draw(Rng& rng) override;
  std::size_t dim() const override { return d_; }
  double norm_bound() const override { return static_cast<double>(d_); }
  /// (1/2) sum_j int_{-1}^{1} T_j(u)^2 du
  double frob_sq() const override { return frob_sq_; }

  /// Proposals consumed so far (accepted and rejected).
  std::size_t proposals() const { return proposals_; }

 private:
  std::size_t d_;
  double noise_std_;
  double frob_sq_;
  std::size_t proposals_ = 0;
};

/// Dense Gaussian A (n x d), b = A x_true + noise_std * N(0, I) with
/// x_true ~ N(0, I). Reference solution attached.
LeastSquaresProblem gen_gaussian_problem(std::size_t n, std::size_t d, double noise_std, Rng& rng);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t points, Vector& nodes, Vector& weights);

/// argmin_x int (f(u) - sum_j x_j phi_j(u))^2 du over [-1, 1], by quadrature.
Vector continuous_reference(PolyBasis basis, std::size_t d, std::size_t quadrature_points = 256);

}  // namespace tark
