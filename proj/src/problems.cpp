#include "tark/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace tark {

std::string_view to_string(PolyBasis basis) {
  return basis == PolyBasis::Chebyshev ? "chebyshev" : "monomial";
}

PolyBasis parse_basis(std::string_view name) {
  if (name == "chebyshev") return PolyBasis::Chebyshev;
  if (name == "monomial") return PolyBasis::Monomial;
  throw std::invalid_argument("unknown basis: " + std::string(name));
}

double poly_target(double u) {
  using std::numbers::pi;
  return std::sin(pi * u) * std::exp(-2.0 * u) + std::cos(4.0 * pi * u);
}

Vector chebyshev_values(double u, std::size_t d) {
  Vector t(d);
  if (d > 0) t[0] = 1.0;
  if (d > 1) t[1] = u;
  for (std::size_t j = 2; j < d; ++j) t[j] = 2.0 * u * t[j - 1] - t[j - 2];
  return t;
}

Vector monomial_values(double u, std::size_t d) {
  Vector p(d);
  double power = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    p[j] = power;
    power *= u;
  }
  return p;
}

Vector basis_values(PolyBasis basis, double u, std::size_t d) {
  return basis == PolyBasis::Chebyshev ? chebyshev_values(u, d) : monomial_values(u, d);
}

double eval_poly(std::span<const double> coeffs, PolyBasis basis, double u) {
  if (coeffs.empty()) return 0.0;
  if (basis == PolyBasis::Monomial) {
    double acc = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * u + coeffs[j];
    return acc;
  }
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 1;) {
    const double b0 = coeffs[j] + 2.0 * u * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs[0] + u * b1 - b2;
}

double abscissa(std::size_t i, std::size_t n) {
  if (n == 1) return 0.0;
  // Symmetric construction keeps u_i = -u_{n-1-i} exactly.
  const auto half = static_cast<double>(n - 1);
  return (2.0 * static_cast<double>(i) - half) / half;
}

LeastSquaresProblem gen_poly_regression(const PolyRegressionSpec& spec, bool attach_reference) {
  if (spec.d < 1) throw std::invalid_argument("gen_poly_regression: d must be >= 1");
  if (spec.n < spec.d) throw std::invalid_argument("gen_poly_regression: need n >= d");
  if (!(spec.noise_std >= 0.0)) throw std::invalid_argument("gen_poly_regression: noise_std < 0");
  Rng rng(spec.seed);
  std::vector<double> entries;
  entries.reserve(spec.n * spec.d);
  Vector b(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = abscissa(i, spec.n);
    const Vector phi = basis_values(spec.basis, u, spec.d);
    entries.insert(entries.end(), phi.begin(), phi.end());
    b[i] = poly_target(u);
    if (spec.noise_std > 0.0) b[i] += spec.noise_std * rng.normal();
  }
  LeastSquaresProblem problem(DenseMatrix(spec.n, spec.d, std::move(entries)), std::move(b));
  if (attach_reference) problem.attach_reference();
  return problem;
}

LeastSquaresProblem gen_lower_bound_problem(const LowerBoundSpec& spec) {
  Rng rng(spec.seed);
  return gen_lower_bound_problem(spec, rng);
}

LeastSquaresProblem gen_lower_bound_problem(const LowerBoundSpec& spec, Rng& rng) {
  if (spec.d < 1) throw std::invalid_argument("gen_lower_bound_problem: d must be >= 1");
  if (spec.m < 2) throw std::invalid_argument("gen_lower_bound_problem: m must be >= 2");
  if (!(spec.v >= 0.0)) throw std::invalid_argument("gen_lower_bound_problem: v must be >= 0");
  const std::size_t n = spec.d * spec.m;
  std::vector<double> entries(n * spec.d, 0.0);
  Vector b(n);
  Vector means(spec.d);
  double residual_sq = 0.0;
  const double root_v = std::sqrt(spec.v);
  for (std::size_t j = 0; j < spec.d; ++j) {
    const double shared = root_v * rng.normal();
    double block_sum = 0.0;
    for (std::size_t k = 0; k < spec.m; ++k) {
      const std::size_t i = j * spec.m + k;
      entries[i * spec.d + j] = 1.0;
      b[i] = rng.normal() + shared;
      block_sum += b[i];
    }
    means[j] = block_sum / static_cast<double>(spec.m);
    for (std::size_t k = 0; k < spec.m; ++k) {
      const double e = b[j * spec.m + k] - means[j];
      residual_sq += e * e;
    }
  }
  LeastSquaresProblem problem(DenseMatrix(n, spec.d, std::move(entries)), std::move(b));
  problem.reference_solution = std::move(means);
  problem.reference_residual_sq = residual_sq;
  return problem;
}

double lower_bound_mse(std::size_t d, std::size_t m, double v, double t) {
  if (d < 1 || m < 1) throw std::invalid_argument("lower_bound_mse: d and m must be >= 1");
  const auto dd = static_cast<double>(d);
  const auto mm = static_cast<double>(m);
  if (!(t >= 0.0) || t > mm * dd) throw std::invalid_argument("lower_bound_mse: need 0 <= t <= md");
  if (!(v >= 0.0)) throw std::invalid_argument("lower_bound_mse: v must be >= 0");
  const double hidden = mm - t / dd;
  return dd / (mm * mm) * hidden * (1.0 + v * hidden / (1.0 + v * t / dd));
}

LeastSquaresProblem gen_gaussian_problem(std::size_t n, std::size_t d, double noise_std, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_gaussian_problem: empty shape");
  std::vector<double> entries(n * d);
  for (double& v : entries) v = rng.normal();
  Vector x_true(d);
  for (double& v : x_true) v = rng.normal();
  DenseMatrix a(n, d, std::move(entries));
  Vector b = a.multiply(x_true);
  for (double& v : b) v += noise_std * rng.normal();
  LeastSquaresProblem problem(std::move(a), std::move(b));
  problem.attach_reference();
  return problem;
}

// ---------------------------------------------------------------------------

ChebyshevRowOracle::ChebyshevRowOracle(std::size_t d, double noise_std)
    : d_(d), noise_std_(noise_std), frob_sq_(0.0) {
  if (d < 1) throw std::invalid_argument("ChebyshevRowOracle: d must be >= 1");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("ChebyshevRowOracle: noise_std < 0");
  // int T_0^2 = 2, int T_j^2 = 1 - 1/(4j^2 - 1); halved for the probability measure.
  double integral = 2.0;
  for (std::size_t j = 1; j < d; ++j) {
    const auto jj = static_cast<double>(j);
    integral += 1.0 - 1.0 / (4.0 * jj * jj - 1.0);
  }
  frob_sq_ = 0.5 * integral;
}

OracleRow ChebyshevRowOracle::draw(Rng& rng) {
  std::size_t attempts = 0;
  OracleRow row = rejection_sample(
      norm_bound(),
      [this](Rng& r) {
        const double u = 2.0 * r.uniform() - 1.0;
        OracleRow cand{chebyshev_values(u, d_), 0.0, 0.0, u};
        cand.sq_norm = dot(cand.features, cand.features);
        return cand;
      },
      rng, std::size_t{1} << 26, &attempts);
  proposals_ += attempts;
  row.response = poly_target(row.point);
  if (noise_std_ > 0.0) row.response += noise_std_ * rng.normal();
  return row;
}

// ---------------------------------------------------------------------------

namespace {

/// (P_n(x), P_{n-1}(x)) by the Bonnet recurrence, n >= 1.
std::pair<double, double> legendre_pair(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const auto kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

void gauss_legendre(std::size_t points, Vector& nodes, Vector& weights) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  nodes.assign(points, 0.0);
  weights.assign(points, 0.0);
  if (points == 1) {
    weights[0] = 2.0;
    return;
  }
  const auto n = static_cast<double>(points);
  auto derivative = [&](double x) {
    const auto [pn, pm] = legendre_pair(points, x);
    return std::pair{pn, n * (x * pn - pm) / (x * x - 1.0)};
  };
  for (std::size_t i = 0; i < (points + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, dp] = derivative(x);
      const double step = pn / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double dp = derivative(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[points - 1 - i] = x;
    weights[i] = w;
    weights[points - 1 - i] = w;
  }
}

Vector continuous_reference(PolyBasis basis, std::size_t d, std::size_t quadrature_points) {
  if (d < 1) throw std::invalid_argument("continuous_reference: d must be >= 1");
  Vector nodes;
  Vector weights;
  gauss_legendre(quadrature_points, nodes, weights);
  std::vector<double> entries;
  entries.reserve(quadrature_points * d);
  Vector rhs(quadrature_points);
  for (std::size_t q = 0; q < quadrature_points; ++q) {
    const double s = std::sqrt(weights[q]);
    for (double phi : basis_values(basis, nodes[q], d)) entries.push_back(s * phi);
    rhs[q] = s * poly_target(nodes[q]);
  }
  return lstsq_reference(DenseMatrix(quadrature_points, d, std::move(entries)), rhs);
}

}  // namespace tark
