#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "tark/problems.hpp"
#include "tark/rng.hpp"
#include "tark/sampling.hpp"

using namespace tark;

TEST_CASE("splitmix64 and xoshiro256** reference outputs") {
  // Values from an independent implementation of both generators.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);

  Rng rng(42);
  CHECK(rng() == 0x15780b2e0c2ec716ULL);
  CHECK(rng() == 0x6104d9866d113a7eULL);
  CHECK(rng() == 0xae17533239e499a1ULL);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m) {
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(7, {m, t}));
  }
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(8, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
}

TEST_CASE("Rng primitives") {
  Rng rng(3);
  SUBCASE("uniform stays in [0, 1)") {
    for (int i = 0; i < 100000; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
  }
  SUBCASE("below is uniform") {
    std::vector<std::size_t> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
    CHECK(oracle::chi_square_test(std::vector<double>(7, 1.0 / 7.0), counts) > 1e-6);
    CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
  }
  SUBCASE("normal moments") {
    std::vector<double> z(200000);
    for (double& v : z) v = rng.normal();
    const auto [mean, se] = oracle::mean_se(z);
    CHECK(std::abs(mean) < 5.0 * se);
    std::vector<double> sq(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) sq[i] = z[i] * z[i];
    const auto [m2, se2] = oracle::mean_se(sq);
    CHECK(std::abs(m2 - 1.0) < 5.0 * se2);
  }
}

TEST_CASE("alias tables reproduce the weights") {
  SUBCASE("exact table probabilities") {
    const std::vector<std::vector<double>> cases = {
        {1.0}, {9.0, 16.0}, {1.0, 2.0, 3.0, 4.0}, {0.0, 5.0, 0.0, 5.0}, {1e-8, 1.0, 1e8, 3.5, 0.25}};
    for (const auto& w : cases) {
      double total = 0.0;
      for (double v : w) total += v;
      const WeightedSampler s(w);
      const std::vector<double> p = s.table_probabilities();
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(p[i] == doctest::Approx(w[i] / total).epsilon(1e-12));
      CHECK(s.total() == doctest::Approx(total));
    }
  }
  SUBCASE("two rows 9 and 16") {
    const std::vector<double> w{9.0, 16.0};
    const WeightedSampler s(w);
    Rng rng(11);
    std::size_t hits = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) hits += s.sample(rng) == 1 ? 1 : 0;
    CHECK(std::abs(static_cast<double>(hits) / draws - 0.64) < 0.005);
  }
  SUBCASE("chi-square on random weights, zero weights never drawn") {
    Rng gen(5);
    for (int c = 0; c < 5; ++c) {
      std::vector<double> w(12);
      for (double& v : w) v = gen.uniform() < 0.2 ? 0.0 : gen.uniform() * 3.0;
      w[3] = 1.0;
      double total = 0.0;
      for (double v : w) total += v;
      std::vector<double> p(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] / total;
      const WeightedSampler s(w);
      std::vector<std::size_t> counts(w.size(), 0);
      Rng rng(100 + c);
      for (int i = 0; i < 200000; ++i) ++counts[s.sample(rng)];
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) CHECK(counts[i] == 0);
      }
      CHECK(oracle::chi_square_test(p, counts) > 1e-6);
    }
  }
  SUBCASE("invalid weights") {
    CHECK_THROWS_AS(WeightedSampler(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSampler(std::vector<double>{0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSampler(std::vector<double>{1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSampler(std::vector<double>{1.0, NAN}), std::invalid_argument);
  }
}

namespace {

struct Candidate {
  std::size_t index;
  double sq_norm;
};

}  // namespace

TEST_CASE("rejection sampling") {
  SUBCASE("two-row provider with norms 1 and 3") {
    auto provider = [](Rng& r) {
      const std::size_t i = r.below(2);
      return Candidate{i, i == 0 ? 1.0 : 3.0};
    };
    Rng rng(21);
    std::vector<std::size_t> counts(2, 0);
    for (int i = 0; i < 100000; ++i) ++counts[rejection_sample(3.0, provider, rng).index];
    CHECK(oracle::chi_square_test({0.25, 0.75}, counts) > 1e-6);
    CHECK(std::abs(static_cast<double>(counts[1]) / 1e5 - 0.75) < 0.01);
  }
  SUBCASE("constant norms accept the first candidate") {
    auto provider = [](Rng& r) { return Candidate{r.below(5), 2.0}; };
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      std::size_t attempts = 0;
      rejection_sample(2.0, provider, rng, 10, &attempts);
      CHECK(attempts == 1);
    }
  }
  SUBCASE("errors") {
    Rng rng(1);
    auto over = [](Rng&) { return Candidate{0, 4.0}; };
    CHECK_THROWS_AS(rejection_sample(3.0, over, rng), std::domain_error);
    CHECK_THROWS_AS(rejection_sample(0.0, over, rng), std::invalid_argument);
    auto zero = [](Rng&) { return Candidate{0, 0.0}; };
    CHECK_THROWS_AS(rejection_sample(1.0, zero, rng, 50), NumericalError);
  }
}

namespace {

/// CDF of the density proportional to sum_j cos(j acos u)^2 on [-1, 1],
/// tabulated by the trapezoid rule.
struct ChebyshevCdf {
  std::vector<double> grid;
  std::vector<double> cdf;

  explicit ChebyshevCdf(std::size_t d, std::size_t cells = 40000) {
    grid.resize(cells + 1);
    cdf.assign(cells + 1, 0.0);
    auto density = [d](double u) {
      const double theta = std::acos(std::clamp(u, -1.0, 1.0));
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += std::cos(static_cast<double>(j) * theta) * std::cos(static_cast<double>(j) * theta);
      return s;
    };
    const double h = 2.0 / static_cast<double>(cells);
    double prev = density(-1.0);
    grid[0] = -1.0;
    for (std::size_t k = 1; k <= cells; ++k) {
      grid[k] = -1.0 + h * static_cast<double>(k);
      const double cur = density(grid[k]);
      cdf[k] = cdf[k - 1] + 0.5 * h * (prev + cur);
      prev = cur;
    }
    total = cdf.back();
    for (double& c : cdf) c /= total;
  }

  double operator()(double u) const {
    const double pos = (u + 1.0) / 2.0 * static_cast<double>(grid.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
    const double frac = pos - static_cast<double>(k);
    return cdf[k] + frac * (cdf[k + 1] - cdf[k]);
  }

  double total = 0.0;
};

}  // namespace

TEST_CASE("Chebyshev row oracle") {
  SUBCASE("draw distribution against quadrature CDF") {
    for (std::size_t d : {3u, 8u}) {
      ChebyshevRowOracle oracle_rows(d);
      const ChebyshevCdf cdf(d);
      // The quadrature integral over [-1, 1] is twice the stored frob_sq.
      CHECK(oracle_rows.frob_sq() == doctest::Approx(cdf.total / 2.0).epsilon(1e-6));
      Rng rng(77 + d);
      std::vector<double> points(100000);
      for (double& u : points) {
        const OracleRow row = oracle_rows.draw(rng);
        REQUIRE(row.features.size() == d);
        REQUIRE(row.sq_norm <= static_cast<double>(d) * (1.0 + 1e-12));
        u = row.point;
      }
      const double stat = oracle::ks_statistic(points, cdf);
      CHECK(oracle::kolmogorov_p(stat, points.size()) > 1e-6);
      CHECK(oracle_rows.proposals() >= points.size());
    }
  }
  SUBCASE("d = 1 is uniform and features match cos") {
    ChebyshevRowOracle one(1);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) one.draw(rng);
    CHECK(one.proposals() == 100);
    CHECK(one.norm_bound() == 1.0);

    ChebyshevRowOracle five(5);
    for (int i = 0; i < 50; ++i) {
      const OracleRow row = five.draw(rng);
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(row.features[j] == doctest::Approx(std::cos(static_cast<double>(j) * std::acos(row.point))).epsilon(1e-12));
      }
      CHECK(row.response == doctest::Approx(std::sin(std::numbers::pi * row.point) * std::exp(-2.0 * row.point) +
                                            std::cos(4.0 * std::numbers::pi * row.point)));
    }
  }
}

TEST_CASE("diag_reweight") {
  SUBCASE("unit rows, zero rows dropped") {
    const LeastSquaresProblem p(DenseMatrix::from_rows({{3.0, 4.0}, {0.0, 0.0}, {0.0, 2.0}}), Vector{5.0, 1.0, 4.0});
    const ReweightedProblem r = diag_reweight(p);
    CHECK(r.dropped_rows == 1);
    CHECK(r.kept_rows == std::vector<std::size_t>{0, 2});
    CHECK(r.problem.matrix(0, 0) == doctest::Approx(0.6));
    CHECK(r.problem.matrix(0, 1) == doctest::Approx(0.8));
    CHECK(r.problem.rhs[0] == doctest::Approx(1.0));
    CHECK(r.problem.rhs[1] == doctest::Approx(2.0));
    for (std::size_t i = 0; i < r.problem.rows(); ++i) CHECK(r.problem.matrix.row_sq_norm(i) == doctest::Approx(1.0));
  }
  SUBCASE("all zero") {
    const LeastSquaresProblem p(DenseMatrix(2, 2), Vector{1.0, 1.0});
    CHECK_THROWS_AS(diag_reweight(p), std::invalid_argument);
  }
  SUBCASE("consistent systems keep their solution") {
    const DenseMatrix a = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, -1.0}, {0.5, 0.5}});
    const Vector x{2.0, -1.0};
    const ReweightedProblem r = diag_reweight(LeastSquaresProblem(a, a.multiply(x)));
    const Vector got = lstsq_reference(r.problem);
    CHECK(got[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(-1.0).epsilon(1e-12));
  }
}
