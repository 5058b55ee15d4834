#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "tark/kaczmarz.hpp"
#include "tark/problems.hpp"

using namespace tark;

namespace {

LeastSquaresProblem two_row() { return {DenseMatrix::from_rows({{1.0}, {1.0}}), Vector{0.0, 2.0}}; }

LeastSquaresProblem random_problem(std::size_t n, std::size_t d, double noise, std::uint64_t seed) {
  Rng rng(seed);
  return gen_gaussian_problem(n, d, noise, rng);
}

/// Every iterate x_0..x_steps of run_rk, captured through the trace.
std::vector<Vector> rk_trajectory(const LeastSquaresProblem& p, std::span<const double> x0, std::size_t steps,
                                  std::uint64_t seed) {
  std::vector<Vector> out;
  Trace trace;
  for (std::size_t s = 0; s <= steps; ++s) trace.checkpoints.push_back(s);
  trace.sink = [&](std::size_t, std::span<const double> x) { out.emplace_back(x.begin(), x.end()); };
  Rng rng(seed);
  run_rk(p, x0, steps, rng, trace);
  return out;
}

}  // namespace

TEST_CASE("rk_step") {
  SUBCASE("examples") {
    CHECK(rk_step(Vector{0.0, 0.0}, Vector{1.0, 0.0}, 1.0) == Vector{1.0, 0.0});
    const Vector x = rk_step(Vector{0.0, 0.0}, Vector{3.0, 4.0}, 10.0);
    CHECK(x[0] == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(rk_step(Vector{1.0, 2.0}, Vector{1.0, 1.0}, 3.0) == Vector{1.0, 2.0});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rk_step(Vector{0.0}, Vector{0.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rk_step(Vector{0.0, 0.0}, Vector{1.0}, 1.0), std::invalid_argument);
  }
  SUBCASE("projection invariant on random data") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      Vector x(6), row(6);
      for (double& v : x) v = 10.0 * rng.normal();
      for (double& v : row) v = rng.normal();
      const double b = 5.0 * rng.normal();
      const Vector next = rk_step(x, row, b);
      CHECK(std::abs(dot(row, next) - b) <= 1e-12 * (std::abs(b) + norm2(row) * norm2(next)));
      // x' - x is parallel to the row: its component orthogonal to the row vanishes.
      Vector diff(6);
      for (std::size_t j = 0; j < 6; ++j) diff[j] = next[j] - x[j];
      const double along = dot(diff, row) / dot(row, row);
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(diff[j] - along * row[j]) <= 1e-12 * (1.0 + norm2(diff)));
    }
  }
}

TEST_CASE("run_rk examples") {
  SUBCASE("identity: fixed once both rows are seen") {
    const LeastSquaresProblem p(DenseMatrix::identity(2), Vector{1.0, 2.0});
    const std::vector<Vector> traj = rk_trajectory(p, Vector{0.0, 0.0}, 50, 3);
    bool seen_both = false;
    for (const Vector& x : traj) {
      if (seen_both) CHECK(x == Vector{1.0, 2.0});
      seen_both = seen_both || (x[0] == 1.0 && x[1] == 2.0);
    }
    CHECK(seen_both);
  }
  SUBCASE("two equal rows: iterates are 0 or 2 with probability 1/2") {
    const std::vector<Vector> traj = rk_trajectory(two_row(), Vector{0.5}, 20000, 4);
    std::size_t twos = 0;
    for (std::size_t s = 1; s < traj.size(); ++s) {
      REQUIRE((traj[s][0] == 0.0 || traj[s][0] == 2.0));
      twos += traj[s][0] == 2.0 ? 1 : 0;
    }
    CHECK(oracle::chi_square_test({0.5, 0.5}, {20000 - twos, twos}) > 1e-6);
  }
  SUBCASE("one row solves in one step") {
    const LeastSquaresProblem p(DenseMatrix::from_rows({{2.0}}), Vector{4.0});
    Rng rng(1);
    CHECK(run_rk(p, Vector{-7.0}, 1, rng) == Vector{2.0});
  }
  SUBCASE("wrong x0 length") {
    Rng rng(1);
    CHECK_THROWS_AS(run_rk(two_row(), Vector{0.0, 0.0}, 1, rng), std::invalid_argument);
  }
  SUBCASE("conditional mean of later iterates is x_star") {
    // From any x_r every later iterate is 0 or 2 with equal probability.
    const LeastSquaresProblem p = two_row();
    std::vector<double> dev;
    for (std::uint64_t trial = 0; trial < 10000; ++trial) {
      Rng rng(derive_seed(12, {trial}));
      dev.push_back(run_rk(p, Vector{0.3}, 5, rng)[0] - 1.0);
    }
    const auto [mean, se] = oracle::mean_se(dev);
    CHECK(std::abs(mean) <= 3.0 * se);
  }
}

TEST_CASE("RK invariants") {
  SUBCASE("iterates from zero stay in the row space") {
    Rng gen(17);
    std::vector<double> entries;
    for (std::size_t i = 0; i < 12; ++i) {
      const double u = gen.normal();
      const double v = gen.normal();
      entries.insert(entries.end(), {u, v, u + v});
    }
    const DenseMatrix a(12, 3, entries);
    Vector b(12);
    for (double& v : b) v = gen.normal();
    const LeastSquaresProblem p(a, b);
    // (1, 1, -1) spans the null space of A.
    const Vector null_dir{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), -1.0 / std::sqrt(3.0)};
    for (const Vector& x : rk_trajectory(p, Vector(3, 0.0), 500, 5)) {
      CHECK(std::abs(dot(x, null_dir)) <= 1e-8 * std::max(norm2(x), 1e-300));
    }
  }
  SUBCASE("consistent problems never move away from x_star") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const LeastSquaresProblem p = random_problem(40, 6, 0.0, seed);
      const Vector& xs = *p.reference_solution;
      const std::vector<Vector> traj = rk_trajectory(p, Vector(6, 1.0), 300, seed + 100);
      for (std::size_t s = 1; s < traj.size(); ++s) {
        CHECK(std::sqrt(dist_sq(traj[s], xs)) <= std::sqrt(dist_sq(traj[s - 1], xs)) + 1e-12);
      }
    }
  }
  SUBCASE("one-step expectation is (I - G/F)(x - x_star)") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const LeastSquaresProblem p = random_problem(7, 3, 1.0, seed);
      const DenseMatrix& a = p.matrix;
      Rng rng(seed + 50);
      Vector x(3);
      for (double& v : x) v = rng.normal();
      // Exact expectation by enumerating the rows.
      Vector expect(3, 0.0);
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const Vector next = rk_step(x, a.row(i), p.rhs[i]);
        for (std::size_t j = 0; j < 3; ++j) expect[j] += a.row_sq_norm(i) / a.frob_sq() * next[j];
      }
      const Vector& xs = *p.reference_solution;
      Vector e(3);
      for (std::size_t j = 0; j < 3; ++j) e[j] = x[j] - xs[j];
      const Vector ge = a.multiply_transpose(a.multiply(e));
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(expect[j] - xs[j] == doctest::Approx(e[j] - ge[j] / a.frob_sq()).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("run_tark") {
  SUBCASE("matches the stored-trajectory average") {
    const LeastSquaresProblem p = random_problem(30, 4, 0.5, 2);
    const Vector x0(4, 0.0);
    for (auto [t_b, t] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 7}, {3, 4}, {10, 200}, {37, 1000}}) {
      const std::vector<Vector> traj = rk_trajectory(p, x0, t - 1, 8);
      const Vector want = oracle::store_all_average(traj, t_b, t);
      Rng rng(8);
      const Vector got = run_tark(p, x0, t_b, t, rng);
      for (std::size_t j = 0; j < 4; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-13));
    }
  }
  SUBCASE("examples") {
    const LeastSquaresProblem one(DenseMatrix::from_rows({{2.0}}), Vector{4.0});
    for (std::size_t t_b : {1u, 3u, 10u}) {
      Rng rng(t_b);
      CHECK(run_tark(one, Vector{9.0}, t_b, t_b + 5, rng) == Vector{2.0});
    }
    Rng rng(1);
    CHECK(run_tark(two_row(), Vector{0.25}, 0, 1, rng) == Vector{0.25});
    CHECK_THROWS_AS(run_tark(two_row(), Vector{0.0}, 3, 3, rng), std::invalid_argument);
  }
  SUBCASE("exact variance on two equal rows") {
    const LeastSquaresProblem p = two_row();
    for (std::size_t t : {11u, 101u}) {
      std::vector<double> sq;
      for (std::uint64_t trial = 0; trial < 10000; ++trial) {
        Rng rng(derive_seed(t, {trial}));
        const double x = run_tark(p, Vector{0.0}, 1, t, rng)[0];
        sq.push_back((x - 1.0) * (x - 1.0));
      }
      const auto [mse, se] = oracle::mean_se(sq);
      CHECK(std::abs(mse - 1.0 / static_cast<double>(t - 1)) <= 3.0 * se);
    }
  }
  SUBCASE("checkpoints report the running tail average") {
    const LeastSquaresProblem p = random_problem(25, 3, 1.0, 4);
    const std::size_t t_b = 10;
    Trace trace;
    trace.checkpoints = {0, 1, 5, 9, 10, 11, 20, 64, 65, 150, 199};
    std::vector<std::pair<std::size_t, Vector>> seen;
    trace.sink = [&](std::size_t rows, std::span<const double> x) { seen.emplace_back(rows, Vector(x.begin(), x.end())); };
    Rng rng(6);
    run_tark(p, Vector(3, 0.0), t_b, 200, rng, trace);
    REQUIRE(seen.size() == trace.checkpoints.size());
    const std::vector<Vector> traj = rk_trajectory(p, Vector(3, 0.0), 199, 6);
    for (const auto& [rows, x] : seen) {
      if (rows < t_b) {
        CHECK(x == traj[rows]);
      } else {
        Rng replay(6);
        CHECK(x == run_tark(p, Vector(3, 0.0), t_b, rows + 1, replay));
      }
    }
  }
}

TEST_CASE("doubling burn-in equals the fixed burn-in bit for bit") {
  const LeastSquaresProblem p = random_problem(50, 5, 1.0, 21);
  const Vector x0(5, 0.0);
  for (std::size_t t : {2u, 3u, 5u, 8u, 13u, 100u, 1000u, 4097u}) {
    const std::size_t t_b = std::bit_floor(t) / 2;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Rng r1(seed), r2(seed);
      CHECK(run_tark_doubling(p, x0, t, r1) == run_tark(p, x0, t_b, t, r2));
    }
  }
  SUBCASE("TailAverager bookkeeping") {
    TailAverager dbl = TailAverager::doubling(1);
    CHECK_FALSE(dbl.ready());
    for (int s = 0; s < 13; ++s) dbl.push(Vector{static_cast<double>(s)});
    CHECK(dbl.final_time() == 13);
    CHECK(dbl.burn_in() == 4);
    // mean of 4..12
    CHECK(dbl.average()[0] == 8.0);
    TailAverager fixed = TailAverager::fixed(1, 3);
    fixed.push(Vector{1.0});
    CHECK_THROWS_AS(fixed.average(), std::logic_error);
    CHECK_THROWS_AS(fixed.push(Vector{1.0, 2.0}), std::invalid_argument);
  }
  Rng rng(0);
  CHECK_THROWS_AS(run_tark_doubling(p, x0, 1, rng), std::invalid_argument);
}

TEST_CASE("RKU") {
  SUBCASE("omega = 1 reproduces RK") {
    const LeastSquaresProblem p = random_problem(30, 4, 1.0, 3);
    Rng r1(5), r2(5);
    CHECK(run_rku(p, Vector(4, 0.0), 300, 1.0, r1) == run_rk(p, Vector(4, 0.0), 300, r2));
  }
  SUBCASE("geometric recursion on one row") {
    const LeastSquaresProblem p(DenseMatrix::from_rows({{1.0}}), Vector{1.0});
    for (std::size_t t : {1u, 2u, 5u, 20u}) {
      Rng rng(t);
      CHECK(run_rku(p, Vector{0.0}, t, 0.5, rng)[0] == doctest::Approx(1.0 - std::pow(2.0, -static_cast<double>(t))).epsilon(1e-15));
    }
  }
  SUBCASE("tiny omega freezes the iterate") {
    const LeastSquaresProblem p = random_problem(10, 2, 1.0, 3);
    Rng rng(1);
    const Vector x = run_rku(p, Vector{1.0, -1.0}, 10, 1e-12, rng);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("schedule form") {
    const LeastSquaresProblem p(DenseMatrix::from_rows({{1.0}}), Vector{1.0});
    Rng rng(1);
    // omega_s = 1/(s+2): x_1 = 1/2, x_2 = 1/2 + 1/3 * 1/2 = 2/3, ... x_t = t/(t+1)
    const Vector x = run_rku_schedule(p, Vector{0.0}, 9, [](std::size_t s) { return 1.0 / static_cast<double>(s + 2); }, rng);
    CHECK(x[0] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK_THROWS_AS(run_rku_schedule(p, Vector{0.0}, 2, [](std::size_t) { return 1.5; }, rng), std::invalid_argument);
    CHECK_THROWS_AS(run_rku(p, Vector{0.0}, 2, 0.0, rng), std::invalid_argument);
  }
}

TEST_CASE("RKA") {
  SUBCASE("q = 1 reproduces RK") {
    const LeastSquaresProblem p = random_problem(30, 4, 1.0, 3);
    Rng r1(5), r2(5);
    CHECK(run_rka(p, Vector(4, 0.0), 300, 1, r1) == run_rk(p, Vector(4, 0.0), 300, r2));
  }
  SUBCASE("one outer step on the identity averages the projections") {
    const LeastSquaresProblem p(DenseMatrix::identity(2), Vector{1.0, 2.0});
    std::set<std::pair<double, double>> outcomes;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      Rng rng(seed);
      const Vector x = run_rka(p, Vector{0.0, 0.0}, 1, 2, rng);
      outcomes.emplace(x[0], x[1]);
    }
    const std::set<std::pair<double, double>> allowed{{1.0, 0.0}, {0.0, 2.0}, {0.5, 1.0}};
    CHECK(outcomes == allowed);
  }
  SUBCASE("consistent single row converges in one outer step") {
    const LeastSquaresProblem p(DenseMatrix::from_rows({{3.0, 4.0}}), Vector{5.0});
    for (std::size_t q : {1u, 4u, 10u}) {
      Rng rng(q);
      const Vector x = run_rka(p, Vector{0.0, 0.0}, 1, q, rng);
      CHECK(x[0] == doctest::Approx(0.6).epsilon(1e-15));
      CHECK(x[1] == doctest::Approx(0.8).epsilon(1e-15));
    }
  }
  SUBCASE("rows accessed are counted q per outer step") {
    const LeastSquaresProblem p = random_problem(20, 3, 1.0, 8);
    Trace trace;
    trace.checkpoints = {0, 5, 10, 11, 30};
    std::vector<std::size_t> rows;
    trace.sink = [&](std::size_t r, std::span<const double>) { rows.push_back(r); };
    Rng rng(1);
    run_rka(p, Vector(3, 0.0), 3, 10, rng, trace);
    CHECK(rows == std::vector<std::size_t>{0, 10, 20, 30});
  }
}

TEST_CASE("semi-infinite TARK approaches the continuous least-squares fit") {
  const std::size_t d = 5;
  ChebyshevRowOracle rows(d);
  Rng rng(31);
  const Vector x = run_tark_oracle(rows, Vector(d, 0.0), 100000, 200000, rng);
  const Vector ref = continuous_reference(PolyBasis::Chebyshev, d);
  CHECK(std::sqrt(dist_sq(x, ref)) <= 0.05 * norm2(ref));
}

TEST_CASE("solve dispatch and SolverConfig validation") {
  const LeastSquaresProblem p = random_problem(20, 3, 1.0, 1);
  const Vector x0(3, 0.0);
  SolverConfig c;
  c.t = 100;
  c.seed = 4;
  CHECK(c.burn_in() == 25);
  Rng rng(4);
  CHECK(solve(p, c, x0) == run_tark(p, x0, 25, 100, rng));

  c.method = Method::RKA;
  c.q = 10;
  Rng rka_rng(4);
  CHECK(solve(p, c, x0) == run_rka(p, x0, 10, 10, rka_rng));

  CHECK(parse_method("TARK_DOUBLING") == Method::TARK_DOUBLING);
  CHECK(to_string(Method::RKU) == "RKU");
  CHECK_THROWS_AS(parse_method("tark"), std::invalid_argument);

  SolverConfig bad;
  bad.t = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.t = 10;
  bad.t_b = 10;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.t_b.reset();
  bad.omega = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.omega = 1.0;
  bad.method = Method::RKA;
  bad.q = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.q = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("bound formulas") {
  SUBCASE("theorem 1") {
    CHECK(bound_theorem1(std::sqrt(2.0), 1.0, 0.5, 1.0, 2) == doctest::Approx(0.75));
    CHECK(bound_theorem1(1.0, 5.0, 0.5, 2.0, 1) == doctest::Approx(1.0));
    CHECK(bound_theorem1(3.0, 1.0, 1.0, 0.0, 2000) < 1e-100);
  }
  SUBCASE("theorem 2") {
    CHECK(bound_theorem2(std::sqrt(2.0), 1.0, 1.0, 1.0, 1, 3) == doctest::Approx(2.0));
    for (std::size_t t : {2u, 11u, 1001u}) {
      CHECK(bound_theorem2(1.0, 1.0, 0.5, 2.0, 1, t) == doctest::Approx(1.0 / static_cast<double>(t - 1)));
    }
    CHECK(bound_theorem2(2.0, 1.0, 0.5, 0.0, 5000, 5001) < 1e-100);
    CHECK_THROWS_AS(bound_theorem2(2.0, 1.0, 1.0, 1.0, 3, 3), std::invalid_argument);
  }
  SUBCASE("theorem 3") {
    CHECK(bound_theorem3(std::sqrt(2.0), 1.0, 1.0, 0.0, 0, 2) == doctest::Approx(1.5));
    CHECK(bound_theorem3(1.0, 7.0, 0.5, 2.0, 1, 5) == doctest::Approx(0.25));
    // With no initial error it is the variance part of theorem 2.
    CHECK(bound_theorem3(2.5, 0.0, 0.3, 1.7, 4, 40) ==
          doctest::Approx(bound_theorem2(2.5, 0.0, 0.3, 1.7, 4, 40)));
    CHECK_THROWS_AS(bound_theorem3(2.0, 1.0, 1.0, 1.0, 4, 2), std::invalid_argument);
  }
  SUBCASE("bound_inputs on two equal rows") {
    const BoundInputs in = bound_inputs(two_row(), Vector{0.0});
    CHECK(in.kappa_dem == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(in.pinv_norm_sq == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(in.residual_sq == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(in.init_err_sq == doctest::Approx(1.0).epsilon(1e-14));
  }
}
