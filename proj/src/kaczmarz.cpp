#include "tark/kaczmarz.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "tark/detail/engine.hpp"

namespace tark {

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_x0(const LeastSquaresProblem& problem, std::span<const double> x0) {
  if (x0.size() != problem.cols()) {
    throw std::invalid_argument("initial estimate has wrong length");
  }
}

/// One row access: draw i ~ ||a_i||^2 and project with relaxation `relax`.
struct RkStep {
  const LeastSquaresProblem& problem;
  const WeightedSampler& sampler;
  double relax = 1.0;

  std::size_t operator()(std::span<double> x, Rng& rng) const {
    const std::size_t i = sampler.sample(rng);
    detail::project_onto_row(x, problem.matrix.row(i), problem.rhs[i],
                             problem.matrix.row_sq_norm(i), relax);
    return 1;
  }
};

double contraction(double kappa_dem) {
  return std::max(0.0, 1.0 - 1.0 / (kappa_dem * kappa_dem));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::RK: return "RK";
    case Method::TARK: return "TARK";
    case Method::TARK_DOUBLING: return "TARK_DOUBLING";
    case Method::RKU: return "RKU";
    case Method::RKA: return "RKA";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::RK, Method::TARK, Method::TARK_DOUBLING, Method::RKU, Method::RKA}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

void SolverConfig::validate() const {
  if (t < 1) throw std::invalid_argument("SolverConfig: t must be >= 1");
  if (t_b && *t_b >= t) throw std::invalid_argument("SolverConfig: t_b must be < t");
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("SolverConfig: omega must be in (0, 1]");
  if (q < 1) throw std::invalid_argument("SolverConfig: q must be >= 1");
  if (method == Method::TARK_DOUBLING && t < 2) {
    throw std::invalid_argument("SolverConfig: doubling burn-in needs t >= 2");
  }
  if (method == Method::RKA && t % q != 0) {
    throw std::invalid_argument("SolverConfig: RKA budget must be a multiple of q");
  }
}

// ---------------------------------------------------------------------------
// TailAverager

void TailAverager::KahanSum::add(std::span<const double> x) {
  for (std::size_t j = 0; j < sum.size(); ++j) {
    const double y = x[j] - comp[j];
    const double t = sum[j] + y;
    comp[j] = (t - sum[j]) - y;
    sum[j] = t;
  }
  ++count;
}

void TailAverager::KahanSum::reset() {
  std::fill(sum.begin(), sum.end(), 0.0);
  std::fill(comp.begin(), comp.end(), 0.0);
  count = 0;
}

TailAverager::TailAverager(Mode mode, std::size_t dim, std::size_t burn_in)
    : mode_(mode), burn_in_(burn_in), folded_(dim), current_(dim) {}

TailAverager TailAverager::fixed(std::size_t dim, std::size_t burn_in) {
  return TailAverager(Mode::fixed_burnin, dim, burn_in);
}

TailAverager TailAverager::doubling(std::size_t dim) { return TailAverager(Mode::doubling, dim, 0); }

void TailAverager::fold_current() {
  if (current_.count == 0) return;
  if (folded_blocks_ == 0) {
    folded_.sum = current_.sum;
    std::fill(folded_.comp.begin(), folded_.comp.end(), 0.0);
    folded_.count = 1;
  } else {
    folded_.add(current_.sum);
  }
  ++folded_blocks_;
  current_.reset();
}

void TailAverager::push(std::span<const double> iterate) {
  const std::size_t s = pushed_;
  if (iterate.size() != current_.sum.size()) {
    throw std::invalid_argument("TailAverager::push: dimension mismatch");
  }
  if (mode_ == Mode::fixed_burnin) {
    if (s >= burn_in_) {
      if (s > burn_in_ && is_pow2(s)) fold_current();
      current_.add(iterate);
    }
  } else if (s >= 1) {
    current_.add(iterate);
    // At final time 2^K the window becomes [2^{K-1}, 2^K): keep just that block.
    if (is_pow2(s + 1)) {
      folded_.reset();
      folded_blocks_ = 0;
      fold_current();
    }
  }
  ++pushed_;
}

std::size_t TailAverager::burn_in() const {
  if (mode_ == Mode::fixed_burnin) return burn_in_;
  if (pushed_ < 2) return 0;
  return std::bit_floor(pushed_) / 2;
}

bool TailAverager::ready() const {
  if (mode_ == Mode::doubling) return pushed_ >= 2;
  return pushed_ > burn_in_;
}

Vector TailAverager::average() const {
  if (!ready()) throw std::logic_error("TailAverager::average: empty tail");
  Vector out;
  if (folded_blocks_ == 0) {
    out = current_.sum;
  } else if (current_.count == 0) {
    out = folded_.sum;
  } else {
    KahanSum total = folded_;
    total.add(current_.sum);
    out = std::move(total.sum);
  }
  const auto denom = static_cast<double>(pushed_ - burn_in());
  for (double& v : out) v /= denom;
  return out;
}

// ---------------------------------------------------------------------------
// solvers

Vector rk_step(std::span<const double> x, std::span<const double> row, double b_i) {
  if (x.size() != row.size()) throw std::invalid_argument("rk_step: dimension mismatch");
  const double sq = dot(row, row);
  if (!(sq > 0.0)) throw std::invalid_argument("rk_step: zero row");
  Vector out(x.begin(), x.end());
  detail::project_onto_row(out, row, b_i, sq, 1.0);
  return out;
}

Vector run_rk(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t steps,
              Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_plain(x0, steps, rng, trace, RkStep{problem, sampler});
}

Vector run_tark(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t t_b,
                std::size_t t, Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  if (t < 1 || t_b >= t) throw std::invalid_argument("run_tark: need 0 <= t_b < t");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_averaged(x0, TailAverager::fixed(x0.size(), t_b), t, rng, trace,
                                  RkStep{problem, sampler});
}

Vector run_tark_doubling(const LeastSquaresProblem& problem, std::span<const double> x0,
                         std::size_t t, Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  if (t < 2) throw std::invalid_argument("run_tark_doubling: need t >= 2");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_averaged(x0, TailAverager::doubling(x0.size()), t, rng, trace,
                                  RkStep{problem, sampler});
}

Vector run_rku(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t steps,
               double omega, Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("run_rku: omega must be in (0, 1]");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  return detail::iterate_plain(x0, steps, rng, trace, RkStep{problem, sampler, omega});
}

Vector run_rku_schedule(const LeastSquaresProblem& problem, std::span<const double> x0,
                        std::size_t steps, const std::function<double(std::size_t)>& omega,
                        Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  std::size_t step_index = 0;
  return detail::iterate_plain(x0, steps, rng, trace, [&](std::span<double> x, Rng& r) {
    const double w = omega(step_index++);
    if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("run_rku_schedule: omega out of (0, 1]");
    return RkStep{problem, sampler, w}(x, r);
  });
}

Vector run_rka(const LeastSquaresProblem& problem, std::span<const double> x0,
               std::size_t outer_steps, std::size_t q, Rng& rng, const Trace& trace) {
  check_x0(problem, x0);
  if (q < 1) throw std::invalid_argument("run_rka: q must be >= 1");
  const WeightedSampler sampler(problem.matrix.row_sq_norms());
  const std::size_t d = x0.size();
  Vector accum(d);
  Vector candidate(d);
  const auto q_count = static_cast<double>(q);
  return detail::iterate_plain(x0, outer_steps, rng, trace, [&](std::span<double> x, Rng& r) {
    std::fill(accum.begin(), accum.end(), 0.0);
    for (std::size_t j = 0; j < q; ++j) {
      std::copy(x.begin(), x.end(), candidate.begin());
      RkStep{problem, sampler}(candidate, r);
      for (std::size_t k = 0; k < d; ++k) accum[k] += candidate[k];
    }
    for (std::size_t k = 0; k < d; ++k) x[k] = accum[k] / q_count;
    return q;
  });
}

Vector run_tark_oracle(RowOracle& oracle, std::span<const double> x0, std::size_t t_b,
                       std::size_t t, Rng& rng, const Trace& trace) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument("run_tark_oracle: wrong x0 length");
  if (t < 1 || t_b >= t) throw std::invalid_argument("run_tark_oracle: need 0 <= t_b < t");
  return detail::iterate_averaged(x0, TailAverager::fixed(x0.size(), t_b), t, rng, trace,
                                  [&](std::span<double> x, Rng& r) -> std::size_t {
                                    const OracleRow row = oracle.draw(r);
                                    detail::project_onto_row(x, row.features, row.response,
                                                             row.sq_norm, 1.0);
                                    return 1;
                                  });
}

Vector solve(const LeastSquaresProblem& problem, const SolverConfig& config,
             std::span<const double> x0, const Trace& trace) {
  config.validate();
  Rng rng(config.seed);
  switch (config.method) {
    case Method::RK: return run_rk(problem, x0, config.t, rng, trace);
    case Method::TARK: return run_tark(problem, x0, config.burn_in(), config.t, rng, trace);
    case Method::TARK_DOUBLING: return run_tark_doubling(problem, x0, config.t, rng, trace);
    case Method::RKU: return run_rku(problem, x0, config.t, config.omega, rng, trace);
    case Method::RKA: return run_rka(problem, x0, config.t / config.q, config.q, rng, trace);
  }
  throw std::logic_error("solve: unhandled method");
}

// ---------------------------------------------------------------------------
// bounds

BoundInputs bound_inputs(const LeastSquaresProblem& problem, std::span<const double> x0) {
  LeastSquaresProblem local = problem;
  if (!local.reference_solution || !local.reference_residual_sq) local.attach_reference();
  const SpectralSummary s = spectral_summary(problem.matrix);
  BoundInputs in;
  in.kappa_dem = s.kappa_dem();
  in.pinv_norm_sq = s.pinv_norm_sq();
  in.residual_sq = *local.reference_residual_sq;
  in.init_err_sq = dist_sq(x0, *local.reference_solution);
  return in;
}

double bound_theorem1(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t) {
  return std::pow(contraction(kappa_dem), static_cast<double>(t)) * init_err_sq +
         pinv_norm_sq * residual_sq;
}

double bound_theorem2(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t_b, std::size_t t) {
  if (t_b >= t) throw std::invalid_argument("bound_theorem2: need t_b < t");
  const double k2 = kappa_dem * kappa_dem;
  const auto tail = static_cast<double>(t - t_b);
  return std::pow(contraction(kappa_dem), static_cast<double>(t_b)) * init_err_sq +
         (2.0 * k2 - 1.0) / tail * pinv_norm_sq * residual_sq;
}

double bound_theorem3(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t_b, std::size_t t) {
  if (t_b >= t) throw std::invalid_argument("bound_theorem3: need t_b < t");
  const double k2 = kappa_dem * kappa_dem;
  const auto tail = static_cast<double>(t - t_b);
  const double bias =
      k2 * std::pow(contraction(kappa_dem), static_cast<double>(t_b)) / tail * init_err_sq;
  return (2.0 * k2 - 1.0) / tail * (bias + pinv_norm_sq * residual_sq);
}

}  // namespace tark
