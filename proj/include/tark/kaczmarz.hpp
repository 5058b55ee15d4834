#pragma once

// Randomized Kaczmarz and its variants for unregularized least squares:
// plain RK, tail-averaged RK (fixed and doubling burn-in), RK with
// underrelaxation, and RK with averaging over q threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tark/linalg.hpp"
#include "tark/rng.hpp"
#include "tark/sampling.hpp"

namespace tark {

enum class Method { RK, TARK, TARK_DOUBLING, RKU, RKA };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct SolverConfig {
  Method method = Method::TARK;
  /// Final time for TARK variants; step count (rows accessed) for RK/RKU;
  /// rows-accessed budget for RKA (outer steps = t / q).
  std::size_t t = 1;
  std::optional<std::size_t> t_b;  // default floor(t / 4)
  double omega = 1.0;
  std::size_t q = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t burn_in() const { return t_b.value_or(t / 4); }
};

/// Receives (rows_accessed, current estimate) at checkpoint row counts.
using TraceSink = std::function<void(std::size_t, std::span<const double>)>;

struct Trace {
  std::vector<std::size_t> checkpoints;  // strictly increasing
  TraceSink sink;

  bool active() const { return static_cast<bool>(sink) && !checkpoints.empty(); }
};

/// Running tail average of an iterate stream x_0, x_1, ...
///
/// Sums are Kahan-compensated inside blocks aligned to powers of two
/// ([t_b, 2^k), [2^k, 2^{k+1}), ...) and the blocks are combined in order.
/// With this order the doubling mode, which keeps only the last complete
/// block and the open one, produces exactly the bits the fixed mode produces
/// for t_b = 2^{floor(log2 t) - 1}.
class TailAverager {
 public:
  enum class Mode { fixed_burnin, doubling };

  static TailAverager fixed(std::size_t dim, std::size_t burn_in);
  static TailAverager doubling(std::size_t dim);

  /// Appends x_s where s = final_time() before the call.
  void push(std::span<const double> iterate);

  /// Number of iterates pushed; the average covers final time t = this.
  std::size_t final_time() const { return pushed_; }
  /// Burn-in in effect for the current final time.
  std::size_t burn_in() const;
  bool ready() const;
  /// (sum_{s=t_b}^{t-1} x_s) / (t - t_b) for the current final time t.
  Vector average() const;

  Mode mode() const { return mode_; }

 private:
  struct KahanSum {
    Vector sum;
    Vector comp;
    std::size_t count = 0;
    explicit KahanSum(std::size_t dim) : sum(dim, 0.0), comp(dim, 0.0) {}
    void add(std::span<const double> x);
    void reset();
  };

  TailAverager(Mode mode, std::size_t dim, std::size_t burn_in);
  void fold_current();

  Mode mode_;
  std::size_t burn_in_;
  std::size_t pushed_ = 0;
  KahanSum folded_;
  KahanSum current_;
  std::size_t folded_blocks_ = 0;
};

/// One Kaczmarz projection: x + (b_i - <row, x>) / ||row||^2 * row.
Vector rk_step(std::span<const double> x, std::span<const double> row, double b_i);

/// Runs `steps` RK updates from x0 and returns x_steps.
Vector run_rk(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t steps,
              Rng& rng, const Trace& trace = {});

/// TARK: t - 1 RK steps, returns the mean of x_{t_b}..x_{t-1}.
Vector run_tark(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t t_b,
                std::size_t t, Rng& rng, const Trace& trace = {});

/// TARK with burn-in t_b = 2^{floor(log2 t) - 1}, O(d) extra memory.
Vector run_tark_doubling(const LeastSquaresProblem& problem, std::span<const double> x0,
                         std::size_t t, Rng& rng, const Trace& trace = {});

/// RK with constant underrelaxation omega in (0, 1].
Vector run_rku(const LeastSquaresProblem& problem, std::span<const double> x0, std::size_t steps,
               double omega, Rng& rng, const Trace& trace = {});

/// RK with a step-dependent relaxation schedule omega(step), step = 0, 1, ...
Vector run_rku_schedule(const LeastSquaresProblem& problem, std::span<const double> x0,
                        std::size_t steps, const std::function<double(std::size_t)>& omega,
                        Rng& rng, const Trace& trace = {});

/// RKA: every outer step averages q independent one-step RK updates of the
/// current iterate. Rows accessed = outer_steps * q.
Vector run_rka(const LeastSquaresProblem& problem, std::span<const double> x0,
               std::size_t outer_steps, std::size_t q, Rng& rng, const Trace& trace = {});

/// TARK on a semi-infinite problem given by a row oracle.
Vector run_tark_oracle(RowOracle& oracle, std::span<const double> x0, std::size_t t_b,
                       std::size_t t, Rng& rng, const Trace& trace = {});

/// Dispatches on config.method with an Rng seeded from config.seed.
Vector solve(const LeastSquaresProblem& problem, const SolverConfig& config,
             std::span<const double> x0, const Trace& trace = {});

// ---------------------------------------------------------------------------
// error bounds

/// Problem constants that enter the bounds.
struct BoundInputs {
  double kappa_dem = 1.0;
  double pinv_norm_sq = 0.0;  // ||A^+||^2
  double residual_sq = 0.0;   // ||b - A x_*||^2
  double init_err_sq = 0.0;   // ||x_0 - x_*||^2
};

/// Requires problem.reference_solution (computed if absent).
BoundInputs bound_inputs(const LeastSquaresProblem& problem, std::span<const double> x0);

/// E||x_t - x_*||^2 <= (1 - kappa^-2)^t ||x_0 - x_*||^2 + ||A^+||^2 ||b - A x_*||^2
double bound_theorem1(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t);

/// TARK: (1 - kappa^-2)^{t_b} init + (2 kappa^2 - 1)/(t - t_b) ||A^+||^2 res^2
double bound_theorem2(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t_b, std::size_t t);

/// TARK, alternative form with the bias also averaged over the tail.
double bound_theorem3(double kappa_dem, double init_err_sq, double pinv_norm_sq,
                      double residual_sq, std::size_t t_b, std::size_t t);

}  // namespace tark
