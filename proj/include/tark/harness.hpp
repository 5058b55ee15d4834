#pragma once

// Seeded multi-trial experiments: method dispatch under a shared row-access
// budget, checkpointed error traces, CSV output and Monte-Carlo bound checks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tark/linalg.hpp"
#include "tark/problems.hpp"

namespace tark {

enum class MethodKind { RK, TARK, TARK_DOUBLING, RKU, RKA, RKRR, TARK_RR, AUG_RK, AUG_TARK, DUAL_RK };

std::string_view to_string(MethodKind kind);
MethodKind parse_method_kind(std::string_view name);
/// Methods whose iteration depends on the ridge parameter.
bool is_ridge_method(MethodKind kind);

struct MethodSpec {
  MethodKind kind = MethodKind::TARK;
  std::string label;               // CSV method column; defaults to the kind name
  std::optional<std::size_t> t_b;  // tail-averaged methods; default floor(t / 4)
  std::optional<double> omega;     // RKU; default 1/sqrt(budget)
  std::size_t q = 1;               // RKA
};

struct ProblemConfig {
  enum class Kind { PolyRegression, LowerBound, Files };
  Kind kind = Kind::PolyRegression;
  PolyRegressionSpec poly;
  LowerBoundSpec lower_bound;
  std::string matrix_path;
  std::string rhs_path;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<MethodSpec> methods;
  std::size_t budget = 0;  // rows accessed by every run
  std::size_t trials = 10;
  std::uint64_t master_seed = 0;
  std::size_t points_per_decade = 20;
  std::optional<double> mu;  // ridge parameter; enables rel_err_ridge
  std::size_t threads = 1;
  bool record_timing = false;
  std::string output;  // optional CSV path

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Convergence comparisons on polynomial regression with n samples and a
/// budget of n rows: figure 1 runs RK, RKU, RKA (q = 10) and TARK on the
/// Chebyshev basis; figure 2 runs unregularized RK and TARK next to RK-RR,
/// TARK-RR, TARK on the augmented system and dual RK on the monomial basis
/// with mu = 0.999. Tail-averaged methods use t_b = 1000.
ExperimentConfig figure_preset(int figure, std::size_t n, std::size_t trials, std::uint64_t seed);

/// Strict JSON parsing: unknown keys, wrong types and unknown method names
/// raise std::invalid_argument.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);

LeastSquaresProblem build_problem(const ProblemConfig& config);

struct TraceRecord {
  std::string method;
  std::size_t trial = 0;
  std::size_t rows_accessed = 0;
  double rel_err_lstsq = 0.0;
  std::optional<double> rel_err_ridge;
  double residual_norm = 0.0;
  std::uint64_t wall_ns = 0;
};

/// Aggregate over trials at one checkpoint of one method.
struct SummaryRow {
  std::string method;
  std::size_t rows_accessed = 0;
  double median_rel_err_lstsq = 0.0;
  double q25_rel_err_lstsq = 0.0;
  double q75_rel_err_lstsq = 0.0;
  std::optional<double> median_rel_err_ridge;
  std::optional<double> q25_rel_err_ridge;
  std::optional<double> q75_rel_err_ridge;
  double median_residual_norm = 0.0;
};

struct FinalEstimate {
  std::string method;
  std::size_t trial = 0;
  Vector x;
};

struct ExperimentResult {
  std::vector<TraceRecord> records;   // ordered by (method, trial, rows)
  std::vector<SummaryRow> summary;    // ordered by (method, rows)
  std::vector<FinalEstimate> finals;  // ordered by (method, trial)

  /// Median trace of one method, empty if the label is unknown.
  std::vector<SummaryRow> series(std::string_view method) const;
};

/// Relative errors to x_* (and x_mu when a ridge parameter is given) plus the
/// residual norm, the latter through ||b - Ax||^2 = ||b - Ax_*||^2 + e^T G e.
class ErrorMetrics {
 public:
  ErrorMetrics(const LeastSquaresProblem& problem, std::optional<double> lambda);

  double rel_err_lstsq(std::span<const double> x) const;
  std::optional<double> rel_err_ridge(std::span<const double> x) const;
  double residual_norm(std::span<const double> x) const;

  const Vector& x_star() const { return x_star_; }
  const std::optional<Vector>& x_mu() const { return x_mu_; }

 private:
  Vector x_star_;
  double x_star_norm_;
  double residual_sq_;
  DenseMatrix gram_;
  std::optional<Vector> x_mu_;
  double x_mu_norm_ = 0.0;
};

/// Log-spaced unique integers round(10^{k/ppd}) in [1, t_max], always
/// containing 1 and t_max.
std::vector<std::size_t> checkpoint_grid(std::size_t t_max, std::size_t points_per_decade = 20);

/// Seed of run (method_index, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t method_index, std::size_t trial);

ExperimentResult run_experiment(const LeastSquaresProblem& problem, const ExperimentConfig& config);

inline constexpr std::string_view csv_header =
    "method,trial,rows_accessed,rel_err_lstsq,rel_err_ridge,residual_norm,wall_ns";
inline constexpr std::string_view summary_header =
    "method,rows_accessed,median_rel_err_lstsq,q25_rel_err_lstsq,q75_rel_err_lstsq,"
    "median_rel_err_ridge,q25_rel_err_ridge,q75_rel_err_ridge,median_residual_norm";

void write_csv(std::ostream& out, const std::vector<TraceRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Linear-interpolation quantile of unsorted data, p in [0, 1].
double quantile(std::vector<double> values, double p);

// ---------------------------------------------------------------------------
// Monte-Carlo bound verification

enum class BoundKind { Theorem1, Theorem2, Theorem3, Theorem4, Theorem5 };

std::string_view to_string(BoundKind kind);
BoundKind parse_bound_kind(std::string_view name);

struct BoundCheckConfig {
  BoundKind kind = BoundKind::Theorem2;
  /// Step counts for the plain methods (theorems 1, 4) and final times
  /// t > t_b for the tail-averaged ones (theorems 2, 3, 5).
  std::vector<std::size_t> times;
  std::size_t t_b = 0;
  double mu = 0.5;  // theorems 4, 5
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct BoundCheck {
  std::size_t t = 0;
  double mse = 0.0;
  double std_err = 0.0;
  double bound = 0.0;
  bool pass = false;  // mse <= bound + 3 std_err
};

/// Runs RK, TARK, RK-RR or TARK-RR from x0 = 0 and compares the empirical
/// mean square error (to x_* or x_mu) against the matching bound.
std::vector<BoundCheck> verify_bounds(const LeastSquaresProblem& problem,
                                      const BoundCheckConfig& config);

}  // namespace tark
