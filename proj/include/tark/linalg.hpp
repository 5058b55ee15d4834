#pragma once

// Dense kernels, reference direct solvers and spectral quantities.

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tark {

using Vector = std::vector<double>;

/// Raised when a computation cannot proceed for numerical reasons
/// (non-finite input, singular system, exhausted retries).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix. Row squared norms are computed once at
/// construction and never change afterwards.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::size_t rows, std::size_t cols);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const { return entries_; }

  double row_sq_norm(std::size_t i) const { return row_sq_norms_[i]; }
  std::span<const double> row_sq_norms() const { return row_sq_norms_; }
  double frob_sq() const { return frob_sq_; }
  double max_abs() const;

  bool all_finite() const;

  Vector multiply(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> y) const;
  /// A^T A, d x d.
  DenseMatrix gram() const;
  DenseMatrix transpose() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
  std::vector<double> row_sq_norms_;
  double frob_sq_ = 0.0;
};

/// min_x ||b - A x||^2, optionally carrying its reference solution.
struct LeastSquaresProblem {
  DenseMatrix matrix;
  Vector rhs;
  std::optional<Vector> reference_solution;
  std::optional<double> reference_residual_sq;

  LeastSquaresProblem(DenseMatrix a, Vector b);

  std::size_t rows() const { return matrix.rows(); }
  std::size_t cols() const { return matrix.cols(); }

  /// Computes and stores x_* and ||b - A x_*||^2 with lstsq_reference.
  void attach_reference();
};

struct SpectralSummary {
  double sigma_max = 0.0;
  double sigma_min_pos = 0.0;
  double frob_norm = 0.0;
  std::size_t rank = 0;
  std::vector<double> singular_values;  // descending

  /// ||A^+|| ||A||_F
  double kappa_dem() const { return frob_norm / sigma_min_pos; }
  /// ||A|| ||A^+||
  double spectral_condition() const { return sigma_max / sigma_min_pos; }
  double pinv_norm_sq() const { return 1.0 / (sigma_min_pos * sigma_min_pos); }
};

// ---------------------------------------------------------------------------
// vector helpers

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double dist_sq(std::span<const double> x, std::span<const double> y);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// ---------------------------------------------------------------------------
// Householder QR with column pivoting

/// Relative threshold below which a singular value (or |R_kk|) counts as zero.
double rank_tolerance(std::size_t rows, std::size_t cols);

/// Compact pivoted Householder factorization A P = Q R of an n x d matrix.
/// Reflectors are stored column-major below the diagonal.
class PivotedQR {
 public:
  explicit PivotedQR(const DenseMatrix& a, bool pivoting = true);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t rank() const { return rank_; }
  /// permutation()[j] is the original column placed at position j.
  const std::vector<std::size_t>& permutation() const { return perm_; }

  /// Leading `r` rows of R (r x d, in pivoted column order).
  DenseMatrix r_factor(std::size_t r) const;
  DenseMatrix r_factor() const { return r_factor(rank_); }
  /// Explicit thin Q with `r` orthonormal columns (n x r).
  DenseMatrix thin_q(std::size_t r) const;
  DenseMatrix thin_q() const { return thin_q(rank_); }
  /// Q^T b (length n).
  Vector apply_qt(std::span<const double> b) const;

  /// Minimum-norm least-squares solution using the numerical rank.
  Vector solve_min_norm(std::span<const double> b) const;

 private:
  double& at(std::size_t i, std::size_t j) { return work_[j * rows_ + i]; }
  double at(std::size_t i, std::size_t j) const { return work_[j * rows_ + i]; }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t steps_;
  std::size_t rank_ = 0;
  std::vector<double> work_;  // column-major
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;
};

/// Solves U x = y for upper-triangular square U (leading k x k block of `u`).
Vector back_substitute(const DenseMatrix& u, std::span<const double> y, std::size_t k);

/// Minimum-norm solution of the underdetermined full-row-rank system R z = y
/// (R is r x d with r <= d).
Vector min_norm_solve_wide(const DenseMatrix& r, std::span<const double> y);

/// Cholesky solve of a symmetric positive definite system. Throws
/// NumericalError if the matrix is not numerically positive definite.
Vector cholesky_solve(const DenseMatrix& spd, std::span<const double> y);

/// Square solve with partial-pivoting LU. Returns nullopt when a pivot falls
/// below `pivot_tol` times the largest entry.
std::optional<Vector> lu_solve(const DenseMatrix& a, std::span<const double> y,
                               double pivot_tol);

// ---------------------------------------------------------------------------
// reference solvers and spectral quantities

/// Minimum-norm least-squares solution x_* = A^+ b.
Vector lstsq_reference(const LeastSquaresProblem& problem);
Vector lstsq_reference(const DenseMatrix& a, std::span<const double> b);

/// Singular values through QR followed by one-sided Jacobi on R.
SpectralSummary spectral_summary(const DenseMatrix& matrix);

/// kappa_dem = ||A^+|| ||A||_F.
double demmel_condition(const DenseMatrix& matrix);

/// Ridge solution (A^T A + lambda I)^{-1} A^T b; lambda = 0 falls back to
/// lstsq_reference.
Vector ridge_solution(const LeastSquaresProblem& problem, double lambda);

/// Normal-equation residual ||A^T (b - A x) - lambda x||.
double normal_equation_residual(const DenseMatrix& a, std::span<const double> b,
                                std::span<const double> x, double lambda = 0.0);

// ---------------------------------------------------------------------------
// text format: "n d\n" + rows for matrices, "n\n" + values for vectors

DenseMatrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);
void write_matrix(std::ostream& out, const DenseMatrix& a);
void write_vector(std::ostream& out, std::span<const double> v);

DenseMatrix read_matrix_file(const std::string& path);
Vector read_vector_file(const std::string& path);
void write_matrix_file(const std::string& path, const DenseMatrix& a);
void write_vector_file(const std::string& path, std::span<const double> v);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

}  // namespace tark
