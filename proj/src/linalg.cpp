#include "tark/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tark {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const DenseMatrix& a, const char* what) {
  if (!a.all_finite()) {
    throw NumericalError(std::string(what) + ": matrix has non-finite entries");
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericalError(std::string(what) + ": vector has non-finite entries");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), row_sq_norms_(rows, 0.0) {
  if (rows_ == 0 || cols_ == 0) {
    throw std::invalid_argument("DenseMatrix: dimensions must be at least 1x1");
  }
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: entry count does not match dimensions");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    row_sq_norms_[i] = dot(r, r);
    frob_sq_ += row_sq_norms_[i];
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t d = n ? rows.begin()->size() : 0;
  std::vector<double> entries;
  entries.reserve(n * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("DenseMatrix::from_rows: ragged rows");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return DenseMatrix(n, d, std::move(entries));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return DenseMatrix(n, n, std::move(e));
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("DenseMatrix::multiply: size mismatch");
  Vector y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
  return y;
}

Vector DenseMatrix::multiply_transpose(std::span<const double> y) const {
  if (y.size() != rows_) {
    throw std::invalid_argument("DenseMatrix::multiply_transpose: size mismatch");
  }
  Vector x(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) axpy(y[i], row(i), x);
  return x;
}

DenseMatrix DenseMatrix::gram() const {
  std::vector<double> g(cols_ * cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = entries_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) {
      const double rj = r[j];
      if (rj == 0.0) continue;
      double* gj = g.data() + j * cols_;
      for (std::size_t k = j; k < cols_; ++k) gj[k] += rj * r[k];
    }
  }
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t k = 0; k < j; ++k) g[j * cols_ + k] = g[k * cols_ + j];
  }
  return DenseMatrix(cols_, cols_, std::move(g));
}

DenseMatrix DenseMatrix::transpose() const {
  std::vector<double> t(rows_ * cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t[j * rows_ + i] = entries_[i * cols_ + j];
  }
  return DenseMatrix(cols_, rows_, std::move(t));
}

// ---------------------------------------------------------------------------
// LeastSquaresProblem

LeastSquaresProblem::LeastSquaresProblem(DenseMatrix a, Vector b)
    : matrix(std::move(a)), rhs(std::move(b)) {
  if (rhs.size() != matrix.rows()) {
    throw std::invalid_argument("LeastSquaresProblem: rhs length does not match row count");
  }
}

void LeastSquaresProblem::attach_reference() {
  Vector x = lstsq_reference(*this);
  Vector r = matrix.multiply(x);
  double res = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double e = rhs[i] - r[i];
    res += e * e;
  }
  reference_solution = std::move(x);
  reference_residual_sq = res;
}

// ---------------------------------------------------------------------------
// vector helpers

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) {
    const double w = v / scale;
    s += w * w;
  }
  return scale * std::sqrt(s);
}

double dist_sq(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - y[i];
    s += e * e;
  }
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// ---------------------------------------------------------------------------
// PivotedQR

double rank_tolerance(std::size_t rows, std::size_t cols) {
  return kEps * static_cast<double>(std::max(rows, cols));
}

PivotedQR::PivotedQR(const DenseMatrix& a, bool pivoting)
    : rows_(a.rows()),
      cols_(a.cols()),
      steps_(std::min(a.rows(), a.cols())),
      work_(a.rows() * a.cols()),
      tau_(std::min(a.rows(), a.cols()), 0.0),
      perm_(a.cols()) {
  require_finite(a, "PivotedQR");
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) at(i, j) = a(i, j);
  }
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  auto column_norm = [&](std::size_t j, std::size_t from) {
    return norm2(std::span<const double>(work_.data() + j * rows_ + from, rows_ - from));
  };
  std::vector<double> norms(cols_), norms_ref(cols_);
  for (std::size_t j = 0; j < cols_; ++j) norms[j] = norms_ref[j] = column_norm(j, 0);

  const double tol3z = std::sqrt(kEps);
  for (std::size_t k = 0; k < steps_; ++k) {
    if (pivoting) {
      std::size_t p = k;
      for (std::size_t j = k + 1; j < cols_; ++j) {
        if (norms[j] > norms[p]) p = j;
      }
      if (p != k) {
        std::swap_ranges(work_.begin() + k * rows_, work_.begin() + (k + 1) * rows_,
                         work_.begin() + p * rows_);
        std::swap(perm_[k], perm_[p]);
        std::swap(norms[k], norms[p]);
        std::swap(norms_ref[k], norms_ref[p]);
      }
    }

    // Householder reflector annihilating rows k+1.. of column k.
    double* col = work_.data() + k * rows_;
    const double alpha = col[k];
    const double tail = norm2(std::span<const double>(col + k + 1, rows_ - k - 1));
    if (tail == 0.0) {
      tau_[k] = 0.0;
    } else {
      const double beta = -std::copysign(std::hypot(alpha, tail), alpha);
      tau_[k] = (beta - alpha) / beta;
      const double scale = 1.0 / (alpha - beta);
      for (std::size_t i = k + 1; i < rows_; ++i) col[i] *= scale;
      col[k] = beta;
      for (std::size_t j = k + 1; j < cols_; ++j) {
        double* cj = work_.data() + j * rows_;
        double w = cj[k];
        for (std::size_t i = k + 1; i < rows_; ++i) w += col[i] * cj[i];
        w *= tau_[k];
        cj[k] -= w;
        for (std::size_t i = k + 1; i < rows_; ++i) cj[i] -= w * col[i];
      }
    }

    if (pivoting) {
      for (std::size_t j = k + 1; j < cols_; ++j) {
        if (norms[j] == 0.0) continue;
        double temp = std::abs(at(k, j)) / norms[j];
        temp = std::max(0.0, (1.0 + temp) * (1.0 - temp));
        const double ratio = norms[j] / norms_ref[j];
        if (temp * ratio * ratio <= tol3z) {
          norms[j] = norms_ref[j] = column_norm(j, k + 1);
        } else {
          norms[j] *= std::sqrt(temp);
        }
      }
    }
  }

  const double lead = steps_ ? std::abs(at(0, 0)) : 0.0;
  if (lead > 0.0) {
    const double tol = rank_tolerance(rows_, cols_) * lead;
    if (pivoting) {
      while (rank_ < steps_ && std::abs(at(rank_, rank_)) > tol) ++rank_;
    } else {
      for (std::size_t k = 0; k < steps_; ++k) {
        if (std::abs(at(k, k)) > tol) ++rank_;
      }
    }
  }
}

DenseMatrix PivotedQR::r_factor(std::size_t r) const {
  r = std::min(r, steps_);
  if (r == 0) throw NumericalError("PivotedQR: zero-rank factor requested");
  std::vector<double> e(r * cols_, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < cols_; ++j) e[i * cols_ + j] = at(i, j);
  }
  return DenseMatrix(r, cols_, std::move(e));
}

DenseMatrix PivotedQR::thin_q(std::size_t r) const {
  r = std::min(r, steps_);
  if (r == 0) throw NumericalError("PivotedQR: zero-rank factor requested");
  std::vector<double> q(rows_ * r, 0.0);  // column-major scratch
  for (std::size_t j = 0; j < r; ++j) q[j * rows_ + j] = 1.0;
  for (std::size_t kk = r; kk-- > 0;) {
    if (tau_[kk] == 0.0) continue;
    const double* v = work_.data() + kk * rows_;
    for (std::size_t j = 0; j < r; ++j) {
      double* c = q.data() + j * rows_;
      double w = c[kk];
      for (std::size_t i = kk + 1; i < rows_; ++i) w += v[i] * c[i];
      w *= tau_[kk];
      c[kk] -= w;
      for (std::size_t i = kk + 1; i < rows_; ++i) c[i] -= w * v[i];
    }
  }
  std::vector<double> e(rows_ * r);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < r; ++j) e[i * r + j] = q[j * rows_ + i];
  }
  return DenseMatrix(rows_, r, std::move(e));
}

Vector PivotedQR::apply_qt(std::span<const double> b) const {
  if (b.size() != rows_) throw std::invalid_argument("PivotedQR::apply_qt: size mismatch");
  Vector c(b.begin(), b.end());
  for (std::size_t k = 0; k < steps_; ++k) {
    if (tau_[k] == 0.0) continue;
    const double* v = work_.data() + k * rows_;
    double w = c[k];
    for (std::size_t i = k + 1; i < rows_; ++i) w += v[i] * c[i];
    w *= tau_[k];
    c[k] -= w;
    for (std::size_t i = k + 1; i < rows_; ++i) c[i] -= w * v[i];
  }
  return c;
}

Vector PivotedQR::solve_min_norm(std::span<const double> b) const {
  Vector x(cols_, 0.0);
  if (rank_ == 0) return x;
  const Vector c = apply_qt(b);
  const DenseMatrix r = r_factor(rank_);
  const std::span<const double> head(c.data(), rank_);
  const Vector z = rank_ == cols_ ? back_substitute(r, head, rank_) : min_norm_solve_wide(r, head);
  for (std::size_t j = 0; j < cols_; ++j) x[perm_[j]] = z[j];
  return x;
}

Vector back_substitute(const DenseMatrix& u, std::span<const double> y, std::size_t k) {
  Vector x(k);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= u(ii, j) * x[j];
    if (u(ii, ii) == 0.0) throw NumericalError("back_substitute: zero diagonal");
    x[ii] = s / u(ii, ii);
  }
  return x;
}

Vector min_norm_solve_wide(const DenseMatrix& r, std::span<const double> y) {
  // R^T = W T with T upper triangular, so R = T^T W^T and z = W T^{-T} y.
  const std::size_t rr = r.rows();
  const PivotedQR qr(r.transpose(), /*pivoting=*/false);
  const DenseMatrix t = qr.r_factor(rr);
  Vector w(rr);
  for (std::size_t i = 0; i < rr; ++i) {
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= t(j, i) * w[j];
    if (t(i, i) == 0.0) throw NumericalError("min_norm_solve_wide: rank-deficient factor");
    w[i] = s / t(i, i);
  }
  return qr.thin_q(rr).multiply(w);
}

Vector cholesky_solve(const DenseMatrix& spd, std::span<const double> y) {
  const std::size_t n = spd.rows();
  if (spd.cols() != n || y.size() != n) {
    throw std::invalid_argument("cholesky_solve: dimension mismatch");
  }
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0)) throw NumericalError("cholesky_solve: matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  Vector z(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) z[i] -= l[i * n + k] * z[k];
    z[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) z[i] -= l[k * n + i] * z[k];
    z[i] /= l[i * n + i];
  }
  return z;
}

std::optional<Vector> lu_solve(const DenseMatrix& a, std::span<const double> y,
                               double pivot_tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n || y.size() != n) throw std::invalid_argument("lu_solve: dimension mismatch");
  std::vector<double> m(a.data().begin(), a.data().end());
  Vector z(y.begin(), y.end());
  const double threshold = pivot_tol * a.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m[i * n + k]) > std::abs(m[p * n + k])) p = i;
    }
    if (!(std::abs(m[p * n + k]) > threshold)) return std::nullopt;
    if (p != k) {
      std::swap_ranges(m.begin() + k * n, m.begin() + (k + 1) * n, m.begin() + p * n);
      std::swap(z[k], z[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      z[i] -= f * z[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) z[i] -= m[i * n + j] * z[j];
    z[i] /= m[i * n + i];
  }
  return z;
}

// ---------------------------------------------------------------------------
// reference solvers

Vector lstsq_reference(const DenseMatrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw std::invalid_argument("lstsq_reference: size mismatch");
  require_finite(a, "lstsq_reference");
  require_finite(b, "lstsq_reference");
  return PivotedQR(a).solve_min_norm(b);
}

Vector lstsq_reference(const LeastSquaresProblem& problem) {
  return lstsq_reference(problem.matrix, problem.rhs);
}

namespace {

// Cyclic one-sided Jacobi. Columns of `m` (k x d, column-major) are rotated
// until mutually orthogonal; their norms are then the singular values.
std::vector<double> hestenes_singular_values(std::vector<double> m, std::size_t k,
                                             std::size_t d) {
  auto col = [&](std::size_t j) { return m.data() + j * k; };
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        const double* cp = col(p);
        const double* cq = col(q);
        for (std::size_t i = 0; i < k; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        double* wp = col(p);
        double* wq = col(q);
        for (std::size_t i = 0; i < k; ++i) {
          const double xp = wp[i];
          const double xq = wq[i];
          wp[i] = c * xp - s * xq;
          wq[i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(d);
  for (std::size_t j = 0; j < d; ++j) sv[j] = norm2(std::span<const double>(col(j), k));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace

SpectralSummary spectral_summary(const DenseMatrix& matrix) {
  require_finite(matrix, "spectral_summary");
  if (matrix.frob_sq() == 0.0) throw std::invalid_argument("spectral_summary: zero matrix");
  const PivotedQR qr(matrix);
  const std::size_t k = std::min(matrix.rows(), matrix.cols());
  const std::size_t d = matrix.cols();
  const DenseMatrix r = qr.r_factor(k);
  std::vector<double> m(k * d);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) m[j * k + i] = r(i, j);
  }
  SpectralSummary out;
  out.singular_values = hestenes_singular_values(std::move(m), k, d);
  out.singular_values.resize(k);
  out.sigma_max = out.singular_values.front();
  const double tol = rank_tolerance(matrix.rows(), matrix.cols()) * out.sigma_max;
  for (double s : out.singular_values) {
    if (s > tol) ++out.rank;
  }
  out.sigma_min_pos = out.singular_values[out.rank - 1];
  out.frob_norm = std::sqrt(matrix.frob_sq());
  return out;
}

double demmel_condition(const DenseMatrix& matrix) {
  if (matrix.frob_sq() == 0.0) throw std::invalid_argument("demmel_condition: zero matrix");
  return spectral_summary(matrix).kappa_dem();
}

Vector ridge_solution(const LeastSquaresProblem& problem, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_solution: lambda must be >= 0");
  if (lambda == 0.0) return lstsq_reference(problem);
  require_finite(problem.matrix, "ridge_solution");
  require_finite(problem.rhs, "ridge_solution");
  if (!std::isfinite(lambda)) throw NumericalError("ridge_solution: non-finite lambda");
  const DenseMatrix g = problem.matrix.gram();
  const std::size_t d = g.rows();
  std::vector<double> e(g.data().begin(), g.data().end());
  for (std::size_t j = 0; j < d; ++j) e[j * d + j] += lambda;
  const DenseMatrix shifted(d, d, std::move(e));
  const Vector atb = problem.matrix.multiply_transpose(problem.rhs);
  Vector x = cholesky_solve(shifted, atb);
  // one step of iterative refinement against the original data
  const Vector ax = problem.matrix.multiply(x);
  Vector r(problem.rhs.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = problem.rhs[i] - ax[i];
  Vector g_res = problem.matrix.multiply_transpose(r);
  for (std::size_t j = 0; j < d; ++j) g_res[j] -= lambda * x[j];
  const Vector dx = cholesky_solve(shifted, g_res);
  for (std::size_t j = 0; j < d; ++j) x[j] += dx[j];
  return x;
}

double normal_equation_residual(const DenseMatrix& a, std::span<const double> b,
                                std::span<const double> x, double lambda) {
  const Vector ax = a.multiply(x);
  Vector r(b.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
  Vector g = a.multiply_transpose(r);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] -= lambda * x[j];
  return norm2(g);
}

// ---------------------------------------------------------------------------
// text I/O

namespace {

double read_number(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) throw std::invalid_argument(std::string(what) + ": unexpected end of input");
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument(std::string(what) + ": malformed number '" + token + "'");
  }
  return v;
}

std::size_t read_count(std::istream& in, const char* what) {
  long long v = 0;
  if (!(in >> v) || v < 1) throw std::invalid_argument(std::string(what) + ": bad header");
  return static_cast<std::size_t>(v);
}

void require_end(std::istream& in, const char* what) {
  std::string extra;
  if (in >> extra) throw std::invalid_argument(std::string(what) + ": trailing data");
}

}  // namespace

DenseMatrix read_matrix(std::istream& in) {
  const std::size_t n = read_count(in, "read_matrix");
  const std::size_t d = read_count(in, "read_matrix");
  std::vector<double> e(n * d);
  for (double& v : e) v = read_number(in, "read_matrix");
  require_end(in, "read_matrix");
  return DenseMatrix(n, d, std::move(e));
}

Vector read_vector(std::istream& in) {
  const std::size_t n = read_count(in, "read_vector");
  Vector v(n);
  for (double& x : v) x = read_number(in, "read_vector");
  require_end(in, "read_vector");
  return v;
}

void write_matrix(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, std::span<const double> v) {
  out << v.size() << '\n';
  for (double x : v) out << format_double(x) << '\n';
}

DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open matrix file: " + path);
  return read_matrix(in);
}

Vector read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open vector file: " + path);
  return read_vector(in);
}

void write_matrix_file(const std::string& path, const DenseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write matrix file: " + path);
  write_matrix(out, a);
}

void write_vector_file(const std::string& path, std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write vector file: " + path);
  write_vector(out, v);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace tark
