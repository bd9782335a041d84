#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridgelearn/errors.hpp"

namespace ridgelearn {

using Vector = std::vector<double>;

/// Dense real matrix, row-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw InvalidArgument("DenseMatrix: dimensions must be positive");
    }
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
      throw InvalidArgument("DenseMatrix: dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
      throw InvalidArgument("DenseMatrix: entry count does not match shape");
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw InvalidArgument("DenseMatrix: non-finite entry");
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix diagonal(std::span<const double> diag) {
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  /// Matrix whose j-th column is columns[j].
  static DenseMatrix from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) throw InvalidArgument("from_columns: no columns");
    DenseMatrix m(columns.front().size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != m.rows()) throw InvalidArgument("from_columns: ragged columns");
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = columns[j][i];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// First `count` columns.
  DenseMatrix left_columns(std::size_t count) const {
    DenseMatrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, j);
    return out;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Four independent partial sums; the summation order is fixed.
inline double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      auto brow = b.row(l);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

/// y = M x
inline Vector matvec(const DenseMatrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw InvalidArgument("matvec: dimension mismatch");
  Vector y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

/// y = M^T x
inline Vector matvec_transposed(const DenseMatrix& m, std::span<const double> x) {
  if (m.rows() != x.size()) throw InvalidArgument("matvec_transposed: dimension mismatch");
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += xi * r[j];
  }
  return y;
}

inline DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("subtract: shape mismatch");
  }
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

inline double frobenius_norm(const DenseMatrix& m) { return norm2(m.data()); }

/// Module tolerances for the decomposition routines.
struct LinalgTolerances {
  static constexpr double jacobi_off_diagonal = 1e-12;
  static constexpr int jacobi_max_sweeps = 100;
  static constexpr double orthonormality = 1e-10;
  static constexpr double reconstruction = 1e-10;
};

struct SvdResult {
  DenseMatrix U;               // n x p, orthonormal columns
  Vector singular_values;      // p values, non-increasing
  DenseMatrix V;               // m x p, orthonormal columns
  int sweeps = 0;
};

namespace detail {

inline void orthonormal_completion(std::vector<Vector>& basis, std::size_t dim,
                                   const std::vector<bool>& filled) {
  // Fill the unfilled slots with unit vectors orthogonal to everything else,
  // using standard basis candidates and two rounds of Gram-Schmidt.
  std::size_t candidate = 0;
  for (std::size_t slot = 0; slot < basis.size(); ++slot) {
    if (filled[slot]) continue;
    while (candidate < dim) {
      Vector v(dim, 0.0);
      v[candidate++] = 1.0;
      for (int round = 0; round < 2; ++round) {
        for (std::size_t other = 0; other < basis.size(); ++other) {
          if (other == slot || (!filled[other] && other > slot)) continue;
          const double proj = dot(basis[other], v);
          for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * basis[other][i];
        }
      }
      const double n = norm2(v);
      if (n > 1e-6) {
        for (double& x : v) x /= n;
        basis[slot] = std::move(v);
        break;
      }
    }
  }
}

// One-sided Jacobi on a tall matrix (rows >= cols).
inline SvdResult jacobi_svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Vector> w(n, Vector(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j][i] = a(i, j);
  std::vector<Vector> v(n, Vector(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  const double tol = LinalgTolerances::jacobi_off_diagonal;
  // Columns this small are rounding residue and are treated as zero.
  double total = 0.0;
  for (const Vector& col : w) total += dot(col, col);
  const double negligible = std::pow(4.0 * std::numeric_limits<double>::epsilon(), 2) * total;
  int sweep = 0;
  double off = 0.0;
  bool converged = (n == 1);
  while (!converged) {
    if (sweep >= LinalgTolerances::jacobi_max_sweeps) {
      throw SolverFailure("svd: Jacobi sweeps exceeded the iteration cap (max relative "
                              "off-diagonal " + std::to_string(off) + ")",
                          sweep, off);
    }
    ++sweep;
    bool rotated = false;
    off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& wp = w[p];
        auto& wq = w[q];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += wp[i] * wp[i];
          beta += wq[i] * wq[i];
          gamma += wp[i] * wq[i];
        }
        if (alpha <= negligible || beta <= negligible || gamma == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        off = std::max(off, rel);
        if (rel <= tol) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = wp[i];
          const double y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(w[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = n > 0 ? sigma[order[0]] : 0.0;
  // Directions carrying less than this are re-derived by orthonormal completion.
  const double zero_cut = smax * 1e-13;
  std::vector<Vector> ucols(n);
  std::vector<Vector> vcols(n);
  std::vector<bool> filled(n, false);
  Vector sorted(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t j = order[r];
    sorted[r] = sigma[j];
    vcols[r] = v[j];
    if (sigma[j] > zero_cut && sigma[j] > 0.0) {
      ucols[r] = w[j];
      for (double& x : ucols[r]) x /= sigma[j];
      filled[r] = true;
    } else {
      ucols[r] = Vector(m, 0.0);
    }
  }
  orthonormal_completion(ucols, m, filled);

  SvdResult out{DenseMatrix::from_columns(ucols), std::move(sorted),
                DenseMatrix::from_columns(vcols), sweep};
  return out;
}

// Largest-magnitude entry of each V column is made positive (first index on ties).
inline void canonicalize_signs(SvdResult& r) {
  for (std::size_t j = 0; j < r.V.cols(); ++j) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < r.V.rows(); ++i) {
      const double a = std::abs(r.V(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (r.V(best, j) < 0.0) {
      for (std::size_t i = 0; i < r.V.rows(); ++i) r.V(i, j) = -r.V(i, j);
      for (std::size_t i = 0; i < r.U.rows(); ++i) r.U(i, j) = -r.U(i, j);
    }
  }
}

}  // namespace detail

/// Reduced SVD M = U diag(sigma) V^T with p = min(rows, cols).
///
/// One-sided Jacobi (Hestenes) on the taller orientation. Results are
/// bit-reproducible: the sweep order is fixed and the column signs are
/// canonicalised so the largest-magnitude entry of every right singular
/// vector is positive.
inline SvdResult svd(const DenseMatrix& m) {
  if (m.empty()) throw InvalidArgument("svd: empty matrix");
  if (!m.all_finite()) throw InvalidArgument("svd: non-finite input");
  SvdResult r;
  if (m.rows() >= m.cols()) {
    r = detail::jacobi_svd_tall(m);
  } else {
    SvdResult t = detail::jacobi_svd_tall(m.transpose());
    r = SvdResult{std::move(t.V), std::move(t.singular_values), std::move(t.U), t.sweeps};
  }
  detail::canonicalize_signs(r);
  return r;
}

/// Keeps the K largest-magnitude entries; ties keep the smaller index.
inline Vector best_k_term(std::span<const double> x, std::size_t K) {
  if (K > x.size()) throw InvalidArgument("best_k_term: K exceeds vector length");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  Vector out(x.size(), 0.0);
  for (std::size_t r = 0; r < K; ++r) out[idx[r]] = x[idx[r]];
  return out;
}

/// l_p (quasi-)norm; p = +infinity gives the max norm.
inline double lp_norm(std::span<const double> x, double p) {
  if (!(p > 0.0)) throw InvalidArgument("lp_norm: p must be positive");
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("lp_norm: non-finite entry");
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0) return norm2(x);
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  // Scale by the max entry so tiny or huge entries survive the power.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

/// || V1 V1^T - V2 V2^T ||_F for matrices with k orthonormal columns each.
///
/// Evaluated as sqrt(2) * ||(I - V2 V2^T) V1||_F, which equals the projector
/// distance when both spans have the same dimension and avoids forming d x d
/// projectors (and the cancellation of the trace formula).
inline double projection_distance(const DenseMatrix& v1, const DenseMatrix& v2) {
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols()) {
    throw InvalidArgument("projection_distance: dimension mismatch");
  }
  const std::size_t d = v1.rows();
  const std::size_t k = v1.cols();
  // G = V2^T V1 (k x k)
  DenseMatrix g(k, k);
  for (std::size_t i = 0; i < d; ++i) {
    auto r1 = v1.row(i);
    auto r2 = v2.row(i);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) g(a, b) += r2[a] * r1[b];
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    auto r1 = v1.row(i);
    auto r2 = v2.row(i);
    for (std::size_t b = 0; b < k; ++b) {
      double e = r1[b];
      for (std::size_t a = 0; a < k; ++a) e -= r2[a] * g(a, b);
      acc += e * e;
    }
  }
  return std::sqrt(2.0 * acc);
}

/// Dense Cholesky factor L (lower) of a symmetric positive definite matrix.
inline DenseMatrix cholesky(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("cholesky: matrix not square");
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = a(j, j);
    for (std::size_t p = 0; p < j; ++p) s -= l(j, p) * l(j, p);
    if (!(s > 0.0)) throw NumericalFailure("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = a(i, j);
      for (std::size_t p = 0; p < j; ++p) t -= l(i, p) * l(j, p);
      l(i, j) = t / l(j, j);
    }
  }
  return l;
}

}  // namespace ridgelearn
