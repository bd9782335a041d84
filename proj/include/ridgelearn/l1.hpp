#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/sampling.hpp"

namespace ridgelearn {

enum class L1Algorithm { homotopy, primal_dual };

struct SolveSettings {
  /// Constraint ||Phi z - y||_2 <= eta. Unset means equality, realised as
  /// eta = 1e-10 max(1, ||y||_2).
  std::optional<double> residual_tol;
  double opt_tol = 1e-9;
  std::size_t max_iters = 20000;
  L1Algorithm algorithm = L1Algorithm::homotopy;

  void validate() const {
    if (!(opt_tol > 0.0)) throw InvalidArgument("SolveSettings: opt_tol must be positive");
    if (max_iters < 1) throw InvalidArgument("SolveSettings: max_iters must be at least 1");
    if (residual_tol && !(*residual_tol >= 0.0)) throw InvalidArgument("SolveSettings: residual_tol must be >= 0");
  }

  double eta(std::span<const double> y) const {
    return residual_tol ? *residual_tol : 1e-10 * std::max(1.0, norm2(y));
  }
};

enum class SolveStatus {
  converged,       // feasible and optimal to tolerance
  residual_floor,  // eta is below the smallest achievable residual; least-residual point returned
  iteration_cap,   // max_iters reached
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::residual_floor: return "residual_floor";
    case SolveStatus::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

struct SolveReport {
  Vector solution;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double l1_value = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::iteration_cap;

  /// True unless the solver gave up on the iteration cap.
  bool usable() const { return status != SolveStatus::iteration_cap; }
  bool operator==(const SolveReport&) const = default;
};

namespace detail {

inline Vector residual_of(const DenseMatrix& phi, std::span<const double> z, std::span<const double> y) {
  Vector r = matvec(phi, z);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return r;
}

/// y - Phi_S z_S using the transposed matrix (rows are columns of Phi).
inline Vector support_residual(const DenseMatrix& cols_t, std::span<const std::size_t> support,
                               std::span<const double> z, std::span<const double> y) {
  Vector r(y.begin(), y.end());
  for (std::size_t j : support) {
    const auto col = cols_t.row(j);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= z[j] * col[i];
  }
  return r;
}

inline SolveReport finish(const DenseMatrix& phi, Vector z, std::span<const double> y, std::size_t iters,
                          SolveStatus status) {
  SolveReport rep;
  rep.final_residual = norm2(residual_of(phi, z, y));
  rep.l1_value = lp_norm(z, 1.0);
  rep.solution = std::move(z);
  rep.iterations = iters;
  rep.status = status;
  rep.converged = status == SolveStatus::converged;
  return rep;
}

/// Lower-triangular Cholesky factor of the Gram matrix of the active columns,
/// grown one column at a time.
class ActiveCholesky {
 public:
  explicit ActiveCholesky(const DenseMatrix& cols_t) : cols_t_(cols_t) {}

  std::size_t size() const { return active_.size(); }
  const std::vector<std::size_t>& active() const { return active_; }

  /// Returns false if column j is numerically dependent on the active set.
  bool push(std::size_t j) {
    const std::size_t n = active_.size();
    const auto cj = cols_t_.row(j);
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = dot(cols_t_.row(active_[i]), cj);
    forward(w);
    const double cc = dot(cj, cj);
    const double diag2 = cc - dot(w, w);
    if (!(diag2 > 1e-12 * cc)) return false;
    for (std::size_t i = 0; i < n; ++i) L_[i].push_back(0.0);
    w.push_back(std::sqrt(diag2));
    L_.push_back(std::move(w));
    for (auto& row : L_) row.resize(n + 1, 0.0);
    active_.push_back(j);
    return true;
  }

  /// Drops the column at position `pos`; the factor is restored to lower
  /// triangular form with Givens rotations.
  void erase(std::size_t pos) {
    const std::size_t n = active_.size();
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pos));
    L_.erase(L_.begin() + static_cast<std::ptrdiff_t>(pos));
    for (std::size_t k = pos; k + 1 < n; ++k) {
      const double a = L_[k][k], b = L_[k][k + 1];
      const double r = std::hypot(a, b);
      const double c = a / r, s = b / r;
      for (std::size_t i = k; i + 1 < n; ++i) {
        const double x = L_[i][k], y = L_[i][k + 1];
        L_[i][k] = c * x + s * y;
        L_[i][k + 1] = -s * x + c * y;
      }
    }
    for (auto& row : L_) row.resize(n - 1);
  }

  /// Solves (Phi_S^T Phi_S) x = b.
  Vector solve(Vector b) const {
    forward(b);
    const std::size_t n = b.size();
    for (std::size_t i = n; i-- > 0;) {
      double s = b[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= L_[k][i] * b[k];
      b[i] = s / L_[i][i];
    }
    return b;
  }

 private:
  void forward(Vector& b) const {
    for (std::size_t i = 0; i < b.size(); ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= L_[i][k] * b[k];
      b[i] = s / L_[i][i];
    }
  }

  const DenseMatrix& cols_t_;
  std::vector<std::size_t> active_;
  std::vector<Vector> L_;  // row i holds L(i, 0..n-1)
};

/// Follows the solution path of min 1/2 ||y - Phi z||^2 + lambda ||z||_1 from
/// lambda = ||Phi^T y||_inf downwards and stops inside the segment where the
/// residual norm reaches eta. Every point of the path is the minimum-l1 point
/// for its own residual level, so the stopping point solves the constrained
/// problem.
inline SolveReport homotopy(const DenseMatrix& phi, std::span<const double> y, double eta,
                            const SolveSettings& settings) {
  const std::size_t m = phi.rows(), d = phi.cols();
  const DenseMatrix cols_t = phi.transpose();  // row j = column j of Phi
  const std::size_t rank_cap = std::min(m, d);
  Vector z(d, 0.0);
  Vector r(y.begin(), y.end());
  if (norm2(r) <= eta) return finish(phi, z, y, 0, SolveStatus::converged);

  auto correlations = [&](std::span<const double> v) {
    Vector c(d);
    for (std::size_t j = 0; j < d; ++j) c[j] = dot(cols_t.row(j), v);
    return c;
  };

  Vector c = correlations(r);
  double lambda = 0.0;
  std::size_t first = 0;
  for (std::size_t j = 0; j < d; ++j) {
    if (std::abs(c[j]) > lambda) {
      lambda = std::abs(c[j]);
      first = j;
    }
  }
  ActiveCholesky chol(cols_t);
  std::vector<char> in_active(d, 0), blocked(d, 0);
  std::vector<double> sign;
  if (!chol.push(first)) return finish(phi, z, y, 0, SolveStatus::residual_floor);
  in_active[first] = 1;
  sign.push_back(c[first] > 0 ? 1.0 : -1.0);
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::size_t just_removed = none;

  for (std::size_t iter = 1; iter <= settings.max_iters; ++iter) {
    const auto& S = chol.active();
    // Columns already tied with the active correlation level enter with a
    // zero-length step (ties are exact for +-1 entries).
    if (S.size() < rank_cap) {
      const double tie = lambda - 1e-12 * std::max(1.0, lambda);
      std::optional<std::size_t> tied;
      for (std::size_t j = 0; j < d; ++j) {
        if (in_active[j] || blocked[j] || just_removed == j) continue;
        if (std::abs(c[j]) >= tie && (!tied || std::abs(c[j]) > std::abs(c[*tied]))) tied = j;
      }
      if (tied) {
        if (chol.push(*tied)) {
          in_active[*tied] = 1;
          sign.push_back(c[*tied] > 0 ? 1.0 : -1.0);
        } else {
          blocked[*tied] = 1;
        }
        continue;
      }
    }
    const Vector dir = chol.solve(sign);
    Vector v(m, 0.0);
    for (std::size_t s = 0; s < S.size(); ++s) {
      const auto col = cols_t.row(S[s]);
      for (std::size_t i = 0; i < m; ++i) v[i] += dir[s] * col[i];
    }
    const Vector a = correlations(v);

    double gamma = lambda;
    std::optional<std::size_t> enter, leave;
    const double floor = 1e-14 * std::max(1.0, lambda);
    if (S.size() < rank_cap) {
      for (std::size_t j = 0; j < d; ++j) {
        if (in_active[j] || blocked[j] || just_removed == j) continue;
        for (double cand : {(lambda - c[j]) / (1.0 - a[j]), (lambda + c[j]) / (1.0 + a[j])}) {
          if (cand > floor && cand < gamma) {
            gamma = cand;
            enter = j;
            leave.reset();
          }
        }
      }
    }
    for (std::size_t s = 0; s < S.size(); ++s) {
      const double cand = -z[S[s]] / dir[s];
      if (cand > floor && cand < gamma) {
        gamma = cand;
        leave = s;
        enter.reset();
      }
    }

    // Smallest t in (0, gamma] with ||r - t v|| = eta.
    // ||r - t v||^2 = p^2 + vv (t - t0)^2 with p the part of r orthogonal to v.
    const double vv = dot(v, v);
    std::optional<double> hit;
    if (vv > 0.0) {
      const double t0 = dot(r, v) / vv;
      double p2 = 0.0;
      for (std::size_t i = 0; i < m; ++i) p2 += (r[i] - t0 * v[i]) * (r[i] - t0 * v[i]);
      if (p2 <= eta * eta) {
        const double t = t0 - std::sqrt((eta * eta - p2) / vv);
        if (t >= 0.0 && t <= gamma) hit = t;
      }
    }
    const double step = hit ? *hit : gamma;
    for (std::size_t s = 0; s < S.size(); ++s) z[S[s]] += step * dir[s];
    lambda -= step;

    if (hit) {
      return finish(phi, z, y, iter, SolveStatus::converged);
    }
    if (lambda <= 1e-15 * std::max(1.0, lambda + step) && !enter && !leave) {
      // End of the path: least-residual point on the final support.
      const SolveReport rep = finish(phi, z, y, iter, SolveStatus::residual_floor);
      if (rep.final_residual <= eta + settings.opt_tol) {
        SolveReport ok = rep;
        ok.status = SolveStatus::converged;
        ok.converged = true;
        return ok;
      }
      return rep;
    }

    r = support_residual(cols_t, S, z, y);
    if (iter % 32 == 0) {
      c = correlations(r);
    } else {
      for (std::size_t j = 0; j < d; ++j) c[j] -= step * a[j];
    }
    just_removed = none;
    if (enter) {
      if (chol.push(*enter)) {
        in_active[*enter] = 1;
        sign.push_back(c[*enter] > 0 ? 1.0 : -1.0);
      } else {
        blocked[*enter] = 1;
      }
    } else if (leave) {
      const std::size_t j = S[*leave];
      z[j] = 0.0;
      in_active[j] = 0;
      sign.erase(sign.begin() + static_cast<std::ptrdiff_t>(*leave));
      chol.erase(*leave);
      just_removed = j;
    }
  }
  return finish(phi, z, y, settings.max_iters, SolveStatus::iteration_cap);
}

inline double soft_threshold(double v, double t) {
  return v > t ? v - t : (v < -t ? v + t : 0.0);
}

/// Largest singular value of Phi by power iteration from a fixed start.
inline double operator_norm(const DenseMatrix& phi) {
  Vector x(phi.cols(), 1.0 / std::sqrt(static_cast<double>(phi.cols())));
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = matvec_transposed(phi, matvec(phi, x));
    const double n = norm2(w);
    if (n == 0.0) return 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = w[i] / n;
    const double next = std::sqrt(n);
    if (std::abs(next - sigma) <= 1e-12 * next) return next;
    sigma = next;
  }
  return sigma;
}

/// Chambolle-Pock iteration on min ||z||_1 s.t. ||Phi z - y|| <= eta.
inline SolveReport primal_dual(const DenseMatrix& phi, std::span<const double> y, double eta,
                               const SolveSettings& settings) {
  const std::size_t m = phi.rows(), d = phi.cols();
  const double L = operator_norm(phi);
  if (L == 0.0) {
    Vector z(d, 0.0);
    return finish(phi, z, y, 0, norm2(y) <= eta ? SolveStatus::converged : SolveStatus::residual_floor);
  }
  const double tau = 0.99 / L, sigma = 0.99 / L;
  Vector z(d, 0.0), z_bar(d, 0.0), p(m, 0.0);
  std::size_t streak = 0;
  for (std::size_t iter = 1; iter <= settings.max_iters; ++iter) {
    // Dual step: prox of sigma F*, F the indicator of the ball B(y, eta).
    Vector kz = matvec(phi, z_bar);
    for (std::size_t i = 0; i < m; ++i) p[i] += sigma * (kz[i] - y[i]);
    const double pn = norm2(p);
    const double shrink = pn > sigma * eta ? (pn - sigma * eta) / pn : 0.0;
    for (double& v : p) v *= shrink;
    // Primal step: soft thresholding.
    const Vector kt = matvec_transposed(phi, p);
    double move = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double next = soft_threshold(z[j] - tau * kt[j], tau);
      move += (next - z[j]) * (next - z[j]);
      z_bar[j] = 2.0 * next - z[j];
      z[j] = next;
    }
    const double excess = std::max(0.0, norm2(residual_of(phi, z, y)) - eta);
    if (excess + std::sqrt(move) < settings.opt_tol) {
      if (++streak >= 10) return finish(phi, z, y, iter, SolveStatus::converged);
    } else {
      streak = 0;
    }
  }
  return finish(phi, z, y, settings.max_iters, SolveStatus::iteration_cap);
}

}  // namespace detail

/// argmin ||z||_1 subject to ||Phi z - y||_2 <= eta. Deterministic.
inline SolveReport basis_pursuit(const DenseMatrix& phi, std::span<const double> y, const SolveSettings& settings = {}) {
  settings.validate();
  if (phi.rows() != y.size()) throw InvalidArgument("basis_pursuit: rows(Phi) must equal length(y)");
  const double eta = settings.eta(y);
  return settings.algorithm == L1Algorithm::homotopy ? detail::homotopy(phi, y, eta, settings)
                                                     : detail::primal_dual(phi, y, eta, settings);
}

inline SolveReport basis_pursuit(const DirectionMatrix& phi, std::span<const double> y,
                                 const SolveSettings& settings = {}) {
  return basis_pursuit(phi.matrix(), y, settings);
}

struct DecodeResult {
  DenseMatrix Xhat;                // d x m_X
  std::vector<SolveReport> reports;  // one per column, solution vectors cleared
  std::vector<bool> converged;

  std::size_t usable_count() const {
    return static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(), [](const SolveReport& r) {
      return r.usable();
    }));
  }
};

/// Column-wise basis pursuit. Output is independent of `threads`.
inline DecodeResult decode_columns(const DenseMatrix& phi, const DenseMatrix& Y, const SolveSettings& settings = {},
                                   std::size_t threads = 1) {
  if (Y.rows() != phi.rows()) throw InvalidArgument("decode_columns: rows(Y) must equal rows(Phi)");
  const std::size_t n = Y.cols();
  std::vector<SolveReport> reports(n);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t j = begin; j < n; j += stride) reports[j] = basis_pursuit(phi, Y.column(j), settings);
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  DecodeResult out{DenseMatrix(phi.cols(), n), {}, std::vector<bool>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.Xhat.set_column(j, reports[j].solution);
    out.converged[j] = reports[j].converged;
    reports[j].solution.clear();
  }
  out.reports = std::move(reports);
  return out;
}

inline DecodeResult decode_columns(const DirectionMatrix& phi, const DenseMatrix& Y, const SolveSettings& settings = {},
                                   std::size_t threads = 1) {
  return decode_columns(phi.matrix(), Y, settings, threads);
}

// ---------------------------------------------------------------------------
// Empirical check of the noisy recovery guarantee

struct NoisyInstance {
  DenseMatrix phi;
  Vector x;
  Vector noise;
};

struct NoisyBoundReport {
  std::size_t trials = 0;
  std::size_t K = 0;
  std::vector<double> errors;  // ||x - z||_2
  std::vector<double> scales;  // K^{-1/2} sigma_K(x)_1 + max(||e||_2, sqrt(log d) ||e||_inf)
  /// Smallest C with errors <= C * scales over trials with a positive scale.
  double measured_constant = 0.0;
  /// Largest error among trials whose scale is zero (exact sparse, noiseless).
  double max_error_at_zero_scale = 0.0;
};

/// Decodes y = Phi x + e with eta = ||e||_2 and measures the constant of the
/// bound ||x - z|| <= C (K^{-1/2} sigma_K(x)_1 + max{||e||_2, sqrt(log d) ||e||_inf}).
inline NoisyBoundReport verify_noisy_bound(const std::function<NoisyInstance(std::size_t)>& generator,
                                           std::size_t trials, std::size_t K, SolveSettings settings = {}) {
  if (trials < 1) throw InvalidArgument("verify_noisy_bound: need at least one trial");
  if (K < 1) throw InvalidArgument("verify_noisy_bound: need K >= 1");
  NoisyBoundReport rep;
  rep.trials = trials;
  rep.K = K;
  for (std::size_t t = 0; t < trials; ++t) {
    const NoisyInstance inst = generator(t);
    const std::size_t d = inst.x.size();
    Vector y = matvec(inst.phi, inst.x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += inst.noise[i];
    const double noise_norm = norm2(inst.noise);
    SolveSettings s = settings;
    if (noise_norm > 0.0) s.residual_tol = noise_norm;
    const SolveReport sol = basis_pursuit(inst.phi, y, s);
    Vector diff = inst.x;
    for (std::size_t j = 0; j < d; ++j) diff[j] -= sol.solution[j];
    const double err = norm2(diff);
    Vector tail = inst.x;
    const Vector head = best_k_term(inst.x, std::min(K, d));
    for (std::size_t j = 0; j < d; ++j) tail[j] -= head[j];
    const double scale = lp_norm(tail, 1.0) / std::sqrt(static_cast<double>(K)) +
                         std::max(noise_norm, std::sqrt(std::log(static_cast<double>(d))) * lp_norm(inst.noise, INFINITY));
    rep.errors.push_back(err);
    rep.scales.push_back(scale);
    if (scale > 0.0) {
      rep.measured_constant = std::max(rep.measured_constant, err / scale);
    } else {
      rep.max_error_at_zero_scale = std::max(rep.max_error_at_zero_scale, err);
    }
  }
  return rep;
}

}  // namespace ridgelearn
