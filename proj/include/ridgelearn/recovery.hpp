#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/l1.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/oracle.hpp"
#include "ridgelearn/random.hpp"
#include "ridgelearn/sampling.hpp"

namespace ridgelearn {

/// Finite-difference matrix Y, its decoded columns X^ and per-column diagnostics.
struct GradientSketch {
  DirectionMatrix phi;
  std::vector<Vector> points;  // xi_1 .. xi_{m_X}
  DenseMatrix Y;               // m_Phi x m_X
  DenseMatrix Xhat;            // d x m_X
  std::vector<bool> converged;
  std::vector<SolveStatus> status;
  std::vector<double> residuals;
  std::uint64_t queries_used = 0;
};

/// Sample points for the oracle's domain: the unit sphere for ball domains,
/// the unit cube for cube domains.
inline std::vector<Vector> sample_points(const Domain& domain, std::size_t d, std::size_t count, Stream& stream) {
  return domain.kind == Domain::Kind::ball ? sample_sphere(d, count, stream) : sample_cube(d, count, stream);
}

inline void check_plan(const RidgeOracle& oracle, const SamplingPlan& plan) {
  plan.validate();
  const Domain& dom = oracle.domain();
  if (dom.displacement(plan, oracle.spec().d) > dom.margin + 1e-12) {
    throw InvalidArgument("sampling plan: epsilon * |phi| exceeds the domain margin");
  }
}

/// y_ij = (f(xi_j + eps phi_i) - f(xi_j)) / eps, then column-wise decoding.
/// Uses m_X (m_Phi + 1) queries.
inline GradientSketch build_sketch(RidgeOracle& oracle, const SamplingPlan& plan, const SolveSettings& settings = {},
                                   std::size_t threads = 1) {
  check_plan(oracle, plan);
  const std::size_t d = oracle.spec().d;
  Stream phi_stream = derive_stream(plan.seed, {"phi"});
  Stream xi_stream = derive_stream(plan.seed, {"xi"});
  GradientSketch sk{bernoulli_directions(d, plan.m_Phi, phi_stream),
                    sample_points(oracle.domain(), d, plan.m_X, xi_stream),
                    DenseMatrix(plan.m_Phi, plan.m_X),
                    DenseMatrix(d, plan.m_X),
                    {},
                    {},
                    {},
                    0};
  const std::uint64_t before = oracle.query_count();
  Vector x(d);
  for (std::size_t j = 0; j < plan.m_X; ++j) {
    const Vector& xi = sk.points[j];
    const double f0 = oracle.evaluate(xi);
    for (std::size_t i = 0; i < plan.m_Phi; ++i) {
      const auto row = sk.phi.row(i);
      for (std::size_t l = 0; l < d; ++l) x[l] = xi[l] + plan.epsilon * row[l];
      sk.Y(i, j) = (oracle.evaluate(x) - f0) / plan.epsilon;
    }
  }
  sk.queries_used = oracle.query_count() - before;

  DecodeResult dec = decode_columns(sk.phi, sk.Y, settings, threads);
  if (dec.usable_count() == 0) throw SketchFailure("build_sketch: no column could be decoded");
  sk.Xhat = std::move(dec.Xhat);
  sk.converged = std::move(dec.converged);
  for (const SolveReport& r : dec.reports) {
    sk.status.push_back(r.status);
    sk.residuals.push_back(r.final_residual);
  }
  return sk;
}

/// K* = floor(m_Phi / log(d / m_Phi)), or d when m_Phi >= d / e.
inline std::size_t compressibility_level(std::size_t m_Phi, std::size_t d) {
  const double ratio = static_cast<double>(d) / static_cast<double>(m_Phi);
  if (ratio <= std::numbers::e) return d;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(m_Phi / std::log(ratio))), 1, d);
}

/// Per column: ||x^_j - best K*-term of x^_j||_2 plus the solver residual.
inline Vector residual_proxies(const GradientSketch& sk) {
  const std::size_t K = compressibility_level(sk.phi.rows(), sk.Xhat.rows());
  Vector out(sk.Xhat.cols());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Vector col = sk.Xhat.column(j);
    const Vector head = best_k_term(col, K);
    double t = 0.0;
    for (std::size_t l = 0; l < col.size(); ++l) t += (col[l] - head[l]) * (col[l] - head[l]);
    out[j] = std::sqrt(t) + sk.residuals[j];
  }
  return out;
}

inline double median(Vector v) {
  if (v.empty()) throw InvalidArgument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct K1Result {
  Vector a_hat;
  std::size_t j0 = 0;
  double xnorm_j0 = 0.0;
  std::uint64_t queries_used = 0;
  double indicator = 0.0;
  GradientSketch sketch;
};

struct KResult {
  DenseMatrix A_hat;  // k x d
  Vector sigma;       // singular values of X^T
  std::uint64_t queries_used = 0;
  double indicator = 0.0;
  GradientSketch sketch;
};

/// Single-direction recovery: a^ is the normalized decoded gradient of
/// largest norm (smallest index on ties).
inline K1Result algorithm1(RidgeOracle& oracle, const SamplingPlan& plan, const SolveSettings& settings = {},
                           std::size_t threads = 1) {
  K1Result res;
  res.sketch = build_sketch(oracle, plan, settings, threads);
  const DenseMatrix& X = res.sketch.Xhat;
  double best = -1.0;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    const double n = norm2(X.column(j));
    if (n > best) {
      best = n;
      res.j0 = j;
    }
  }
  if (best <= 1e-12) throw DegenerateSignal("algorithm1: every decoded gradient vanishes");
  res.xnorm_j0 = best;
  res.a_hat = X.column(res.j0);
  for (double& v : res.a_hat) v /= best;
  res.queries_used = res.sketch.queries_used;
  res.indicator = 2.0 * median(residual_proxies(res.sketch)) / best;
  return res;
}

/// k-dimensional recovery: A^ holds the top-k right singular vectors of X^^T.
inline KResult algorithm2(RidgeOracle& oracle, std::size_t k, const SamplingPlan& plan,
                          const SolveSettings& settings = {}, std::size_t threads = 1) {
  const std::size_t d = oracle.spec().d;
  if (k < 1 || k > std::min(d, plan.m_X)) throw InvalidArgument("algorithm2: need 1 <= k <= min(d, m_X)");
  KResult res;
  res.sketch = build_sketch(oracle, plan, settings, threads);
  const SvdResult s = svd(res.sketch.Xhat.transpose());
  res.sigma = s.singular_values;
  if (res.sigma[k - 1] <= 1e-12) throw DegenerateSignal("algorithm2: sigma_k of the decoded gradients vanishes");
  res.A_hat = s.V.left_columns(k).transpose();
  res.queries_used = res.sketch.queries_used;
  res.indicator = 2.0 * norm2(residual_proxies(res.sketch)) / res.sigma[k - 1];
  return res;
}

/// Suggested ridge dimension: position of the largest ratio sigma_i / sigma_{i+1}.
inline std::size_t suggest_k(std::span<const double> sigma) {
  if (sigma.empty() || sigma[0] <= 0.0) throw DegenerateSignal("suggest_k: no signal");
  std::size_t best = 1;
  double best_ratio = 0.0;
  for (std::size_t i = 0; i + 1 < sigma.size(); ++i) {
    if (sigma[i] <= 0.0) break;
    const double ratio = sigma[i + 1] > 0.0 ? sigma[i] / sigma[i + 1] : INFINITY;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i + 1;
    }
    if (std::isinf(ratio)) break;
  }
  return best;
}

/// f^(x) = f(A^^T A^ x): one oracle query.
inline double surrogate_evaluate(const DenseMatrix& A_hat, RidgeOracle& oracle, std::span<const double> x) {
  if (x.size() != A_hat.cols()) throw InvalidArgument("surrogate_evaluate: dimension mismatch");
  if (!oracle.domain().contains(x)) throw DomainViolation("surrogate_evaluate: point outside the domain");
  return oracle.evaluate(matvec_transposed(A_hat, matvec(A_hat, x)));
}

inline double surrogate_evaluate(const KResult& r, RidgeOracle& oracle, std::span<const double> x) {
  return surrogate_evaluate(r.A_hat, oracle, x);
}

inline double surrogate_evaluate(const K1Result& r, RidgeOracle& oracle, std::span<const double> x) {
  return surrogate_evaluate(DenseMatrix(1, r.a_hat.size(), r.a_hat), oracle, x);
}

/// The k coordinates with largest row norm of X^, ascending.
inline std::vector<std::size_t> identify_active_coordinates(const GradientSketch& sk, std::size_t k) {
  const DenseMatrix& X = sk.Xhat;
  if (k < 1 || k > X.rows()) throw InvalidArgument("identify_active_coordinates: need 1 <= k <= d");
  Vector norms(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) norms[i] = norm2(X.row(i));
  if (*std::max_element(norms.begin(), norms.end()) <= 1e-12) {
    throw DegenerateSignal("identify_active_coordinates: all row norms vanish");
  }
  std::vector<std::size_t> idx(X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// min over s in {+1, -1} of ||s a^ - a||_2.
inline double sign_aligned_error(std::span<const double> a_hat, std::span<const double> a) {
  if (a_hat.size() != a.size()) throw InvalidArgument("sign_aligned_error: dimension mismatch");
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    plus += (a_hat[i] - a[i]) * (a_hat[i] - a[i]);
    minus += (a_hat[i] + a[i]) * (a_hat[i] + a[i]);
  }
  return std::sqrt(std::min(plus, minus));
}

/// ||A^T A - A^^T A^||_F.
inline double subspace_error(const DenseMatrix& A_hat, const DenseMatrix& A) {
  if (A_hat.rows() != A.rows() || A_hat.cols() != A.cols()) {
    throw InvalidArgument("subspace_error: dimension mismatch");
  }
  auto row_orthonormal = [](const DenseMatrix& M) {
    return frobenius_norm(subtract(matmul(M, M.transpose()), DenseMatrix::identity(M.rows()))) <= 1e-10;
  };
  if (row_orthonormal(A) && row_orthonormal(A_hat)) return projection_distance(A.transpose(), A_hat.transpose());
  return frobenius_norm(subtract(matmul(A.transpose(), A), matmul(A_hat.transpose(), A_hat)));
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json plan_to_json(const SamplingPlan& plan) {
  return {{"m_X", plan.m_X}, {"m_Phi", plan.m_Phi}, {"epsilon", plan.epsilon}, {"seed", plan.seed}};
}

inline nlohmann::json to_json(const K1Result& r, const SamplingPlan& plan) {
  return {{"a_hat", r.a_hat},           {"j0", r.j0},
          {"xnorm_j0", r.xnorm_j0},     {"queries_used", r.queries_used},
          {"indicator", r.indicator},   {"seed", plan.seed},
          {"plan", plan_to_json(plan)}};
}

inline nlohmann::json to_json(const KResult& r, const SamplingPlan& plan) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.A_hat.rows(); ++i) rows.emplace_back(r.A_hat.row(i).begin(), r.A_hat.row(i).end());
  return {{"A_hat", rows},          {"sigma", r.sigma},   {"queries_used", r.queries_used},
          {"indicator", r.indicator}, {"seed", plan.seed}, {"plan", plan_to_json(plan)}};
}

}  // namespace ridgelearn
