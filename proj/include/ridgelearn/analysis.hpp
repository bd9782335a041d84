#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/quadrature.hpp"
#include "ridgelearn/random.hpp"
#include "ridgelearn/sampling.hpp"

namespace ridgelearn {

using ScalarFn = std::function<double(double)>;

namespace detail {

inline void require_kd(std::size_t k, std::size_t d, const char* who) {
  if (k < 1 || k >= d) throw InvalidArgument(std::string(who) + ": need 1 <= k < d");
}

/// Half-width in angle beyond which cos^p(theta) is below e^{-60}.
inline double angular_window(double p) {
  if (p <= 1.0) return std::numbers::pi / 2;
  return std::min(std::numbers::pi / 2, std::sqrt(120.0 / p));
}

}  // namespace detail

/// Density of the image of the uniform sphere measure under a row-orthonormal
/// k x d projection, evaluated at y in the open unit ball of R^k.
inline double pushforward_density(std::size_t k, std::size_t d, std::span<const double> y) {
  detail::require_kd(k, d, "pushforward_density");
  if (y.size() != k) throw InvalidArgument("pushforward_density: y must have k entries");
  const double r2 = dot(y, y);
  if (r2 > 1.0) throw InvalidArgument("pushforward_density: ||y|| > 1");
  const double dd = static_cast<double>(d), kk = static_cast<double>(k);
  const double p = (dd - 2.0 - kk) / 2.0;
  if (r2 == 1.0) return p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double log_c = std::lgamma(dd / 2.0) - 0.5 * kk * std::log(std::numbers::pi) -
                       std::lgamma((dd - kk) / 2.0);
  return std::exp(log_c + p * std::log1p(-r2));
}

/// E[y^ell] for y = a . xi, xi uniform on S^{d-1}.
inline double moment(unsigned ell, std::size_t d) {
  if (d < 2) throw InvalidArgument("moment: need d >= 2");
  if (ell % 2 == 1) return 0.0;
  const double dd = static_cast<double>(d), l = static_cast<double>(ell);
  return std::exp(std::lgamma(dd / 2.0) + std::lgamma((1.0 + l) / 2.0) - 0.5 * std::log(std::numbers::pi) -
                  std::lgamma((dd + l) / 2.0));
}

/// Integral of h against the one-dimensional pushforward density (k = 1).
/// Substituting y = sin(theta) turns the weight into cos^{d-2}(theta), which
/// is smooth for every d >= 2; the window is truncated where it underflows.
inline double sphere_expectation_1d(const ScalarFn& h, std::size_t d, const QuadratureSpec& quad = {}) {
  if (d < 2) throw InvalidArgument("sphere_expectation_1d: need d >= 2");
  const double p = static_cast<double>(d) - 2.0;
  const double w = detail::angular_window(p);
  auto weight = [&](double t) {
    const double c = std::cos(t);
    return c <= 0.0 ? 0.0 : std::exp(p * std::log(c));
  };
  auto integrand = [&](double t) { return h(std::sin(t)) * weight(t); };
  // Normalized by the quadrature of the weight itself; the closed-form
  // constant loses digits to lgamma cancellation at large d.
  // Split at 0 so that even integrands are resolved symmetrically.
  const double num = integrate(integrand, -w, 0.0, quad) + integrate(integrand, 0.0, w, quad);
  const double den = integrate(weight, -w, 0.0, quad) + integrate(weight, 0.0, w, quad);
  const double v = num / den;
  if (!std::isfinite(v)) throw NumericalFailure("sphere_expectation_1d: non-finite value");
  return v;
}

/// alpha = E |g'(a . xi)|^2 over the uniform sphere measure.
inline double alpha_k1(const ScalarFn& gprime, std::size_t d, const QuadratureSpec& quad = {}) {
  return sphere_expectation_1d([&](double y) { const double v = gprime(y); return v * v; }, d, quad);
}

/// 2 Gamma(d/2) / (Gamma(k/2) Gamma((d-k)/2)) times the radial integral of
/// h(r) (1-r^2)^{(d-2-k)/2} r^{k-1} over [0, upper].
inline double radial_integral(const ScalarFn& h, std::size_t k, std::size_t d, double upper,
                              const QuadratureSpec& quad = {}) {
  detail::require_kd(k, d, "radial_integral");
  const double dd = static_cast<double>(d), kk = static_cast<double>(k);
  const double log_c = std::log(2.0) + std::lgamma(dd / 2.0) - std::lgamma(kk / 2.0) - std::lgamma((dd - kk) / 2.0);
  // r = sin(t): weight cos^{d-1-k}(t) sin^{k-1}(t).
  const double pc = dd - 1.0 - kk;
  const double ps = kk - 1.0;
  const double t_max = std::min(std::asin(std::clamp(upper, 0.0, 1.0)), detail::angular_window(pc));
  auto integrand = [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    if (c <= 0.0) return 0.0;
    if (s <= 0.0) return ps == 0.0 ? h(0.0) * std::exp(log_c) : 0.0;
    return h(s) * std::exp(log_c + pc * std::log(c) + ps * std::log(s));
  };
  const double v = integrate(integrand, 0.0, t_max, quad);
  if (!std::isfinite(v)) throw NumericalFailure("radial_integral: non-finite value");
  return v;
}

/// alpha(k, d) for g(y) = g0(||y||): H_g = alpha_radial * I_k.
inline double alpha_radial(const ScalarFn& g0prime, std::size_t k, std::size_t d, const QuadratureSpec& quad = {}) {
  return radial_integral([&](double r) { const double v = g0prime(r); return v * v; }, k, d, 1.0, quad) /
         static_cast<double>(k);
}

/// mu_k(B(eps)) computed by quadrature.
inline double ball_mass(std::size_t k, std::size_t d, double eps, const QuadratureSpec& quad = {}) {
  return radial_integral([](double) { return 1.0; }, k, d, eps, quad);
}

/// Lower bound 1 - 2 Gamma(d/2)/(Gamma(k/2)Gamma((d-k)/2)) e^{-(d-2-k) eps^2 / 2}, clamped.
inline double concentration_lower_bound(std::size_t k, std::size_t d, double eps) {
  detail::require_kd(k, d, "concentration_lower_bound");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("concentration_lower_bound: need 0 < eps < 1");
  const double dd = static_cast<double>(d), kk = static_cast<double>(k);
  const double log_t = std::log(2.0) + std::lgamma(dd / 2.0) - std::lgamma(kk / 2.0) -
                       std::lgamma((dd - kk) / 2.0) - (dd - 2.0 - kk) * eps * eps / 2.0;
  return std::clamp(1.0 - std::exp(log_t), 0.0, 1.0);
}

/// Every constant appearing in the error and probability bounds. Constants
/// without known values default to 1.
struct BoundParams {
  double q = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double alpha = 1.0;
  double s = 0.5;
  double Cprime = 1.0;
  double c1prime = 1.0;
  double delta = 0.5;

  void validate() const {
    if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("BoundParams: q must lie in (0,1]");
    if (!(C1 > 0.0 && C2 > 0.0 && alpha > 0.0 && Cprime > 0.0 && c1prime > 0.0)) {
      throw InvalidArgument("BoundParams: constants must be positive");
    }
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("BoundParams: s must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("BoundParams: delta must lie in (0,1)");
  }
};

inline double nu2(std::size_t m_Phi, std::size_t d, double epsilon, std::size_t k, const BoundParams& p) {
  p.validate();
  if (m_Phi == 0 || m_Phi >= d) throw InvalidArgument("nu: need 0 < m_Phi < d");
  if (k < 1) throw InvalidArgument("nu: need k >= 1");
  const double m = static_cast<double>(m_Phi), kk = static_cast<double>(k);
  const double base = m / std::log(static_cast<double>(d) / m);
  return p.Cprime * (std::pow(kk, 1.0 / p.q) * std::pow(base, 0.5 - 1.0 / p.q) + epsilon * kk * kk / std::sqrt(m));
}

inline double nu1(std::size_t m_Phi, std::size_t d, double epsilon, const BoundParams& p) {
  return nu2(m_Phi, d, epsilon, 1, p);
}

enum class ProbabilityCase { k1, kgeq1 };

inline double success_probability(ProbabilityCase which, std::size_t m_Phi, std::size_t m_X, std::size_t d,
                                  std::size_t k, const BoundParams& p) {
  p.validate();
  const double mP = static_cast<double>(m_Phi), mX = static_cast<double>(m_X);
  double fail = std::exp(-p.c1prime * mP) + std::exp(-std::sqrt(mP * static_cast<double>(d)));
  if (which == ProbabilityCase::k1) {
    fail += 2.0 * std::exp(-2.0 * mX * p.s * p.s * p.alpha * p.alpha / std::pow(p.C2, 4));
  } else {
    const double kk = static_cast<double>(k);
    fail += kk * std::exp(-mX * p.alpha * p.s * p.s / (2.0 * kk * p.C2 * p.C2));
  }
  return std::clamp(1.0 - fail, 0.0, 1.0);
}

/// Empirical frequency of a tail event next to its theoretical bound.
struct TailReport {
  std::size_t trials = 0;
  std::size_t events = 0;
  double bound = 0.0;

  double frequency() const { return trials == 0 ? 0.0 : static_cast<double>(events) / trials; }
  /// Binomial standard error at success probability min(bound, 1).
  double standard_error() const {
    const double b = std::clamp(bound, 0.0, 1.0);
    return trials == 0 ? 0.0 : std::sqrt(b * (1.0 - b) / trials);
  }
  bool within_bound(double num_se = 3.0) const { return frequency() <= bound + num_se * standard_error(); }
};

/// Failure event of max_j |g'(a . xi_j)| >= sqrt(alpha (1 - s)) over random
/// sphere samples, against 2 exp(-2 m_X s^2 alpha^2 / C2^4).
inline TailReport verify_hoeffding_max(const ScalarFn& gprime, std::span<const double> a, std::size_t m_X, double s,
                                       double C2, std::size_t trials, std::uint64_t seed) {
  const std::size_t d = a.size();
  if (std::abs(norm2(a) - 1.0) > 1e-12) throw InvalidArgument("verify_hoeffding_max: a must be a unit vector");
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("verify_hoeffding_max: s must lie in (0,1)");
  const double alpha = alpha_k1(gprime, d);
  const double threshold = std::sqrt(alpha * (1.0 - s));
  TailReport rep;
  rep.trials = trials;
  rep.bound = 2.0 * std::exp(-2.0 * static_cast<double>(m_X) * s * s * alpha * alpha / std::pow(C2, 4));
  for (std::size_t t = 0; t < trials; ++t) {
    Stream st = derive_stream(seed, {"hoeffding", t});
    const auto xi = sample_sphere(d, m_X, st);
    double best = 0.0;
    for (std::size_t j = 0; j < m_X; ++j) best = std::max(best, std::abs(gprime(dot(a, xi[j]))));
    if (best < threshold) ++rep.events;
  }
  return rep;
}

struct ChernoffReport {
  double mu_min = 0.0;
  double mu_max = 0.0;
  TailReport lower;                 // sigma_k(sum) <= (1 - s) mu_min
  std::optional<TailReport> upper;  // sigma_1(sum) >= (1 + s) mu_max, only for s > e - 1
};

using PsdSampler = std::function<DenseMatrix(Stream&)>;

/// Monte-Carlo check of the matrix Chernoff tails for sums of m i.i.d. PSD
/// k x k samples with sigma_1 <= C. `mean` is E X_j; if absent it is
/// estimated from `trials * m` extra draws.
inline ChernoffReport verify_matrix_chernoff(const PsdSampler& sampler, std::size_t k, std::size_t m, double s,
                                             double C, std::size_t trials, std::uint64_t seed,
                                             std::optional<DenseMatrix> mean = std::nullopt) {
  if (!(s > 0.0)) throw InvalidArgument("verify_matrix_chernoff: need s > 0");
  auto draw = [&](Stream& st) {
    DenseMatrix x = sampler(st);
    if (x.rows() != k || x.cols() != k) throw InvalidArgument("verify_matrix_chernoff: sampler shape mismatch");
    if (svd(x).singular_values[0] > C * (1.0 + 1e-12) + 1e-12) {
      throw InvalidArgument("verify_matrix_chernoff: sample violates sigma_1 <= C");
    }
    return x;
  };
  if (!mean) {
    Stream st = derive_stream(seed, {"chernoff-mean"});
    DenseMatrix acc(k, k);
    const std::size_t n = std::max<std::size_t>(trials * m, 1000);
    for (std::size_t i = 0; i < n; ++i) {
      const DenseMatrix x = draw(st);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) acc(a, b) += x(a, b) / static_cast<double>(n);
    }
    mean = acc;
  }
  DenseMatrix total_mean = *mean;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) total_mean(a, b) *= static_cast<double>(m);
  const Vector sv = svd(total_mean).singular_values;
  ChernoffReport rep;
  rep.mu_max = sv.front();
  rep.mu_min = sv[k - 1];
  const double kk = static_cast<double>(k);
  rep.lower.trials = trials;
  rep.lower.bound = s < 1.0 ? kk * std::exp(-rep.mu_min * s * s / (2.0 * C)) : 0.0;
  const bool check_upper = s > std::numbers::e - 1.0;
  if (check_upper) {
    rep.upper = TailReport{trials, 0, kk * std::pow((1.0 + s) / std::numbers::e, -rep.mu_max * (1.0 + s) / C)};
  }
  for (std::size_t t = 0; t < trials; ++t) {
    Stream st = derive_stream(seed, {"chernoff", t});
    DenseMatrix sum(k, k);
    for (std::size_t j = 0; j < m; ++j) {
      const DenseMatrix x = draw(st);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) sum(a, b) += x(a, b);
    }
    const Vector s_sum = svd(sum).singular_values;
    if (s < 1.0 && s_sum[k - 1] <= (1.0 - s) * rep.mu_min) ++rep.lower.events;
    if (check_upper && s_sum.front() >= (1.0 + s) * rep.mu_max) ++rep.upper->events;
  }
  return rep;
}

/// Least-squares slope of log alpha against log d.
inline double decay_exponent(const std::vector<std::pair<double, double>>& values) {
  if (values.size() < 4) throw InvalidArgument("decay_exponent: need at least 4 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [d, a] = values[i];
    if (!(a > 0.0) || !(d > 0.0)) throw InvalidArgument("decay_exponent: values must be positive");
    if (i > 0 && !(d > values[i - 1].first)) throw InvalidArgument("decay_exponent: d must increase");
    const double x = std::log(d), y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(values.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ridgelearn
