#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "ridgelearn/errors.hpp"

namespace ridgelearn {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

namespace detail {

inline GaussLegendreRule compute_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

/// Cached n-point Gauss-Legendre rule. Thread-safe.
inline const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(detail::compute_gauss_legendre(n));
  return *slot;
}

template <class F>
double integrate_fixed(F&& f, double a, double b, int n) {
  const GaussLegendreRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

struct QuadratureSpec {
  int node_count = 256;
  int max_nodes = 4096;
  double tolerance = 1e-10;  // relative agreement of successive doublings
};

/// Gauss-Legendre with node doubling until successive values agree.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (spec.node_count < 16) throw InvalidArgument("integrate: node_count must be at least 16");
  int n = spec.node_count;
  double prev = integrate_fixed(f, a, b, n);
  while (n < spec.max_nodes) {
    n *= 2;
    const double next = integrate_fixed(f, a, b, n);
    if (!std::isfinite(next)) break;
    const double scale = std::max(std::abs(next), 1e-300);
    if (std::abs(next - prev) <= spec.tolerance * scale) return next;
    prev = next;
  }
  if (!std::isfinite(prev)) throw NumericalFailure("integrate: non-finite quadrature value");
  return prev;
}

}  // namespace ridgelearn
