#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/random.hpp"
#include "ridgelearn/sampling.hpp"

namespace ridgelearn {

/// The profile g : R^k -> R together with its first two derivatives.
struct Link {
  std::function<double(std::span<const double>)> value;
  std::function<Vector(std::span<const double>)> gradient;
  std::function<DenseMatrix(std::span<const double>)> hessian;
};

/// Scalar function with derivatives, used to build k = 1 and radial links.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

inline Link scalar_link(ScalarFunction f) {
  Link g;
  g.value = [f](std::span<const double> y) { return f.value(y[0]); };
  g.gradient = [f](std::span<const double> y) { return Vector{f.d1(y[0])}; };
  g.hessian = [f](std::span<const double> y) {
    DenseMatrix h(1, 1);
    h(0, 0) = f.d2(y[0]);
    return h;
  };
  return g;
}

/// g(y) = g0(||y||_2). Requires g0'(0) = 0 for the gradient to exist at 0.
inline Link radial_link(ScalarFunction g0) {
  Link g;
  g.value = [g0](std::span<const double> y) { return g0.value(norm2(y)); };
  g.gradient = [g0](std::span<const double> y) {
    const double r = norm2(y);
    Vector out(y.size(), 0.0);
    if (r < 1e-300) return out;
    const double s = g0.d1(r) / r;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = s * y[i];
    return out;
  };
  g.hessian = [g0](std::span<const double> y) {
    const std::size_t k = y.size();
    const double r = norm2(y);
    DenseMatrix h(k, k);
    if (r < 1e-12) {
      for (std::size_t i = 0; i < k; ++i) h(i, i) = g0.d2(0.0);
      return h;
    }
    const double a = g0.d2(r);
    const double b = g0.d1(r) / r;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double uu = y[i] * y[j] / (r * r);
        h(i, j) = a * uu + b * ((i == j ? 1.0 : 0.0) - uu);
      }
    }
    return h;
  };
  return g;
}

enum class NoiseKind { none, gaussian, bounded };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double level = 0.0;  // standard deviation (gaussian) or sup bound (bounded)
};

/// Where f may be queried: the ball B(1 + margin) or the cube [-margin, 1 + margin]^d.
struct Domain {
  enum class Kind { ball, cube };
  Kind kind = Kind::ball;
  double margin = 0.5;  // bar epsilon

  static constexpr double slack = 1e-9;

  bool contains(std::span<const double> x) const {
    if (kind == Kind::ball) return norm2(x) <= 1.0 + margin + slack;
    for (double v : x) {
      if (v < -margin - slack || v > 1.0 + margin + slack) return false;
    }
    return true;
  }

  /// Largest displacement epsilon * phi_i allowed by the margin, measured in
  /// the norm that matches the domain (l2 for the ball, l_inf for the cube).
  double displacement(const SamplingPlan& plan, std::size_t d) const {
    const double m = static_cast<double>(plan.m_Phi);
    if (kind == Kind::ball) return plan.epsilon * std::sqrt(static_cast<double>(d) / m);
    return plan.epsilon / std::sqrt(m);
  }
};

struct ModelSpec {
  std::size_t d = 0;
  std::size_t k = 0;
  double q = 1.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double bar_eps = 0.5;
};

/// Ground-truth model f(x) = g(Ax) behind a point-evaluation interface.
///
/// `evaluate` is the only entry point a recovery algorithm may use; it counts
/// queries and adds measurement noise. The remaining accessors expose ground
/// truth for tests and experiment scoring and never touch the counter.
class RidgeOracle {
 public:
  RidgeOracle(std::string name, DenseMatrix A, Link g, ModelSpec spec, Domain domain,
              NoiseSpec noise = {}, Stream noise_stream = Stream(0))
      : name_(std::move(name)),
        A_(std::move(A)),
        g_(std::move(g)),
        spec_(spec),
        domain_(domain),
        noise_(noise),
        noise_stream_(noise_stream) {
    if (A_.rows() != spec_.k || A_.cols() != spec_.d) {
      throw InvalidArgument("RidgeOracle: A shape does not match ModelSpec (k x d)");
    }
    if (noise_.level < 0.0 || !std::isfinite(noise_.level)) {
      throw InvalidArgument("RidgeOracle: noise level must be finite and non-negative");
    }
    const DenseMatrix gram = matmul(A_, A_.transpose());
    if (frobenius_norm(subtract(gram, DenseMatrix::identity(spec_.k))) > 1e-10) {
      throw InvalidArgument("RidgeOracle: A must be row-orthonormal");
    }
    sparse_rows_.resize(spec_.k);
    for (std::size_t i = 0; i < spec_.k; ++i)
      for (std::size_t j = 0; j < spec_.d; ++j)
        if (A_(i, j) != 0.0) sparse_rows_[i].emplace_back(j, A_(i, j));
  }

  double evaluate(std::span<const double> x) {
    if (x.size() != spec_.d) throw InvalidArgument("evaluate: point has wrong dimension");
    if (!domain_.contains(x)) throw DomainViolation("evaluate: point outside the oracle domain");
    ++query_count_;
    double v = g_.value(project(x));
    switch (noise_.kind) {
      case NoiseKind::none:
        break;
      case NoiseKind::gaussian:
        v += noise_.level * noise_stream_.normal();
        break;
      case NoiseKind::bounded:
        v += noise_stream_.uniform(-noise_.level, noise_.level);
        break;
    }
    return v;
  }

  std::uint64_t query_count() const noexcept { return query_count_; }
  void reset_query_count() noexcept { query_count_ = 0; }

  /// Same model with a fresh counter and its own noise stream (one per trial).
  RidgeOracle clone(Stream noise_stream) const {
    RidgeOracle c = *this;
    c.noise_stream_ = noise_stream;
    c.query_count_ = 0;
    return c;
  }

  RidgeOracle with_noise(NoiseSpec noise, Stream noise_stream) const {
    RidgeOracle c = clone(noise_stream);
    if (noise.level < 0.0) throw InvalidArgument("with_noise: negative noise level");
    c.noise_ = noise;
    return c;
  }

  const std::string& name() const noexcept { return name_; }
  const DenseMatrix& A() const noexcept { return A_; }
  const Link& g() const noexcept { return g_; }
  const ModelSpec& spec() const noexcept { return spec_; }
  const Domain& domain() const noexcept { return domain_; }
  const NoiseSpec& noise() const noexcept { return noise_; }

  /// A x using the row sparsity of A.
  Vector project(std::span<const double> x) const {
    Vector y(spec_.k, 0.0);
    for (std::size_t i = 0; i < spec_.k; ++i) {
      double s = 0.0;
      for (const auto& [j, a] : sparse_rows_[i]) s += a * x[j];
      y[i] = s;
    }
    return y;
  }

  double exact_value(std::span<const double> x) const { return g_.value(project(x)); }

  /// grad f(x) = A^T grad g(Ax).
  Vector exact_gradient(std::span<const double> x) const {
    const Vector gy = g_.gradient(project(x));
    Vector out(spec_.d, 0.0);
    for (std::size_t i = 0; i < spec_.k; ++i)
      for (const auto& [j, a] : sparse_rows_[i]) out[j] += a * gy[i];
    return out;
  }

  /// Coordinates on which f depends (nonzero columns of A), ascending.
  std::vector<std::size_t> active_coordinates() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < spec_.d; ++j) {
      for (std::size_t i = 0; i < spec_.k; ++i) {
        if (A_(i, j) != 0.0) {
          out.push_back(j);
          break;
        }
      }
    }
    return out;
  }

 private:
  std::string name_;
  DenseMatrix A_;
  Link g_;
  ModelSpec spec_;
  Domain domain_;
  NoiseSpec noise_;
  Stream noise_stream_;
  std::uint64_t query_count_ = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> sparse_rows_;
};

// ---------------------------------------------------------------------------
// Model constants

/// max_i ||a_i||_q over the rows of A.
inline double row_lq_bound(const DenseMatrix& A, double q) {
  double c = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) c = std::max(c, lp_norm(A.row(i), q));
  return c;
}

/// Spot check of sup |D^alpha g|, |alpha| <= 2, on a probe set covering the
/// image of the domain: a 513-point grid per axis for k <= 2, otherwise a
/// fixed pseudo-random cloud.
inline double probe_derivative_bound(const Link& g, std::size_t k, const Domain& domain,
                                     const DenseMatrix& A) {
  std::vector<double> lo(k), hi(k);
  if (domain.kind == Domain::Kind::ball) {
    std::fill(lo.begin(), lo.end(), -(1.0 + domain.margin));
    std::fill(hi.begin(), hi.end(), 1.0 + domain.margin);
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      double l = 0.0, h = 0.0;
      for (std::size_t j = 0; j < A.cols(); ++j) {
        const double a = A(i, j);
        const double e1 = -domain.margin * a;
        const double e2 = (1.0 + domain.margin) * a;
        l += std::min(e1, e2);
        h += std::max(e1, e2);
      }
      lo[i] = l;
      hi[i] = h;
    }
  }
  const double radius = 1.0 + domain.margin;
  auto inside = [&](std::span<const double> y) {
    return domain.kind != Domain::Kind::ball || norm2(y) <= radius + 1e-12;
  };
  double bound = 0.0;
  auto visit = [&](std::span<const double> y) {
    if (!inside(y)) return;
    bound = std::max(bound, std::abs(g.value(y)));
    for (double v : g.gradient(y)) bound = std::max(bound, std::abs(v));
    for (double v : g.hessian(y).data()) bound = std::max(bound, std::abs(v));
  };
  constexpr int grid = 513;
  if (k == 1) {
    Vector y(1);
    for (int i = 0; i < grid; ++i) {
      y[0] = lo[0] + (hi[0] - lo[0]) * i / (grid - 1);
      visit(y);
    }
  } else if (k == 2) {
    Vector y(2);
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        y[0] = lo[0] + (hi[0] - lo[0]) * i / (grid - 1);
        y[1] = lo[1] + (hi[1] - lo[1]) * j / (grid - 1);
        visit(y);
      }
    }
  } else {
    Stream s(0xC2C2C2ULL);
    for (int n = 0; n < 20000; ++n) {
      Vector y(k);
      for (std::size_t i = 0; i < k; ++i) y[i] = s.uniform(lo[i], hi[i]);
      visit(y);
    }
  }
  return bound;
}

inline ModelSpec make_spec(const DenseMatrix& A, const Link& g, const Domain& domain, double q = 1.0) {
  ModelSpec spec;
  spec.k = A.rows();
  spec.d = A.cols();
  spec.q = q;
  spec.C1 = row_lq_bound(A, q);
  spec.C2 = probe_derivative_bound(g, spec.k, domain, A);
  spec.bar_eps = domain.margin;
  return spec;
}

// ---------------------------------------------------------------------------
// Random compressible A

/// k x d row-orthonormal matrix whose rows are supported on `support` random
/// coordinates each (Gram-Schmidt on the union support).
inline DenseMatrix random_sparse_rows(std::size_t k, std::size_t d, std::size_t support, Stream& stream) {
  if (k < 1 || k > d) throw InvalidArgument("random_sparse_rows: need 1 <= k <= d");
  support = std::clamp<std::size_t>(support, 1, d);
  for (int attempt = 0; attempt < 100; ++attempt) {
    DenseMatrix A(k, d);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::size_t> idx;
      while (idx.size() < support) {
        const std::size_t j = stream.below(d);
        if (std::find(idx.begin(), idx.end(), j) == idx.end()) idx.push_back(j);
      }
      for (std::size_t j : idx) A(i, j) = stream.normal();
    }
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      for (int round = 0; round < 2; ++round) {
        for (std::size_t p = 0; p < i; ++p) {
          const double proj = dot(A.row(p), A.row(i));
          for (std::size_t j = 0; j < d; ++j) A(i, j) -= proj * A(p, j);
        }
      }
      const double n = norm2(A.row(i));
      if (n < 1e-8) {
        ok = false;
        break;
      }
      for (std::size_t j = 0; j < d; ++j) A(i, j) /= n;
    }
    if (ok) return A;
  }
  throw NumericalFailure("random_sparse_rows: could not draw independent sparse rows");
}

// ---------------------------------------------------------------------------
// Built-in models

/// f(x) = max([1 - 5 sqrt((x_3 - 1/2)^2 + (x_4 - 1/2)^2)]^3, 0) on the unit
/// cube; coordinates x_3, x_4 are the zero-based indices 2 and 3.
inline RidgeOracle make_figure2(std::size_t d, double margin = 0.1) {
  if (d < 4) throw InvalidArgument("make_figure2: d must be at least 4");
  DenseMatrix A(2, d);
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;
  Link g;
  auto radius = [](std::span<const double> y) {
    return std::hypot(y[0] - 0.5, y[1] - 0.5);
  };
  g.value = [radius](std::span<const double> y) {
    const double u = 1.0 - 5.0 * radius(y);
    return u > 0.0 ? u * u * u : 0.0;
  };
  g.gradient = [radius](std::span<const double> y) {
    const double r = radius(y);
    const double u = 1.0 - 5.0 * r;
    if (u <= 0.0 || r < 1e-12) return Vector{0.0, 0.0};
    const double s = -15.0 * u * u / r;
    return Vector{s * (y[0] - 0.5), s * (y[1] - 0.5)};
  };
  g.hessian = [radius](std::span<const double> y) {
    DenseMatrix h(2, 2);
    const double r = radius(y);
    const double u = 1.0 - 5.0 * r;
    if (u <= 0.0) return h;
    const double h2 = 150.0 * u;
    if (r < 1e-12) {
      h(0, 0) = h(1, 1) = h2;
      return h;
    }
    const double h1r = -15.0 * u * u / r;
    const double c[2] = {(y[0] - 0.5) / r, (y[1] - 0.5) / r};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) h(i, j) = h2 * c[i] * c[j] + h1r * ((i == j) - c[i] * c[j]);
    return h;
  };
  Domain domain{Domain::Kind::cube, margin};
  ModelSpec spec = make_spec(A, g, domain);
  return RidgeOracle("figure2", std::move(A), std::move(g), spec, domain);
}

/// g(y) = 8 (y - 1/2)^3 for y >= 1/2 and 0 below: f vanishes on the sphere
/// outside the cap {a . x >= 1/2} and f(a) = 1.
inline RidgeOracle make_cap_counterexample(std::span<const double> a, double margin = 0.5) {
  if (std::abs(norm2(a) - 1.0) > 1e-12) {
    throw InvalidArgument("make_cap_counterexample: a must be a unit vector");
  }
  DenseMatrix A(1, a.size(), Vector(a.begin(), a.end()));
  ScalarFunction cap{
      [](double y) { return y >= 0.5 ? 8.0 * std::pow(y - 0.5, 3) : 0.0; },
      [](double y) { return y >= 0.5 ? 24.0 * (y - 0.5) * (y - 0.5) : 0.0; },
      [](double y) { return y >= 0.5 ? 48.0 * (y - 0.5) : 0.0; }};
  Link g = scalar_link(cap);
  Domain domain{Domain::Kind::ball, margin};
  ModelSpec spec = make_spec(A, g, domain);
  return RidgeOracle("cap", std::move(A), std::move(g), spec, domain);
}

/// Ridge model g(a . x) with an explicit direction.
inline RidgeOracle make_ridge(std::string name, std::span<const double> a, ScalarFunction g1,
                              double margin = 0.5) {
  DenseMatrix A(1, a.size(), Vector(a.begin(), a.end()));
  Link g = scalar_link(std::move(g1));
  Domain domain{Domain::Kind::ball, margin};
  ModelSpec spec = make_spec(A, g, domain);
  return RidgeOracle(std::move(name), std::move(A), std::move(g), spec, domain);
}

/// k-ridge model with an explicit row-orthonormal A.
inline RidgeOracle make_k_ridge(std::string name, DenseMatrix A, Link g, double margin = 0.5) {
  Domain domain{Domain::Kind::ball, margin};
  ModelSpec spec = make_spec(A, g, domain);
  return RidgeOracle(std::move(name), std::move(A), std::move(g), spec, domain);
}

/// g(y) = g0(||y||) with a random row-orthonormal A whose rows have
/// `support` nonzeros. g0'(0) must vanish (checked by a forward difference).
inline RidgeOracle make_radial(ScalarFunction g0, std::size_t k, std::size_t d, std::uint64_t seed,
                               std::size_t support = 4, double margin = 0.5) {
  constexpr double h = 1e-7;
  if (std::abs((g0.value(h) - g0.value(0.0)) / h) > 1e-6) {
    throw InvalidArgument("make_radial: g0'(0) must vanish for g to be differentiable at 0");
  }
  Stream s = derive_stream(seed, {"radial-A"});
  DenseMatrix A = random_sparse_rows(k, d, support, s);
  return make_k_ridge("radial", std::move(A), radial_link(std::move(g0)), margin);
}

struct ReducedModel {
  DenseMatrix A;  // row-orthonormal k x d
  Link g;
};

/// Rewrites g(Ax) with arbitrary full-rank A as g~(A~ x), A~ A~^T = I:
/// A = U S V^T, A~ = V^T, g~(y) = g(U S y).
inline ReducedModel reduce_to_row_orthonormal(const DenseMatrix& A, const Link& g) {
  if (A.rows() > A.cols()) throw InvalidArgument("reduce_to_row_orthonormal: need k <= d");
  SvdResult s = svd(A);
  const std::size_t k = A.rows();
  if (s.singular_values[k - 1] <= 1e-12 * std::max(1.0, s.singular_values[0])) {
    throw InvalidArgument("reduce_to_row_orthonormal: A is rank deficient");
  }
  DenseMatrix us = s.U;  // k x k
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) us(i, j) *= s.singular_values[j];
  const DenseMatrix us_t = us.transpose();
  Link gt;
  gt.value = [g, us](std::span<const double> y) { return g.value(matvec(us, y)); };
  gt.gradient = [g, us, us_t](std::span<const double> y) {
    return matvec(us_t, g.gradient(matvec(us, y)));
  };
  gt.hessian = [g, us, us_t](std::span<const double> y) {
    return matmul(us_t, matmul(g.hessian(matvec(us, y)), us));
  };
  return ReducedModel{s.V.transpose(), std::move(gt)};
}

// ---------------------------------------------------------------------------
// Tractability classes (k = 1)

enum class TractabilityClass { F1, F2, F3 };

/// F1: g = sin, |g'(0)| = 1. F2(M): g(y) = y^{M+1}/(M+1)!, the first M
/// derivatives vanish at 0. F3: g(y) = exp(-1/y^2), flat at 0.
inline ScalarFunction class_profile(TractabilityClass cls, int M = 1) {
  switch (cls) {
    case TractabilityClass::F1:
      return {[](double y) { return std::sin(y); }, [](double y) { return std::cos(y); },
              [](double y) { return -std::sin(y); }};
    case TractabilityClass::F2: {
      if (M < 1) throw InvalidArgument("F2 requires M >= 1");
      double fact = 1.0;
      for (int i = 2; i <= M + 1; ++i) fact *= i;
      const int p = M + 1;
      return {[p, fact](double y) { return std::pow(y, p) / fact; },
              [p, fact](double y) { return p * std::pow(y, p - 1) / fact; },
              [p, fact](double y) { return p * (p - 1) * std::pow(y, p - 2) / fact; }};
    }
    case TractabilityClass::F3:
      return {[](double y) { return y == 0.0 ? 0.0 : std::exp(-1.0 / (y * y)); },
              [](double y) {
                return y == 0.0 ? 0.0 : 2.0 / (y * y * y) * std::exp(-1.0 / (y * y));
              },
              [](double y) {
                if (y == 0.0) return 0.0;
                const double y2 = y * y;
                return (4.0 / (y2 * y2 * y2) - 6.0 / (y2 * y2)) * std::exp(-1.0 / y2);
              }};
  }
  throw InvalidArgument("class_profile: unknown class");
}

inline RidgeOracle make_class_instance(TractabilityClass cls, std::size_t d, double q, double C1,
                                       std::uint64_t seed, int M = 1, std::size_t support = 4,
                                       double margin = 0.5) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("make_class_instance: q must lie in (0,1]");
  ScalarFunction g = class_profile(cls, M);
  Stream s = derive_stream(seed, {"class-a"});
  for (int attempt = 0; attempt < 100; ++attempt) {
    DenseMatrix a = random_sparse_rows(1, d, support, s);
    if (lp_norm(a.row(0), q) <= C1) {
      std::string name = cls == TractabilityClass::F1   ? "f1"
                         : cls == TractabilityClass::F2 ? "f2:" + std::to_string(M)
                                                        : "f3";
      RidgeOracle o = make_ridge(name, a.row(0), g, margin);
      return o;
    }
  }
  throw InvalidArgument("make_class_instance: could not meet the l_q bound C1");
}

// ---------------------------------------------------------------------------
// Registry

struct ModelRequest {
  std::string name;
  std::size_t d = 0;
  std::size_t k = 0;  // 0: model default
  std::uint64_t seed = 0;
  std::optional<double> margin;
  std::size_t support = 4;
};

/// Model names: "figure2", "cap", "radial:r2", "f1", "f2:M", "f3",
/// "linear:sparseK", "cubic:sparseK" (g = y + y^3), "sin-square"
/// (k = 2, g = sin y1 + y2^2).
inline RidgeOracle make_model(const ModelRequest& req) {
  const std::string& n = req.name;
  const double margin = req.margin.value_or(n == "figure2" ? 0.1 : 0.5);
  auto expect_k = [&](std::size_t k) {
    if (req.k != 0 && req.k != k) {
      throw InvalidArgument("model " + n + " has k = " + std::to_string(k));
    }
  };
  auto sparse_suffix = [&](const std::string& prefix) -> std::optional<std::size_t> {
    if (n.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string rest = n.substr(prefix.size());
    if (rest.empty()) return req.support;
    try {
      std::size_t pos = 0;
      const auto v = std::stoul(rest, &pos);
      if (pos != rest.size() || v == 0) throw InvalidArgument("bad sparsity in model name " + n);
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad sparsity in model name " + n);
    }
  };
  Stream s = derive_stream(req.seed, {"model", n});

  if (n == "figure2") {
    expect_k(2);
    return make_figure2(req.d, margin);
  }
  if (n == "cap") {
    expect_k(1);
    DenseMatrix a = random_sparse_rows(1, req.d, req.support, s);
    return make_cap_counterexample(a.row(0), margin);
  }
  if (n == "radial:r2") {
    const std::size_t k = req.k == 0 ? 2 : req.k;
    return make_radial({[](double r) { return r * r; }, [](double r) { return 2.0 * r; },
                        [](double) { return 2.0; }},
                       k, req.d, req.seed, req.support, margin);
  }
  if (n == "f1") {
    expect_k(1);
    return make_class_instance(TractabilityClass::F1, req.d, 1.0, 2.0, req.seed, 1, req.support, margin);
  }
  if (n.rfind("f2:", 0) == 0) {
    expect_k(1);
    int M = 0;
    try {
      M = std::stoi(n.substr(3));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad derivative order in model name " + n);
    }
    return make_class_instance(TractabilityClass::F2, req.d, 1.0, 2.0, req.seed, M, req.support, margin);
  }
  if (n == "f3") {
    expect_k(1);
    return make_class_instance(TractabilityClass::F3, req.d, 1.0, 2.0, req.seed, 1, req.support, margin);
  }
  if (auto K = sparse_suffix("linear:sparse")) {
    expect_k(1);
    DenseMatrix a = random_sparse_rows(1, req.d, *K, s);
    return make_ridge(n, a.row(0),
                      {[](double y) { return y; }, [](double) { return 1.0; }, [](double) { return 0.0; }},
                      margin);
  }
  if (auto K = sparse_suffix("cubic:sparse")) {
    expect_k(1);
    DenseMatrix a = random_sparse_rows(1, req.d, *K, s);
    return make_ridge(n, a.row(0),
                      {[](double y) { return y + y * y * y; }, [](double y) { return 1.0 + 3.0 * y * y; },
                       [](double y) { return 6.0 * y; }},
                      margin);
  }
  if (n == "sin-square") {
    expect_k(2);
    DenseMatrix A = random_sparse_rows(2, req.d, req.support, s);
    Link g;
    g.value = [](std::span<const double> y) { return std::sin(y[0]) + y[1] * y[1]; };
    g.gradient = [](std::span<const double> y) { return Vector{std::cos(y[0]), 2.0 * y[1]}; };
    g.hessian = [](std::span<const double> y) {
      DenseMatrix h(2, 2);
      h(0, 0) = -std::sin(y[0]);
      h(1, 1) = 2.0;
      return h;
    };
    return make_k_ridge(n, std::move(A), std::move(g), margin);
  }
  throw InvalidArgument("unknown model name: " + n);
}

}  // namespace ridgelearn
