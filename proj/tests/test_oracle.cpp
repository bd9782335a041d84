#include <cmath>

#include <gtest/gtest.h>

#include "ridgelearn/analysis.hpp"
#include "ridgelearn/oracle.hpp"

using namespace ridgelearn;

namespace {

Vector unit(std::size_t d, std::size_t i) {
  Vector e(d, 0.0);
  e[i] = 1.0;
  return e;
}

ScalarFunction identity_profile() {
  return {[](double y) { return y; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

ScalarFunction square_profile() {
  return {[](double r) { return r * r; }, [](double r) { return 2.0 * r; }, [](double) { return 2.0; }};
}

double max_defect(const DenseMatrix& A) {
  return frobenius_norm(subtract(matmul(A, A.transpose()), DenseMatrix::identity(A.rows())));
}

}  // namespace

TEST(evaluate, linear_model) {
  RidgeOracle o = make_ridge("lin", unit(5, 0), identity_profile());
  EXPECT_EQ(o.evaluate(unit(5, 0)), 1.0);
  EXPECT_EQ(o.evaluate(unit(5, 1)), 0.0);
}

TEST(evaluate, counts_every_query) {
  RidgeOracle o = make_ridge("lin", unit(5, 0), identity_profile());
  for (int i = 0; i < 17; ++i) o.evaluate(Vector(5, 0.1));
  EXPECT_EQ(o.query_count(), 17u);
  EXPECT_THROW(o.evaluate(Vector(5, 1.0)), DomainViolation);
  EXPECT_EQ(o.query_count(), 17u);
  o.reset_query_count();
  EXPECT_EQ(o.query_count(), 0u);
}

TEST(evaluate, rejects_wrong_dimension) {
  RidgeOracle o = make_ridge("lin", unit(5, 0), identity_profile());
  EXPECT_THROW(o.evaluate(Vector(4, 0.0)), InvalidArgument);
}

TEST(evaluate, noiseless_is_bit_identical) {
  RidgeOracle o = make_model({"sin-square", 30, 0, 5});
  Stream s(1);
  const Vector x = sample_sphere(30, 1, s)[0];
  const double v = o.evaluate(x);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(o.evaluate(x), v);
}

TEST(evaluate, bounded_noise_stays_in_range) {
  RidgeOracle o = make_ridge("lin", unit(5, 0), identity_profile()).with_noise({NoiseKind::bounded, 0.01}, Stream(3));
  const Vector x = unit(5, 0);
  double lo = 1.0, hi = 1.0;
  for (int i = 0; i < 5000; ++i) {
    const double v = o.evaluate(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(lo, 0.99);
  EXPECT_LE(hi, 1.01);
  EXPECT_LT(lo, 0.991);
  EXPECT_GT(hi, 1.009);
}

TEST(evaluate, gaussian_noise_level) {
  RidgeOracle o = make_ridge("lin", unit(5, 0), identity_profile()).with_noise({NoiseKind::gaussian, 0.1}, Stream(4));
  const int n = 20000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) sq += std::pow(o.evaluate(Vector(5, 0.0)), 2);
  EXPECT_NEAR(std::sqrt(sq / n), 0.1, 0.003);
}

TEST(oracle, rejects_non_orthonormal_rows) {
  DenseMatrix A(1, 3, {1.0, 1.0, 0.0});
  const Link g = scalar_link(identity_profile());
  ModelSpec spec{3, 1};
  EXPECT_THROW(RidgeOracle("bad", A, g, spec, Domain{}), InvalidArgument);
  EXPECT_THROW(make_cap_counterexample(Vector{1.0, 1.0}), InvalidArgument);
}

TEST(figure2, examples) {
  RidgeOracle o = make_figure2(10);
  Vector x(10, 0.5);
  EXPECT_EQ(o.evaluate(x), 1.0);
  x[2] = 0.6;
  EXPECT_NEAR(o.evaluate(x), 0.125, 1e-15);
  x[2] = 0.75;
  EXPECT_EQ(o.evaluate(x), 0.0);
  x[2] = 0.5;
  x[0] = x[1] = 0.0;  // inactive coordinates
  EXPECT_EQ(o.evaluate(x), 1.0);
  EXPECT_EQ(o.active_coordinates(), (std::vector<std::size_t>{2, 3}));
  EXPECT_THROW(make_figure2(3), InvalidArgument);
}

TEST(cap, examples) {
  const double c = 0.6, s = 0.8;
  const Vector a{c, s, 0.0};
  RidgeOracle o = make_cap_counterexample(a);
  EXPECT_NEAR(o.evaluate(a), 1.0, 1e-15);
  EXPECT_EQ(o.evaluate(Vector{-s, c, 0.0}), 0.0);
  EXPECT_EQ(o.evaluate(Vector{0.5 * c, 0.5 * s, 0.0}), 0.0);
  Vector x{0.75 * c, 0.75 * s, 0.0};
  EXPECT_NEAR(o.evaluate(x), 0.125, 1e-15);
}

TEST(radial, examples) {
  RidgeOracle o = make_radial(square_profile(), 2, 20, 3);
  EXPECT_EQ(o.evaluate(Vector(20, 0.0)), 0.0);
  EXPECT_NEAR(o.exact_value(matvec_transposed(o.A(), Vector{0.3, 0.4})), 0.25, 1e-14);
  ScalarFunction cone{[](double r) { return r; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
  EXPECT_THROW(make_radial(cone, 2, 20, 3), InvalidArgument);
}

TEST(radial, gradient_outer_product_matches_alpha) {
  const std::size_t k = 2, d = 12, n = 100000;
  RidgeOracle o = make_radial(square_profile(), k, d, 9);
  Stream s(10);
  const auto xs = sample_sphere(d, n, s);
  double H[2][2] = {{0, 0}, {0, 0}}, H2[2][2] = {{0, 0}, {0, 0}};
  for (const Vector& x : xs) {
    const Vector g = o.g().gradient(o.project(x));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        H[i][j] += g[i] * g[j] / n;
        H2[i][j] += g[i] * g[j] * g[i] * g[j] / n;
      }
  }
  const double alpha = alpha_radial([](double r) { return 2.0 * r; }, k, d);
  EXPECT_NEAR(alpha, 4.0 / d, 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((H2[i][j] - H[i][j] * H[i][j]) / n);
      EXPECT_NEAR(H[i][j], i == j ? alpha : 0.0, 3.0 * se);
    }
}

TEST(exact_gradient, matches_finite_differences) {
  RidgeOracle o = make_model({"sin-square", 40, 0, 2});
  Stream s(3);
  const Vector x = sample_sphere(40, 1, s)[0];
  const Vector grad = o.exact_gradient(x);
  const double h = 1e-6;
  for (std::size_t j : o.active_coordinates()) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    EXPECT_NEAR(grad[j], (o.exact_value(xp) - o.exact_value(xm)) / (2 * h), 1e-8);
  }
}

TEST(reduce_to_row_orthonormal, scaled_row) {
  const Link g = scalar_link({[](double y) { return y * y; }, [](double y) { return 2 * y; }, [](double) { return 2.0; }});
  DenseMatrix A(1, 4);
  A(0, 0) = 2.0;
  const ReducedModel r = reduce_to_row_orthonormal(A, g);
  EXPECT_NEAR(std::abs(r.A(0, 0)), 1.0, 1e-14);
  const double y = r.A(0, 0) * 0.3;
  EXPECT_NEAR(r.g.value(Vector{y}), g.value(Vector{0.6}), 1e-14);
}

TEST(reduce_to_row_orthonormal, random_two_by_ten) {
  Stream s(5);
  DenseMatrix A(2, 10);
  for (double& v : A.data()) v = s.normal();
  const Link g{[](std::span<const double> y) { return std::sin(y[0]) * y[1]; },
               [](std::span<const double> y) { return Vector{std::cos(y[0]) * y[1], std::sin(y[0])}; }, {}};
  const ReducedModel r = reduce_to_row_orthonormal(A, g);
  EXPECT_LE(max_defect(r.A), 1e-10);
  for (const Vector& x : sample_sphere(10, 100, s)) {
    EXPECT_NEAR(r.g.value(matvec(r.A, x)), g.value(matvec(A, x)), 1e-12);
    const Vector ga = matvec_transposed(r.A, r.g.gradient(matvec(r.A, x)));
    const Vector gb = matvec_transposed(A, g.gradient(matvec(A, x)));
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(ga[j], gb[j], 1e-12);
  }
  DenseMatrix deficient(2, 10);
  deficient(0, 0) = deficient(1, 0) = 1.0;
  EXPECT_THROW(reduce_to_row_orthonormal(deficient, g), InvalidArgument);
}

TEST(reduce_to_row_orthonormal, identifiable_up_to_rotation) {
  // Two factorizations of the same function: g(Ax) and (g o B^-1)(BAx).
  Stream s(6);
  DenseMatrix A(2, 10);
  for (double& v : A.data()) v = s.normal();
  const DenseMatrix B(2, 2, {2.0, 1.0, -0.5, 3.0});
  const double det = 2.0 * 3.0 + 0.5;
  const DenseMatrix Binv(2, 2, {3.0 / det, -1.0 / det, 0.5 / det, 2.0 / det});
  const Link g{[](std::span<const double> y) { return y[0] * y[0] + y[1]; }, {}, {}};
  const Link gb{[g, Binv](std::span<const double> y) { return g.value(matvec(Binv, y)); }, {}, {}};
  const ReducedModel r1 = reduce_to_row_orthonormal(A, g);
  const ReducedModel r2 = reduce_to_row_orthonormal(matmul(B, A), gb);
  EXPECT_LE(projection_distance(r1.A.transpose(), r2.A.transpose()), 1e-8);
  for (const Vector& x : sample_sphere(10, 20, s)) {
    EXPECT_NEAR(r1.g.value(matvec(r1.A, x)), r2.g.value(matvec(r2.A, x)), 1e-12);
  }
}

TEST(class_instance, f1_has_nonzero_slope_at_zero) {
  RidgeOracle o = make_class_instance(TractabilityClass::F1, 50, 1.0, 2.0, 1);
  const double h = 1e-5;
  EXPECT_GE(std::abs((o.g().value(Vector{h}) - o.g().value(Vector{-h})) / (2 * h)), 0.99);
  EXPECT_LE(lp_norm(o.A().row(0), 1.0), 2.0);
}

TEST(class_instance, f2_vanishing_derivatives) {
  const ScalarFunction g = class_profile(TractabilityClass::F2, 2);
  const double h = 1e-2;
  EXPECT_NEAR((g.value(h) - g.value(-h)) / (2 * h), 0.0, 1e-4);
  EXPECT_NEAR((g.value(h) - 2 * g.value(0) + g.value(-h)) / (h * h), 0.0, 1e-12);
  const double third = (g.value(2 * h) - 2 * g.value(h) + 2 * g.value(-h) - g.value(-2 * h)) / (2 * h * h * h);
  EXPECT_NEAR(third, 1.0, 1e-8);
  EXPECT_THROW(class_profile(TractabilityClass::F2, 0), InvalidArgument);
}

TEST(class_instance, f3_is_flat_at_zero) {
  const ScalarFunction g = class_profile(TractabilityClass::F3);
  const double h = 0.05;
  // Central differences of orders 1..6 from binomial stencils.
  for (int order = 1; order <= 6; ++order) {
    double acc = 0.0, binom = 1.0;
    for (int i = 0; i <= order; ++i) {
      acc += ((i % 2) ? -1.0 : 1.0) * binom * g.value((order / 2.0 - i) * h);
      binom = binom * (order - i) / (i + 1);
    }
    EXPECT_LT(std::abs(acc / std::pow(h, order)), 1e-8) << "order " << order;
  }
}

TEST(class_instance, rejects_bad_q) {
  EXPECT_THROW(make_class_instance(TractabilityClass::F1, 50, 1.5, 2.0, 1), InvalidArgument);
}

TEST(random_sparse_rows, orthonormal_and_sparse) {
  Stream s(7);
  const DenseMatrix A = random_sparse_rows(3, 500, 4, s);
  EXPECT_LE(max_defect(A), 1e-10);
  std::size_t nonzero = 0;
  for (double v : A.data()) nonzero += v != 0.0;
  EXPECT_LE(nonzero, 3u * 4u);
}

TEST(model_spec, constants) {
  RidgeOracle o = make_class_instance(TractabilityClass::F1, 30, 1.0, 2.0, 4);
  EXPECT_NEAR(o.spec().C1, lp_norm(o.A().row(0), 1.0), 1e-15);
  // sin on [-1.5, 1.5]: the largest of |sin|, |cos|, |sin| is cos(0) = 1.
  EXPECT_NEAR(o.spec().C2, 1.0, 1e-12);
  EXPECT_EQ(o.spec().bar_eps, 0.5);
}

TEST(make_model, registry) {
  for (const char* name : {"figure2", "cap", "radial:r2", "f1", "f2:2", "f3", "linear:sparse4", "cubic:sparse3",
                           "sin-square"}) {
    RidgeOracle o = make_model({name, 60, 0, 1});
    EXPECT_EQ(o.spec().d, 60u) << name;
    EXPECT_LE(max_defect(o.A()), 1e-10) << name;
  }
  EXPECT_THROW(make_model({"nope", 60, 0, 1}), InvalidArgument);
  EXPECT_THROW(make_model({"figure2", 60, 1, 1}), InvalidArgument);
  EXPECT_THROW(make_model({"linear:sparsex", 60, 0, 1}), InvalidArgument);
}

TEST(make_model, seeded) {
  EXPECT_EQ(make_model({"cubic:sparse4", 100, 0, 3}).A(), make_model({"cubic:sparse4", 100, 0, 3}).A());
  EXPECT_NE(make_model({"cubic:sparse4", 100, 0, 3}).A(), make_model({"cubic:sparse4", 100, 0, 4}).A());
}
