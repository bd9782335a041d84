#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ridgelearn/linalg.hpp"
#include "ridgelearn/random.hpp"

using namespace ridgelearn;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Stream s(seed);
  DenseMatrix m(r, c);
  for (double& v : m.data()) v = s.normal();
  return m;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double orthonormality_defect(const DenseMatrix& q) {
  return frobenius_norm(subtract(matmul(q.transpose(), q), DenseMatrix::identity(q.cols())));
}

}  // namespace

TEST(svd, identity) {
  const SvdResult r = svd(DenseMatrix::identity(3));
  for (double s : r.singular_values) EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(svd, diagonal_is_sorted_with_unit_factors) {
  const Vector d{1.0, 3.0, 2.0};
  const SvdResult r = svd(DenseMatrix::diagonal(d));
  EXPECT_NEAR(r.singular_values[0], 3.0, 1e-14);
  EXPECT_NEAR(r.singular_values[1], 2.0, 1e-14);
  EXPECT_NEAR(r.singular_values[2], 1.0, 1e-14);
  for (std::size_t j = 0; j < 3; ++j) {
    double big = 0.0;
    for (std::size_t i = 0; i < 3; ++i) big = std::max(big, std::abs(r.U(i, j)));
    EXPECT_NEAR(big, 1.0, 1e-14);
  }
}

TEST(svd, rank_one_outer_product) {
  Stream s(7);
  Vector a(20), g(15);
  for (double& v : a) v = s.normal();
  for (double& v : g) v = s.normal();
  const double na = norm2(a), ng = norm2(g);
  for (double& v : a) v /= na;
  for (double& v : g) v /= ng;
  DenseMatrix m(20, 15);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 15; ++j) m(i, j) = a[i] * g[j];
  const SvdResult r = svd(m);
  EXPECT_NEAR(r.singular_values[0], 1.0, 1e-12);
  EXPECT_LE(r.singular_values[1], 1e-10);
}

TEST(svd, matches_eigen_on_random_shapes) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{30, 10}, {10, 30}, {50, 80}, {1, 7}, {7, 1}, {25, 25}};
  std::uint64_t seed = 100;
  for (auto [r, c] : shapes) {
    const DenseMatrix m = random_matrix(r, c, seed++);
    const SvdResult ours = svd(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(m));
    const auto& sv = ref.singularValues();
    ASSERT_EQ(ours.singular_values.size(), static_cast<std::size_t>(sv.size()));
    for (Eigen::Index i = 0; i < sv.size(); ++i) EXPECT_NEAR(ours.singular_values[i], sv(i), 1e-10 * sv(0));
    EXPECT_LE(orthonormality_defect(ours.U), 1e-10);
    EXPECT_LE(orthonormality_defect(ours.V), 1e-10);
    // Reconstruction U diag(s) V^T.
    DenseMatrix us = ours.U;
    for (std::size_t i = 0; i < us.rows(); ++i)
      for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= ours.singular_values[j];
    EXPECT_LE(frobenius_norm(subtract(matmul(us, ours.V.transpose()), m)), 1e-10 * frobenius_norm(m));
  }
}

TEST(svd, rejects_bad_input) {
  EXPECT_THROW(svd(DenseMatrix()), InvalidArgument);
  DenseMatrix m(2, 2);
  m(0, 0) = NAN;
  EXPECT_THROW(svd(m), InvalidArgument);
}

TEST(svd, deterministic) {
  const DenseMatrix m = random_matrix(40, 12, 3);
  const SvdResult a = svd(m), b = svd(m);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.V, b.V);
  EXPECT_EQ(a.singular_values, b.singular_values);
}

TEST(best_k_term, examples) {
  EXPECT_EQ(best_k_term(Vector{3, -1, 2}, 2), (Vector{3, 0, 2}));
  const Vector x{0.5, -4, 2, 1};
  EXPECT_EQ(best_k_term(x, x.size()), x);
  EXPECT_EQ(best_k_term(Vector{1, 1, 1}, 1), (Vector{1, 0, 0}));
  EXPECT_THROW(best_k_term(Vector{1, 2}, 3), InvalidArgument);
}

TEST(best_k_term, keeps_largest_magnitudes) {
  const Vector x{-5, 1, 4, -2, 3};
  EXPECT_EQ(best_k_term(x, 3), (Vector{-5, 0, 4, 0, 3}));
}

TEST(lp_norm, examples) {
  EXPECT_DOUBLE_EQ(lp_norm(Vector{3, 4}, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(lp_norm(Vector{1, 1, 1, 1}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(lp_norm(Vector{1, -2}, INFINITY), 2.0);
  EXPECT_NEAR(lp_norm(Vector{1, 1}, 0.5), 4.0, 1e-14);
  EXPECT_THROW(lp_norm(Vector{1}, 0.0), InvalidArgument);
  EXPECT_THROW(lp_norm(Vector{NAN}, 2.0), InvalidArgument);
}

TEST(projection_distance, examples) {
  const DenseMatrix e1(2, 1, {1, 0}), e2(2, 1, {0, 1});
  const double h = 1.0 / std::numbers::sqrt2;
  const DenseMatrix diag(2, 1, {h, h});
  EXPECT_NEAR(projection_distance(e1, e1), 0.0, 1e-15);
  EXPECT_NEAR(projection_distance(e1, e2), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(projection_distance(e1, diag), 1.0, 1e-15);
  EXPECT_THROW(projection_distance(e1, DenseMatrix(3, 1)), InvalidArgument);
}

TEST(projection_distance, invariant_under_rotation_of_basis) {
  const SvdResult r = svd(random_matrix(30, 3, 11));
  const DenseMatrix V = r.U.left_columns(3);
  const DenseMatrix O = svd(random_matrix(3, 3, 12)).U;
  EXPECT_LE(projection_distance(V, matmul(V, O)), 1e-12);
}

TEST(cholesky, solves_spd_system) {
  const DenseMatrix b = random_matrix(6, 6, 5);
  DenseMatrix spd = matmul(b.transpose(), b);
  for (std::size_t i = 0; i < 6; ++i) spd(i, i) += 1.0;
  const DenseMatrix L = cholesky(spd);
  EXPECT_LE(frobenius_norm(subtract(matmul(L, L.transpose()), spd)), 1e-12 * frobenius_norm(spd));
  DenseMatrix neg = DenseMatrix::identity(2);
  neg(1, 1) = -1.0;
  EXPECT_THROW(cholesky(neg), NumericalFailure);
}

TEST(products, dimension_checks) {
  EXPECT_THROW(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), InvalidArgument);
  EXPECT_THROW(matvec(DenseMatrix(2, 3), Vector(2)), InvalidArgument);
  const DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(matvec(m, Vector{1, 0, -1}), (Vector{-2, -2}));
  EXPECT_EQ(matvec_transposed(m, Vector{1, 1}), (Vector{5, 7, 9}));
}
