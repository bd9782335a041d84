#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/random.hpp"

namespace ridgelearn {

/// Query-budget geometry of one recovery run.
struct SamplingPlan {
  std::size_t m_X = 0;     // sampling points
  std::size_t m_Phi = 0;   // finite-difference directions
  double epsilon = 0.1;    // finite-difference step
  std::uint64_t seed = 0;

  std::size_t queries() const { return m_X * (m_Phi + 1); }

  void validate() const {
    if (m_X < 1 || m_Phi < 1) throw InvalidArgument("SamplingPlan: m_X and m_Phi must be >= 1");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidArgument("SamplingPlan: epsilon must be positive");
    }
  }
};

/// m_Phi x d matrix with entries +-1/sqrt(m_Phi).
class DirectionMatrix {
 public:
  DirectionMatrix() = default;
  explicit DirectionMatrix(DenseMatrix signs_scaled) : matrix_(std::move(signs_scaled)) {}

  const DenseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t rows() const noexcept { return matrix_.rows(); }
  std::size_t cols() const noexcept { return matrix_.cols(); }
  std::span<const double> row(std::size_t i) const { return matrix_.row(i); }

  /// Euclidean norm shared by every row, sqrt(d / m_Phi).
  double row_norm() const {
    return std::sqrt(static_cast<double>(cols()) / static_cast<double>(rows()));
  }

 private:
  DenseMatrix matrix_;
};

/// Uniform points on S^{d-1} (normalised Gaussian vectors).
inline std::vector<Vector> sample_sphere(std::size_t d, std::size_t m_X, Stream& stream) {
  if (d < 1 || m_X < 1) throw InvalidArgument("sample_sphere: d and m_X must be >= 1");
  std::vector<Vector> points;
  points.reserve(m_X);
  for (std::size_t j = 0; j < m_X; ++j) {
    Vector x(d);
    double n = 0.0;
    do {
      for (double& v : x) v = stream.normal();
      n = norm2(x);
    } while (n == 0.0);
    for (double& v : x) v /= n;
    points.push_back(std::move(x));
  }
  return points;
}

/// Uniform points in the closed ball B(radius). Point j depends only on the
/// draws before it, so a longer request extends a shorter one.
inline std::vector<Vector> sample_ball(std::size_t d, std::size_t count, double radius, Stream& stream) {
  std::vector<Vector> pts;
  pts.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Vector p = std::move(sample_sphere(d, 1, stream).front());
    const double r = radius * std::pow(stream.uniform(), 1.0 / static_cast<double>(d));
    for (double& v : p) v *= r;
    pts.push_back(std::move(p));
  }
  return pts;
}

/// Uniform points in the cube [0,1]^d.
inline std::vector<Vector> sample_cube(std::size_t d, std::size_t count, Stream& stream) {
  std::vector<Vector> pts(count, Vector(d));
  for (auto& p : pts)
    for (double& v : p) v = stream.uniform();
  return pts;
}

/// Scaled Bernoulli direction matrix: fair-coin signs times 1/sqrt(m_Phi).
inline DirectionMatrix bernoulli_directions(std::size_t d, std::size_t m_Phi, Stream& stream) {
  if (d < 1 || m_Phi < 1) throw InvalidArgument("bernoulli_directions: d and m_Phi must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_Phi));
  DenseMatrix phi(m_Phi, d);
  for (double& v : phi.data()) v = stream.coin() ? scale : -scale;
  return DirectionMatrix(std::move(phi));
}

}  // namespace ridgelearn
