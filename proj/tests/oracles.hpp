#pragma once

// Test-only oracles, independent of the library's computation paths:
// cofactor-expansion determinants, central finite differences, and seeded
// random matrix generators.

#include <array>
#include <cstdint>
#include <random>

#include "gentropy/linalg.hpp"
#include "gentropy/matrices.hpp"

namespace oracle {

using gentropy::Matrix;

// Plain cofactor expansion along the first row; exponential cost, n <= 8.
inline double cofactor_det(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  double det = 0.0;
  for (int c = 0; c < n; ++c) {
    Matrix sub(n - 1, n - 1);
    for (int i = 1; i < n; ++i) {
      int cc = 0;
      for (int j = 0; j < n; ++j) {
        if (j == c) continue;
        sub(i - 1, cc++) = a(i, j);
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * a(0, c) * cofactor_det(sub);
  }
  return det;
}

template <class F>
double central_diff(F f, double x, double step = 1e-6) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  double gauss() { return std::normal_distribution<double>(0.0, 1.0)(engine); }

  Matrix gauss_matrix(int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = gauss();
    return m;
  }

  // symmetric with entries ~ N(0,1)
  Matrix symmetric(int n) {
    Matrix g = gauss_matrix(n, n);
    return 0.5 * (g + g.transpose());
  }

  // symmetric with |off-diagonal| >= floor_off
  Matrix symmetric_bounded_off(int n, double floor_off) {
    Matrix m = symmetric(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = m(i, j);
        if (std::abs(v) < floor_off) v = v < 0.0 ? -floor_off : floor_off;
        m(i, j) = m(j, i) = v;
      }
    return m;
  }

  // positive definite G G^t + ridge I
  Matrix spd(int n, double ridge = 0.5) {
    Matrix g = gauss_matrix(n, n);
    return g * g.transpose() + ridge * Matrix::Identity(n, n);
  }

  // positive definite with lambda_min >= 1, so g-vectors are monotone
  Matrix spd_conditioned(int n) {
    Matrix g = gauss_matrix(n, n);
    return g * g.transpose() + Matrix::Identity(n, n);
  }

  Matrix orthogonal(int n) {
    Eigen::HouseholderQR<Matrix> qr(gauss_matrix(n, n));
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
      if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
  }
};

}  // namespace oracle
