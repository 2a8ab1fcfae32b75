#pragma once

// Small dense linear-algebra kernels shared by the library. Symmetric
// determinants go through LAPACK's Bunch-Kaufman factorization (LDL^t with
// diagonal pivoting); everything else is Eigen.

#include <Eigen/Dense>
#include <lapacke.h>

#include <stdexcept>
#include <vector>

namespace gentropy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// det of a symmetric matrix via P^t A P = L D L^t. D is block diagonal with
// 1x1 and 2x2 blocks (2x2 when ipiv[k] < 0), and det(A) = det(D).
inline double sym_det(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Matrix f = a;
  std::vector<lapack_int> ipiv(n);
  lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, f.data(), n, ipiv.data());
  if (info < 0) throw std::runtime_error("dsytrf: illegal argument");
  double det = 1.0;
  for (int i = 0; i < n;) {
    if (ipiv[i] > 0) {
      det *= f(i, i);
      ++i;
    } else {
      det *= f(i, i) * f(i + 1, i + 1) - f(i + 1, i) * f(i + 1, i);
      i += 2;
    }
  }
  return det;
}

// det of a general square matrix (LU with partial pivoting).
inline double general_det(const Matrix& a) {
  if (a.rows() == 0) return 1.0;
  if (a.rows() == 1) return a(0, 0);
  if (a.rows() == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return Eigen::PartialPivLU<Matrix>(a).determinant();
}

inline Vector sym_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// true iff lambda_min >= -tol * (1 + |lambda|_max)
inline bool is_psd_matrix(const Matrix& a, double tol) {
  if (tol < 0) throw std::invalid_argument("is_psd: tol must be >= 0");
  Vector w = sym_eigenvalues(0.5 * (a + a.transpose()));
  const double lo = w.minCoeff();
  const double mag = std::max(std::abs(lo), std::abs(w.maxCoeff()));
  return lo >= -tol * (1.0 + mag);
}

// numeric rank: count of singular values > threshold * sigma_max
inline int numeric_rank(const Matrix& a, double threshold = 1e-9) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = threshold * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

// Clip eigenvalues of a symmetric matrix from below.
inline Matrix clip_eigenvalues(const Matrix& a, double floor_value) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  Vector w = es.eigenvalues();
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::max(w(i), floor_value);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace gentropy
