#pragma once

// Symmetric matrices, block covariances, principal minors and the stacking
// (time-share) construction.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gentropy/linalg.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy {

// Dense real symmetric n x n matrix; symmetrized on construction so the two
// triangles can never disagree.
struct SymmetricMatrix {
  int n = 0;
  Matrix m;

  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int size) : n(size), m(Matrix::Zero(size, size)) {
    require_ground_set(size);
  }
  explicit SymmetricMatrix(const Matrix& dense)
      : n(static_cast<int>(dense.rows())), m(0.5 * (dense + dense.transpose())) {
    if (dense.rows() != dense.cols())
      throw std::invalid_argument("SymmetricMatrix: input not square");
    require_ground_set(n);
  }

  double operator()(int i, int j) const { return m(i, j); }
  void set(int i, int j, double v) { m(i, j) = v; m(j, i) = v; }

  static SymmetricMatrix identity(int size) {
    SymmetricMatrix s(size);
    s.m = Matrix::Identity(size, size);
    return s;
  }
};

// Symmetric nT x nT matrix viewed as an n x n grid of T x T blocks.
struct BlockCovariance {
  int n = 0;
  int T = 1;
  Matrix m;

  BlockCovariance() = default;
  BlockCovariance(int vars, int block_size)
      : n(vars), T(block_size), m(Matrix::Zero(vars * block_size, vars * block_size)) {
    require_ground_set(vars);
    if (block_size < 1) throw std::invalid_argument("BlockCovariance: T must be >= 1");
  }
  BlockCovariance(int vars, int block_size, Matrix dense)
      : n(vars), T(block_size), m(std::move(dense)) {
    require_ground_set(vars);
    if (block_size < 1) throw std::invalid_argument("BlockCovariance: T must be >= 1");
    if (m.rows() != n * T || m.cols() != n * T)
      throw std::invalid_argument("BlockCovariance: dense size != n*T");
    m = 0.5 * (m + m.transpose()).eval();
  }

  static BlockCovariance from_scalar(const SymmetricMatrix& a) {
    return BlockCovariance(a.n, 1, a.m);
  }

  Eigen::Block<const Matrix> block(int i, int j) const {
    return m.block(i * T, j * T, T, T);
  }
  Eigen::Block<Matrix> block(int i, int j) { return m.block(i * T, j * T, T, T); }

  // Submatrix keeping the block rows/columns indexed by s (1-based elements).
  Matrix submatrix(SubsetMask s) const {
    const auto els = elements_of(s);
    Matrix out(static_cast<Eigen::Index>(els.size()) * T,
               static_cast<Eigen::Index>(els.size()) * T);
    for (std::size_t bi = 0; bi < els.size(); ++bi)
      for (std::size_t bj = 0; bj < els.size(); ++bj)
        out.block(bi * T, bj * T, T, T) = block(els[bi] - 1, els[bj] - 1);
    return out;
  }
};

inline Matrix select_submatrix(const Matrix& a, SubsetMask s) {
  const auto els = elements_of(s);
  Matrix out(els.size(), els.size());
  for (std::size_t i = 0; i < els.size(); ++i)
    for (std::size_t j = 0; j < els.size(); ++j)
      out(i, j) = a(els[i] - 1, els[j] - 1);
  return out;
}

// det of the principal submatrix selected by s; minor of the empty set is 1.
inline double principal_minor(const SymmetricMatrix& a, SubsetMask s) {
  if (s == 0) return 1.0;
  return sym_det(select_submatrix(a.m, s));
}

inline double principal_minor(const BlockCovariance& r, SubsetMask s) {
  if (s == 0) return 1.0;
  return sym_det(r.submatrix(s));
}

template <class Mat>
SubsetVector all_principal_minors(const Mat& a) {
  SubsetVector out(a.n);
  for (SubsetMask s : enumerate_subsets(a.n)) out[s] = principal_minor(a, s);
  return out;
}

inline bool is_psd(const SymmetricMatrix& a, double tol = 1e-10) {
  return is_psd_matrix(a.m, tol);
}
inline bool is_psd(const BlockCovariance& r, double tol = 1e-10) {
  return is_psd_matrix(r.m, tol);
}

// Block-diagonal direct sum per variable: variable i of the result
// concatenates the stated copies of variable i from each part. Total block
// size is sum of multiplicity * T over parts, and the normalized entropy of
// the result is the corresponding convex combination of the parts'.
inline BlockCovariance stack(const std::vector<std::pair<BlockCovariance, int>>& parts) {
  if (parts.empty()) throw std::invalid_argument("stack: no parts");
  const int n = parts.front().first.n;
  int total_T = 0;
  for (const auto& [r, mult] : parts) {
    if (r.n != n) throw std::invalid_argument("stack: mismatched n");
    if (mult < 1) throw std::invalid_argument("stack: multiplicity must be >= 1");
    total_T += mult * r.T;
  }
  BlockCovariance out(n, total_T);
  int offset = 0;
  for (const auto& [r, mult] : parts) {
    for (int copy = 0; copy < mult; ++copy) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          out.m.block(i * total_T + offset, j * total_T + offset, r.T, r.T) =
              r.block(i, j);
      offset += r.T;
    }
  }
  return out;
}

}  // namespace gentropy
