#pragma once

// Cayley 2x2x2 hyperdeterminant by two routes (monomial expansion and the
// det(B0 J B1^t - B1 J B0^t) formula), the det-F multilinear identity for
// principal-minor tensors, and the rank certificate that makes all partial
// derivatives of det F vanish.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gentropy/linalg.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy {

// 2^n real coefficients a_{i1...in} of a multilinear form of format
// 2 x ... x 2. Axis j corresponds to bit j-1 of the index mask, so
// coeffs[0b110] is a_{011} in axis order i1 i2 i3.
struct Tensor2n {
  int n = 0;
  std::vector<double> coeffs;

  Tensor2n() = default;
  explicit Tensor2n(int axes, double fill = 0.0)
      : n(axes), coeffs(std::size_t{1} << axes, fill) {
    require_ground_set(axes);
  }

  double& operator[](SubsetMask idx) { return coeffs[idx]; }
  double operator[](SubsetMask idx) const { return coeffs[idx]; }
};

// Tensor of all principal minors of a (not necessarily symmetric) square
// matrix, with the all-zero index set to 1 by convention.
inline Tensor2n minor_tensor(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  require_ground_set(n);
  if (a.rows() != a.cols()) throw std::invalid_argument("minor_tensor: not square");
  Tensor2n t(n);
  t[0] = 1.0;
  const bool symmetric = a.isApprox(a.transpose(), 0.0);
  for (SubsetMask s = 1; s <= full_mask(n); ++s) {
    const Matrix sub = select_submatrix(a, s);
    t[s] = symmetric ? sym_det(sub) : general_det(sub);
  }
  return t;
}

inline Tensor2n minor_tensor(const SymmetricMatrix& a) { return minor_tensor(a.m); }

// Pairs (x_{j,0}, x_{j,1}) assigned to each axis.
using XAssignment = std::vector<std::array<double, 2>>;

// The 12-monomial Cayley polynomial, signs exactly as in the classical
// expansion.
inline double cayley222(const Tensor2n& t) {
  if (t.n != 3) throw std::invalid_argument("cayley222: tensor must have 3 axes");
  const double a000 = t[0b000], a100 = t[0b001], a010 = t[0b010], a110 = t[0b011];
  const double a001 = t[0b100], a101 = t[0b101], a011 = t[0b110], a111 = t[0b111];
  return -a000 * a000 * a111 * a111 - a100 * a100 * a011 * a011 -
         a010 * a010 * a101 * a101 - a001 * a001 * a110 * a110 -
         4.0 * a000 * a110 * a101 * a011 - 4.0 * a100 * a010 * a001 * a111 +
         2.0 * a000 * a100 * a011 * a111 + 2.0 * a000 * a010 * a101 * a111 +
         2.0 * a000 * a001 * a110 * a111 + 2.0 * a100 * a010 * a101 * a011 +
         2.0 * a100 * a001 * a110 * a011 + 2.0 * a010 * a001 * a110 * a101;
}

// Largest absolute monomial of the Cayley expansion, for relative residuals.
inline double cayley222_scale(const Tensor2n& t) {
  if (t.n != 3) throw std::invalid_argument("cayley222_scale: tensor must have 3 axes");
  const double a000 = t[0b000], a100 = t[0b001], a010 = t[0b010], a110 = t[0b011];
  const double a001 = t[0b100], a101 = t[0b101], a011 = t[0b110], a111 = t[0b111];
  const double monomials[] = {
      a000 * a000 * a111 * a111, a100 * a100 * a011 * a011,
      a010 * a010 * a101 * a101, a001 * a001 * a110 * a110,
      4.0 * a000 * a110 * a101 * a011, 4.0 * a100 * a010 * a001 * a111,
      2.0 * a000 * a100 * a011 * a111, 2.0 * a000 * a010 * a101 * a111,
      2.0 * a000 * a001 * a110 * a111, 2.0 * a100 * a010 * a101 * a011,
      2.0 * a100 * a001 * a110 * a011, 2.0 * a010 * a001 * a110 * a101};
  double scale = 0.0;
  for (double m : monomials) scale = std::max(scale, std::abs(m));
  return scale;
}

// B0 J B1^t - B1 J B0^t; its determinant equals the Cayley polynomial.
inline Eigen::Matrix2d det_formula_222_matrix(const Tensor2n& t) {
  if (t.n != 3) throw std::invalid_argument("det_formula_222: tensor must have 3 axes");
  Eigen::Matrix2d b0, b1, j;
  b0 << t[0b000], t[0b001], t[0b100], t[0b101];  // [[a000,a100],[a001,a101]]
  b1 << t[0b010], t[0b011], t[0b110], t[0b111];  // [[a010,a110],[a011,a111]]
  j << 0, -1, 1, 0;
  return b0 * j * b1.transpose() - b1 * j * b0.transpose();
}

inline double det_formula_222(const Tensor2n& t) {
  return det_formula_222_matrix(t).determinant();
}

// F = diag(x_{1,0},...,x_{n,0}) + diag(x_{1,1},...,x_{n,1}) * A.
inline Matrix build_F(const Matrix& a, const XAssignment& x) {
  const int n = static_cast<int>(a.rows());
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("build_F: assignment size != n");
  Matrix f = Matrix::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    f.row(r) = x[r][1] * a.row(r);
    f(r, r) += x[r][0];
  }
  return f;
}

inline Matrix build_F(const SymmetricMatrix& a, const XAssignment& x) {
  return build_F(a.m, x);
}

// Direct 2^n-term evaluation of sum_idx t[idx] * prod_j x_{j, idx_j}.
inline double multilinear_eval(const Tensor2n& t, const XAssignment& x) {
  if (static_cast<int>(x.size()) != t.n)
    throw std::invalid_argument("multilinear_eval: assignment size != n");
  double total = 0.0;
  for (SubsetMask idx = 0; idx < (SubsetMask{1} << t.n); ++idx) {
    double term = t[idx];
    for (int j = 0; j < t.n; ++j) term *= x[j][(idx >> j) & 1u];
    total += term;
  }
  return total;
}

struct ZeroPivot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankCertificate {
  XAssignment x;
  int rank = 0;  // numeric rank of build_F(a, x)
};

// Assignment making rank(F) <= n-2 (so all partials of det F vanish):
// xbar_1 = ((a12 a13 - a11 a23)/a23, 1) and cyclic siblings, (1,0) beyond
// axis 3. Requires a12, a13, a23 nonzero.
inline RankCertificate rank_certificate(const SymmetricMatrix& a,
                                        double rank_threshold = 1e-9) {
  if (a.n < 3) throw std::invalid_argument("rank_certificate: n >= 3 required");
  const double a12 = a(0, 1), a13 = a(0, 2), a23 = a(1, 2);
  if (a12 == 0.0 || a13 == 0.0 || a23 == 0.0)
    throw ZeroPivot("rank_certificate: a12, a13, a23 must be nonzero");
  RankCertificate cert;
  cert.x.assign(a.n, {1.0, 0.0});
  cert.x[0] = {(a12 * a13 - a(0, 0) * a23) / a23, 1.0};
  cert.x[1] = {(a23 * a12 - a13 * a(1, 1)) / a13, 1.0};
  cert.x[2] = {(a13 * a23 - a12 * a(2, 2)) / a12, 1.0};
  cert.rank = numeric_rank(build_F(a, cert.x), rank_threshold);
  return cert;
}

// Literal cofactor evaluation of the det-F partial derivatives:
//   d det F / d x_{j,0} = det F_{alpha_j, alpha_j}
//   d det F / d x_{j,1} = sum_k a_{jk} (-1)^{j+k} det F_{alpha_j, alpha_k}
// with alpha_j = {1..n} \ {j}.
inline XAssignment partials_detF(const Matrix& a, const XAssignment& x) {
  const int n = static_cast<int>(a.rows());
  const Matrix f = build_F(a, x);
  auto drop = [&](int row, int col) {
    Matrix sub(n - 1, n - 1);
    for (int r = 0, rr = 0; r < n; ++r) {
      if (r == row) continue;
      for (int c = 0, cc = 0; c < n; ++c) {
        if (c == col) continue;
        sub(rr, cc++) = f(r, c);
      }
      ++rr;
    }
    return sub;
  };
  XAssignment out(n);
  for (int j = 0; j < n; ++j) {
    out[j][0] = general_det(drop(j, j));
    double d1 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double sign = ((j + k) % 2 == 0) ? 1.0 : -1.0;
      d1 += a(j, k) * sign * general_det(drop(j, k));
    }
    out[j][1] = d1;
  }
  return out;
}

inline XAssignment partials_detF(const SymmetricMatrix& a, const XAssignment& x) {
  return partials_detF(a.m, x);
}

// (m123 - m3 m12 - m2 m13 - m1 m23 + 2 m1 m2 m3)^2
//   - 4 (m1 m2 - m12)(m1 m3 - m13)(m2 m3 - m23),
// the compact hyperdeterminant identity with m_empty = 1.
inline double principal_minor_hyperdet_residual(const SubsetVector& m) {
  if (m.n != 3) throw std::invalid_argument("hyperdet residual: n must be 3");
  const double m1 = m[mask_of({1})], m2 = m[mask_of({2})], m3 = m[mask_of({3})];
  const double m12 = m[mask_of({1, 2})], m13 = m[mask_of({1, 3})],
               m23 = m[mask_of({2, 3})];
  const double m123 = m[mask_of({1, 2, 3})];
  const double lhs = m123 - m3 * m12 - m2 * m13 - m1 * m23 + 2.0 * m1 * m2 * m3;
  const double rhs = 4.0 * (m1 * m2 - m12) * (m1 * m3 - m13) * (m2 * m3 - m23);
  return lhs * lhs - rhs;
}

inline double principal_minor_hyperdet_scale(const SubsetVector& m) {
  if (m.n != 3) throw std::invalid_argument("hyperdet scale: n must be 3");
  const double m1 = m[mask_of({1})], m2 = m[mask_of({2})], m3 = m[mask_of({3})];
  const double m12 = m[mask_of({1, 2})], m13 = m[mask_of({1, 3})],
               m23 = m[mask_of({2, 3})];
  const double m123 = m[mask_of({1, 2, 3})];
  const double lhs_terms[] = {m123, m3 * m12, m2 * m13, m1 * m23,
                              2.0 * m1 * m2 * m3};
  double t = 0.0;
  for (double v : lhs_terms) t = std::max(t, std::abs(v));
  return std::max(t * t,
                  std::abs(4.0 * (m1 * m2 - m12) * (m1 * m3 - m13) * (m2 * m3 - m23)));
}

// Restriction of t to three axes with the remaining indices pinned at 0.
inline Tensor2n sub_tensor3(const Tensor2n& t, int axis1, int axis2, int axis3) {
  Tensor2n out(3);
  const std::array<int, 3> axes = {axis1, axis2, axis3};
  for (SubsetMask idx = 0; idx < 8; ++idx) {
    SubsetMask src = 0;
    for (int b = 0; b < 3; ++b)
      if ((idx >> b) & 1u) src |= SubsetMask{1} << (axes[b] - 1);
    out[idx] = t[src];
  }
  return out;
}

}  // namespace gentropy
