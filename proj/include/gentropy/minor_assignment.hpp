#pragma once

// Principal-minor assignment for symmetric matrices: the minimal condition
// sets (2^n - 1 - n(n+1)/2 equations), reconstruction with the
// first-row-positive sign gauge, and the Gaussian-entropic check obtained by
// exponentiating a g-vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gentropy/hyperdet.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy {

// Candidate vector A of 2^n - 1 values indexed by nonempty subsets;
// A_empty = 1 implicitly.
struct MinorCandidate {
  int n = 0;
  SubsetVector A;

  MinorCandidate() = default;
  explicit MinorCandidate(SubsetVector values) : n(values.n), A(std::move(values)) {}

  double value(SubsetMask s) const { return s == 0 ? 1.0 : A[s]; }
};

// c_{ijk} = A_{ijk} - A_i A_{jk} - A_j A_{ik} - A_k A_{ij} + 2 A_i A_j A_k.
// For minors of an actual symmetric matrix this equals 2 a_ij a_jk a_ik.
inline double c_value(const MinorCandidate& cand, int i, int j, int k) {
  if (i == j || j == k || i == k)
    throw std::invalid_argument("c_value: indices must be distinct");
  const double ai = cand.value(mask_of({i})), aj = cand.value(mask_of({j})),
               ak = cand.value(mask_of({k}));
  return cand.value(mask_of({i, j, k})) - ai * cand.value(mask_of({j, k})) -
         aj * cand.value(mask_of({i, k})) - ak * cand.value(mask_of({i, j})) +
         2.0 * ai * aj * ak;
}

struct DegenerateInput : std::runtime_error {
  int i = 0, j = 0;
  SubsetMask alpha = 0;
  bool boundary = false;  // true when the strict inequality holds but by < tol
  DegenerateInput(int ii, int jj, SubsetMask al, bool bnd)
      : std::runtime_error(std::string(bnd ? "degenerate-boundary" : "degenerate") +
                           " input: A_alpha*A_{ij|alpha} !< A_{i|alpha}*A_{j|alpha} " +
                           "for i=" + std::to_string(ii) + " j=" + std::to_string(jj) +
                           " alpha=" + subset_to_string(al)),
        i(ii), j(jj), alpha(al), boundary(bnd) {}
};

struct ZeroDenominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditionsFailed : std::runtime_error {
  double residual = 0.0;
  explicit ConditionsFailed(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

struct EquationResidual {
  enum class Type { PairSquare, TripleProduct, Determinant };
  Type type;
  std::vector<int> indices;  // {j,k}, {i,j,k}, or the chosen {i,j,k,l}
  SubsetMask beta = 0;       // the subset owning a Determinant equation
  double residual = 0.0;     // normalized by the equation's monomial scale
  bool pass = false;
  bool diagnostic = false;   // second-choice re-check, not counted
};

struct CheckReport {
  int n = 0;
  double tol = 0.0;
  std::vector<EquationResidual> equations;
  bool pass = false;
  std::size_t counted_equations() const {
    std::size_t c = 0;
    for (const auto& e : equations)
      if (!e.diagnostic) ++c;
    return c;
  }
  double max_residual() const {
    double r = 0.0;
    for (const auto& e : equations)
      if (!e.diagnostic) r = std::max(r, e.residual);
    return r;
  }
};

// C(n-1,2) + C(n-1,3) + sum_{m>=4} C(n,m) == 2^n - 1 - n(n+1)/2.
inline std::uint64_t minimal_equation_count(int n) {
  auto binom = [](int nn, int kk) {
    if (kk < 0 || kk > nn) return std::uint64_t{0};
    std::uint64_t r = 1;
    for (int i = 1; i <= kk; ++i) r = r * (nn - kk + i) / i;
    return r;
  };
  std::uint64_t total = binom(n - 1, 2) + binom(n - 1, 3);
  for (int m = 4; m <= n; ++m) total += binom(n, m);
  return total;
}

namespace detail {

// Pair gap A_i A_j - A_ij; strictly positive under nondegeneracy.
inline double pair_gap(const MinorCandidate& c, int i, int j) {
  return c.value(mask_of({i})) * c.value(mask_of({j})) - c.value(mask_of({i, j}));
}

inline void require_nondegenerate_pairs(const MinorCandidate& c, double tol) {
  for (int i = 1; i <= c.n; ++i)
    for (int j = i + 1; j <= c.n; ++j) {
      const double gap = pair_gap(c, i, j);
      const double scale = std::max({1.0, std::abs(c.value(mask_of({i})) * c.value(mask_of({j}))),
                                     std::abs(c.value(mask_of({i, j})))});
      if (gap <= -tol * scale) throw DegenerateInput(i, j, 0, false);
      if (gap <= tol * scale) throw DegenerateInput(i, j, 0, true);
    }
}

// Full condition A_alpha A_{ij|alpha} < A_{i|alpha} A_{j|alpha}.
inline void require_nondegenerate_full(const MinorCandidate& c, double tol) {
  for (int i = 1; i <= c.n; ++i)
    for (int j = i + 1; j <= c.n; ++j) {
      const SubsetMask ij = mask_of({i, j});
      const SubsetMask rest = set_complement(ij, c.n);
      for (SubsetMask alpha = 0;; alpha = (alpha - rest) & rest) {
        const double lhs = c.value(alpha) * c.value(alpha | ij);
        const double rhs = c.value(alpha | mask_of({i})) * c.value(alpha | mask_of({j}));
        const double gap = rhs - lhs;
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        if (gap <= -tol * scale) throw DegenerateInput(i, j, alpha, false);
        if (gap <= tol * scale) throw DegenerateInput(i, j, alpha, true);
        if (alpha == rest) break;
      }
    }
}

// Values of a 4-element sub-problem, indexed by a 4-bit mask over the
// canonical positions; used both directly (n = 4) and through the Schur
// substitution A_S -> A_{S|alpha} / A_alpha.
struct Quad {
  std::array<double, 16> a{};  // a[0] = 1
  std::array<int, 4> labels{};

  double c3(int p, int q, int r) const {
    const int bp = 1 << p, bq = 1 << q, br = 1 << r;
    return a[bp | bq | br] - a[bp] * a[bq | br] - a[bq] * a[bp | br] -
           a[br] * a[bp | bq] + 2.0 * a[bp] * a[bq] * a[br];
  }
  double gap(int p, int q) const {
    return a[1 << p] * a[1 << q] - a[(1 << p) | (1 << q)];
  }
};

inline Quad make_quad(const MinorCandidate& cand, const std::array<int, 4>& els,
                      SubsetMask alpha) {
  Quad q;
  q.labels = els;
  const double a_alpha = cand.value(alpha);
  if (a_alpha == 0.0)
    throw ZeroDenominator("A_alpha = 0 for alpha=" + subset_to_string(alpha));
  for (int s = 0; s < 16; ++s) {
    SubsetMask full = alpha;
    for (int b = 0; b < 4; ++b)
      if ((s >> b) & 1) full |= SubsetMask{1} << (els[b] - 1);
    q.a[s] = cand.value(full) / a_alpha;
  }
  return q;
}

// D residual of Eq. det4 generalized to a quad, with the unordered-pair
// convention {p,q} in the first three positions and {r,s} the complement
// (fixed by the pre-build determinant oracle). Returns (residual, scale).
inline std::pair<double, double> det4_residual(const Quad& q) {
  static constexpr int kPairs[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {1, 2, 0, 3}};
  double scale = 0.0;
  double sum = 0.0;
  for (const auto& pr : kPairs) {
    const int p = pr[0], qq = pr[1], r = pr[2], s = pr[3];
    const double g = q.gap(p, qq);
    if (g == 0.0) throw ZeroDenominator("vanishing pair gap in determinant equation");
    const double term = 0.5 * q.c3(p, qq, r) * q.c3(p, qq, s) / g;
    sum += term;
    scale = std::max(scale, std::abs(term));
  }
  double d = q.a[15] + sum;
  scale = std::max(scale, std::abs(q.a[15]));
  const double singles[4] = {q.a[1], q.a[2], q.a[4], q.a[8]};
  static constexpr int kTripleIdx[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  for (int p = 0; p < 4; ++p) {
    const double term = singles[p] * q.c3(kTripleIdx[p][0], kTripleIdx[p][1], kTripleIdx[p][2]);
    d -= term;
    scale = std::max(scale, std::abs(term));
  }
  const double prod4 = 2.0 * q.a[1] * q.a[2] * q.a[4] * q.a[8];
  d += prod4;
  scale = std::max(scale, std::abs(prod4));
  const double pairs2[3] = {q.a[3] * q.a[12], q.a[5] * q.a[10], q.a[6] * q.a[9]};
  for (double term : pairs2) {
    d -= term;
    scale = std::max(scale, std::abs(term));
  }
  return {d, std::max(scale, 1e-300)};
}

inline EquationResidual pair_square_residual(const MinorCandidate& c, int j, int k,
                                             double tol) {
  const double cjk = c_value(c, 1, j, k);
  const double lhs = cjk * cjk;
  const double rhs = 4.0 * pair_gap(c, 1, j) * pair_gap(c, 1, k) * pair_gap(c, j, k);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  EquationResidual e;
  e.type = EquationResidual::Type::PairSquare;
  e.indices = {1, j, k};
  e.residual = std::abs(lhs - rhs) / scale;
  e.pass = e.residual <= tol;
  return e;
}

inline EquationResidual triple_product_residual(const MinorCandidate& c, int i, int j,
                                                int k, double tol) {
  const double lhs = c_value(c, 1, i, j) * c_value(c, 1, i, k) * c_value(c, 1, j, k);
  const double rhs = 4.0 * pair_gap(c, 1, i) * pair_gap(c, 1, j) * pair_gap(c, 1, k) *
                     c_value(c, i, j, k);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  EquationResidual e;
  e.type = EquationResidual::Type::TripleProduct;
  e.indices = {i, j, k};
  e.residual = std::abs(lhs - rhs) / scale;
  e.pass = e.residual <= tol;
  return e;
}

inline EquationResidual determinant_residual(const MinorCandidate& c, SubsetMask beta,
                                             const std::array<int, 4>& chosen,
                                             double tol, bool diagnostic) {
  SubsetMask alpha = beta;
  for (int e : chosen) alpha &= ~(SubsetMask{1} << (e - 1));
  const Quad q = make_quad(c, chosen, alpha);
  const auto [d, scale] = det4_residual(q);
  EquationResidual e;
  e.type = EquationResidual::Type::Determinant;
  e.indices = {chosen[0], chosen[1], chosen[2], chosen[3]};
  e.beta = beta;
  e.residual = std::abs(d) / scale;
  e.pass = e.residual <= tol;
  e.diagnostic = diagnostic;
  return e;
}

}  // namespace detail

struct CheckOptions {
  // Re-check every |beta| > 4 determinant equation with a second, randomly
  // chosen index quadruple to expose an inconsistent canonical choice.
  bool diagnostic_second_choice = false;
  std::uint64_t diagnostic_seed = 1;
};

// The five n = 4 conditions: three pair-square (hyperdeterminant) equations,
// the c-sign consistency product, and the 4x4 determinant identity.
inline CheckReport check_n4(const MinorCandidate& cand, double tol = 1e-9) {
  if (cand.n != 4) throw std::invalid_argument("check_n4: n must be 4");
  detail::require_nondegenerate_pairs(cand, tol);
  CheckReport report;
  report.n = 4;
  report.tol = tol;
  report.equations.push_back(detail::pair_square_residual(cand, 2, 3, tol));
  report.equations.push_back(detail::pair_square_residual(cand, 2, 4, tol));
  report.equations.push_back(detail::pair_square_residual(cand, 3, 4, tol));
  report.equations.push_back(detail::triple_product_residual(cand, 2, 3, 4, tol));
  report.equations.push_back(
      detail::determinant_residual(cand, full_mask(4), {1, 2, 3, 4}, tol, false));
  report.pass = true;
  for (const auto& e : report.equations) report.pass = report.pass && e.pass;
  return report;
}

// General-n minimal conditions: C(n-1,2) pair-square equations over
// {2..n}, C(n-1,3) triple products, and one determinant residual per beta
// with |beta| >= 4 (canonical i<j<k<l = four smallest elements of beta).
inline CheckReport check_general(const MinorCandidate& cand, double tol = 1e-8,
                                 const CheckOptions& opts = {}) {
  if (cand.n < 4) throw std::invalid_argument("check_general: n must be >= 4");
  detail::require_nondegenerate_full(cand, tol);
  CheckReport report;
  report.n = cand.n;
  report.tol = tol;
  for (int j = 2; j <= cand.n; ++j)
    for (int k = j + 1; k <= cand.n; ++k)
      report.equations.push_back(detail::pair_square_residual(cand, j, k, tol));
  for (int i = 2; i <= cand.n; ++i)
    for (int j = i + 1; j <= cand.n; ++j)
      for (int k = j + 1; k <= cand.n; ++k)
        report.equations.push_back(detail::triple_product_residual(cand, i, j, k, tol));
  std::mt19937_64 rng(opts.diagnostic_seed);
  for (SubsetMask beta : enumerate_subsets(cand.n)) {
    if (cardinality(beta) < 4) continue;
    auto els = elements_of(beta);
    std::array<int, 4> chosen = {els[0], els[1], els[2], els[3]};
    report.equations.push_back(
        detail::determinant_residual(cand, beta, chosen, tol, false));
    if (opts.diagnostic_second_choice && els.size() > 4) {
      std::shuffle(els.begin(), els.end(), rng);
      std::array<int, 4> alt = {els[0], els[1], els[2], els[3]};
      std::sort(alt.begin(), alt.end());
      if (alt != chosen)
        report.equations.push_back(
            detail::determinant_residual(cand, beta, alt, tol, true));
    }
  }
  if (report.counted_equations() != minimal_equation_count(cand.n))
    throw std::logic_error("check_general: equation count mismatch");
  report.pass = true;
  for (const auto& e : report.equations)
    if (!e.diagnostic) report.pass = report.pass && e.pass;
  return report;
}

// Runs the conditions appropriate for n (n = 3 uses the compact
// hyperdeterminant residual; n <= 2 has no conditions).
inline CheckReport run_conditions(const MinorCandidate& cand, double tol,
                                  const CheckOptions& opts = {}) {
  if (cand.n == 4) return check_n4(cand, tol);
  if (cand.n >= 5) return check_general(cand, tol, opts);
  CheckReport report;
  report.n = cand.n;
  report.tol = tol;
  if (cand.n == 3) {
    detail::require_nondegenerate_pairs(cand, tol);
    EquationResidual e;
    e.type = EquationResidual::Type::PairSquare;
    e.indices = {1, 2, 3};
    e.residual = std::abs(principal_minor_hyperdet_residual(cand.A)) /
                 std::max(principal_minor_hyperdet_scale(cand.A), 1e-300);
    e.pass = e.residual <= tol;
    report.equations.push_back(e);
  }
  report.pass = true;
  for (const auto& e : report.equations) report.pass = report.pass && e.pass;
  return report;
}

// Reconstruction in the first-row-positive gauge:
//   a_ii = A_i, a_1j = +sqrt(A_1 A_j - A_1j),
//   a_jk = sign(c_1jk) sqrt(A_j A_k - A_jk) for 2 <= j < k.
// Conditions are checked first; the result is verified against the input by
// recomputing every principal minor.
inline SymmetricMatrix reconstruct(const MinorCandidate& cand, double tol = 1e-9,
                                   double verify_tol = 1e-8) {
  const int n = cand.n;
  if (n >= 3) {
    const CheckReport report = run_conditions(cand, tol);
    if (!report.pass)
      throw ConditionsFailed("reconstruct: minor-assignment conditions fail",
                             report.max_residual());
  }
  SymmetricMatrix a(n);
  for (int i = 1; i <= n; ++i) a.set(i - 1, i - 1, cand.value(mask_of({i})));
  if (n >= 2) {
    for (int j = 2; j <= n; ++j) {
      const double gap = detail::pair_gap(cand, 1, j);
      if (gap < 0.0) throw DegenerateInput(1, j, 0, false);
      a.set(0, j - 1, std::sqrt(gap));
    }
    for (int j = 2; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k) {
        const double gap = detail::pair_gap(cand, j, k);
        if (gap < 0.0) throw DegenerateInput(j, k, 0, false);
        const double sign = std::copysign(1.0, c_value(cand, 1, j, k));
        a.set(j - 1, k - 1, sign * std::sqrt(gap));
      }
  }
  const SubsetVector minors = all_principal_minors(a);
  for (SubsetMask s : enumerate_subsets(n)) {
    const double want = cand.A[s];
    const double got = minors[s];
    const double scale = std::max({std::abs(want), std::abs(got), 1.0});
    if (std::abs(want - got) > verify_tol * scale)
      throw ConditionsFailed("reconstruct: round-trip minor mismatch at " +
                                 subset_to_string(s),
                             std::abs(want - got) / scale);
  }
  return a;
}

struct GaussEntropicReport {
  CheckReport conditions;
  bool psd = false;
  bool pass = false;
  std::optional<SymmetricMatrix> reconstructed;
};

// A = exp(g) entrywise, conditions for the minor assignment, and (when they
// pass) the covariance requirement that the reconstructed matrix is PSD.
inline GaussEntropicReport gauss_entropic_check(const SubsetVector& g,
                                                double tol = 1e-8,
                                                double psd_tol = 1e-10) {
  for (double v : g.entries)
    if (!std::isfinite(v))
      throw std::invalid_argument("gauss_entropic_check: g entries must be finite");
  SubsetVector a(g.n);
  for (SubsetMask s : enumerate_subsets(g.n)) a[s] = std::exp(g[s]);
  MinorCandidate cand(a);
  GaussEntropicReport out;
  out.conditions = run_conditions(cand, tol);
  if (out.conditions.pass) {
    SymmetricMatrix m = reconstruct(cand, tol);
    out.psd = is_psd(m, psd_tol);
    out.reconstructed = std::move(m);
  }
  out.pass = out.conditions.pass && out.psd;
  return out;
}

}  // namespace gentropy
