#pragma once

// Shannon basic inequalities, balancedness, Ingleton evaluation, and the
// 4-variable epsilon/a covariance family that violates Ingleton.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gentropy/entropy.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy {

// gamma_s coefficients of a linear entropy functional sum_s gamma_s H_s.
struct LinearFunctional {
  int n = 0;
  SubsetVector coeffs;

  LinearFunctional() = default;
  explicit LinearFunctional(int ground_set) : n(ground_set), coeffs(ground_set) {}
};

inline double element_marginal(const LinearFunctional& f, int element) {
  double sum = 0.0;
  for (SubsetMask s : enumerate_subsets(f.n))
    if (contains(s, element)) sum += f.coeffs[s];
  return sum;
}

// Balanced: for every element i, sum of gamma_s over s containing i is 0.
inline bool is_balanced(const LinearFunctional& f, double tol = 1e-12) {
  for (int i = 1; i <= f.n; ++i)
    if (std::abs(element_marginal(f, i)) > tol) return false;
  return true;
}

struct ShannonViolation {
  enum class Kind { Monotonicity, Submodularity };
  Kind kind;
  SubsetMask s;       // s subset of t for monotonicity; arbitrary pair otherwise
  SubsetMask t;
  double slack;       // amount by which the inequality fails (> 0)
};

struct ShannonReport {
  double tol = 0.0;
  std::vector<ShannonViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks monotonicity H_s <= H_t for s in t and submodularity
// H_{s|t} + H_{s&t} <= H_s + H_t over all pairs. The H_empty = 0 convention
// enters through pairs with empty intersection. All pairs are enumerated
// (O(4^n)); fine for n <= 8.
inline ShannonReport check_shannon(const SubsetVector& h, double tol = 1e-9) {
  ShannonReport report;
  report.tol = tol;
  auto value = [&](SubsetMask s) { return s == 0 ? 0.0 : h[s]; };
  const SubsetMask top = full_mask(h.n);
  for (SubsetMask s = 1; s <= top; ++s) {
    // proper supersets of s
    for (SubsetMask t = s + 1; t <= top; ++t) {
      if ((s & t) == s) {
        const double slack = value(s) - value(t);
        if (slack > tol)
          report.violations.push_back(
              {ShannonViolation::Kind::Monotonicity, s, t, slack});
      }
    }
    for (SubsetMask t = s; t <= top; ++t) {
      const double slack = value(s | t) + value(s & t) - value(s) - value(t);
      if (slack > tol)
        report.violations.push_back(
            {ShannonViolation::Kind::Submodularity, s, t, slack});
    }
  }
  return report;
}

// Ingleton expression on a rank/entropy vector:
//   r_{s1} + r_{s2} + r_{s1|s2|s3} + r_{s1|s2|s4} + r_{s3|s4}
//   - r_{s1|s2} - r_{s1|s3} - r_{s1|s4} - r_{s2|s3} - r_{s2|s4}.
// <= 0 is the Ingleton inequality; > 0 is a violation.
inline double ingleton_value(const SubsetVector& g,
                             const std::array<SubsetMask, 4>& s) {
  const auto [s1, s2, s3, s4] = s;
  return g[s1] + g[s2] + g[s1 | s2 | s3] + g[s1 | s2 | s4] + g[s3 | s4] -
         g[s1 | s2] - g[s1 | s3] - g[s1 | s4] - g[s2 | s3] - g[s2 | s4];
}

inline LinearFunctional ingleton_functional(int n, const std::array<SubsetMask, 4>& s) {
  LinearFunctional f(n);
  const auto [s1, s2, s3, s4] = s;
  f.coeffs[s1] += 1; f.coeffs[s2] += 1;
  f.coeffs[s1 | s2 | s3] += 1; f.coeffs[s1 | s2 | s4] += 1; f.coeffs[s3 | s4] += 1;
  f.coeffs[s1 | s2] -= 1;
  f.coeffs[s1 | s3] -= 1; f.coeffs[s1 | s4] -= 1;
  f.coeffs[s2 | s3] -= 1; f.coeffs[s2 | s4] -= 1;
  return f;
}

inline std::array<SubsetMask, 4> singleton_quad() {
  return {mask_of({1}), mask_of({2}), mask_of({3}), mask_of({4})};
}

// The 4x4 covariance with unit diagonal, (1,2) = eps, (i,j) = a for
// i in {1,2}, j in {3,4}, and (3,4) = 0.
struct IngletonFamilyPoint {
  double epsilon = 0.0;
  double a = 0.0;
};

inline SymmetricMatrix ingleton_family_matrix(const IngletonFamilyPoint& p) {
  SymmetricMatrix m(4);
  m.m = Matrix::Identity(4, 4);
  m.set(0, 1, p.epsilon);
  m.set(0, 2, p.a); m.set(0, 3, p.a);
  m.set(1, 2, p.a); m.set(1, 3, p.a);
  return m;
}

// PSD feasibility of the family: 0 <= a^2 <= 0.5 and 4a^2 - 1 <= eps <= 1.
enum class FamilyFeasibility { Infeasible, Boundary, Feasible };

inline FamilyFeasibility family_feasibility(const IngletonFamilyPoint& p,
                                            double tol = 1e-10) {
  const double a2 = p.a * p.a;
  const double margins[] = {0.5 - a2, p.epsilon - (4.0 * a2 - 1.0), 1.0 - p.epsilon};
  double lo = margins[0];
  for (double m : margins) lo = std::min(lo, m);
  if (lo < -tol) return FamilyFeasibility::Infeasible;
  if (lo <= tol) return FamilyFeasibility::Boundary;
  return FamilyFeasibility::Feasible;
}

struct InfeasiblePoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict form of the family's violation inequality,
//   (1-eps)/(1+eps) > ((1-2a^2+a^4)/(1-2a^2+eps))^2.
// Strictness matches "ingleton_value > 0 means violation": at eps = a = 0
// both sides are 1 and there is no violation. Evaluated in IEEE arithmetic;
// where the right-hand denominator vanishes the quotient is +inf and the
// predicate is false, consistent with the g-domain sign away from the PSD
// boundary.
inline bool ingleton_violation_predicate(const IngletonFamilyPoint& p,
                                         double feas_tol = 1e-10) {
  if (family_feasibility(p, feas_tol) == FamilyFeasibility::Infeasible)
    throw InfeasiblePoint("point outside the PSD-feasible (epsilon, a^2) region");
  const double a2 = p.a * p.a;
  const double lhs = (1.0 - p.epsilon) / (1.0 + p.epsilon);
  const double ratio = (1.0 - 2.0 * a2 + a2 * a2) / (1.0 - 2.0 * a2 + p.epsilon);
  return lhs > ratio * ratio;
}

// Polynomial form of the same comparison (minor-ratio >= 1 cleared of
// denominators): (1-2a^2-eps^2+2 eps a^2)^2 vs (1-eps^2)(1-a^2)^4.
inline double ingleton_violation_margin(const IngletonFamilyPoint& p) {
  const double a2 = p.a * p.a;
  const double num = 1.0 - 2.0 * a2 - p.epsilon * p.epsilon + 2.0 * p.epsilon * a2;
  const double den = (1.0 - p.epsilon * p.epsilon) * std::pow(1.0 - a2, 4);
  return num * num - den;
}

struct SweepCell {
  double epsilon;
  double a2;
  FamilyFeasibility feasibility;
  bool violates;       // meaningful when not Infeasible
  double ingleton_value;  // g-domain value; NaN when minors are not positive
};

// Rasterizes [-1,1] x [0,0.5] with `resolution` points per axis (inclusive
// endpoints), row order (epsilon asc, a2 asc).
inline std::vector<SweepCell> ingleton_sweep(int resolution, double psd_tol = 1e-10) {
  if (resolution < 2) throw std::invalid_argument("ingleton_sweep: resolution >= 2");
  std::vector<SweepCell> cells;
  cells.reserve(static_cast<std::size_t>(resolution) * resolution);
  const auto quad = singleton_quad();
  for (int ie = 0; ie < resolution; ++ie) {
    const double eps = -1.0 + 2.0 * ie / (resolution - 1);
    for (int ia = 0; ia < resolution; ++ia) {
      const double a2 = 0.5 * ia / (resolution - 1);
      IngletonFamilyPoint p{eps, std::sqrt(a2)};
      SweepCell cell{eps, a2, family_feasibility(p, psd_tol), false,
                     std::numeric_limits<double>::quiet_NaN()};
      if (cell.feasibility != FamilyFeasibility::Infeasible) {
        cell.violates = ingleton_violation_predicate(p, psd_tol);
        try {
          const auto g = entropy_g(ingleton_family_matrix(p));
          cell.ingleton_value = ingleton_value(g.data, quad);
        } catch (const NonPositiveMinor&) {
          // singular minor on the PSD boundary; value stays NaN
        }
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace gentropy
