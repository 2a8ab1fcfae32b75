#pragma once

// The 3-variable Gaussian entropy region: the f(delta)/y(delta) special
// functions and their seven-case profile, the conjectured region classifier,
// block-orthogonal boundary covariances, determinant bounds, convex-cone
// achievability, and the KKT residual / log-det ascent used to probe the
// boundary structure empirically.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "gentropy/entropy.hpp"
#include "gentropy/inequalities.hpp"
#include "gentropy/linalg.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// (x1, x2, x3) in (0,1]^3, stored sorted ascending with the original
// positions retained.
struct XTriple {
  std::array<double, 3> x{};    // ascending
  std::array<int, 3> position{};  // x[i] came from input slot position[i] (0-based)

  XTriple(double a, double b, double c) {
    const double in[3] = {a, b, c};
    for (int i = 0; i < 3; ++i) {
      double v = in[i];
      if (v > 1.0 && v <= 1.0 + 1e-12) v = 1.0;  // forgive boundary rounding
      if (!(v > 0.0) || v > 1.0)
        throw std::invalid_argument("XTriple: values must lie in (0,1]");
      x[i] = v;
      position[i] = i;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (x[j] < x[i]) {
          std::swap(x[i], x[j]);
          std::swap(position[i], position[j]);
        }
  }
};

namespace detail3 {

// u_l = 1 - x_l^delta, computed without cancellation.
inline std::array<double, 3> one_minus_pow(const XTriple& t, double delta) {
  std::array<double, 3> u;
  for (int i = 0; i < 3; ++i) u[i] = -std::expm1(delta * std::log(t.x[i]));
  return u;
}

// log of e_plus(delta) = -2 + sum x^delta + 2 sqrt(prod(1 - x^delta)),
// or -inf when e_plus <= 0. Two routes: the direct sum where it is well
// conditioned, and e = (x1 x2)^delta - (sqrt(u1 u2) - sqrt(u3))^2 in logs
// when the direct sum cancels to noise.
inline double log_e_plus(const XTriple& t, double delta) {
  const auto u = one_minus_pow(t, delta);
  const double direct = -(u[0] + u[1] + u[2]) + 2.0 * std::sqrt(u[0] * u[1] * u[2]);
  if (1.0 + direct > 1e-8) return std::log1p(direct);
  const double tt = delta * (std::log(t.x[0]) + std::log(t.x[1]));
  const double d = std::sqrt(u[0] * u[1]) - std::sqrt(u[2]);
  if (d == 0.0) return tt;
  const double q = 2.0 * std::log(std::abs(d)) - tt;
  if (q >= 0.0) return -kInf;
  return tt + std::log1p(-std::exp(q));
}

inline double e_minus(const XTriple& t, double delta) {
  const auto u = one_minus_pow(t, delta);
  return 1.0 - (u[0] + u[1] + u[2]) - 2.0 * std::sqrt(u[0] * u[1] * u[2]);
}

}  // namespace detail3

// f(delta) = (max[0, -2 + sum x_l^delta + 2 sqrt(prod(1 - x_l^delta))])^(1/delta)
inline double f_eval(const XTriple& t, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("f_eval: delta must be > 0");
  const double le = detail3::log_e_plus(t, delta);
  if (le == -kInf) return 0.0;
  return std::exp(le / delta);
}

// y(delta) = (x1 x2)^delta + x3^delta - x1^delta - x2^delta on the sorted
// triple; grouped through expm1 so near-1 values do not cancel.
inline double y_eval(const XTriple& t, double delta) {
  if (delta < 0.0) throw std::invalid_argument("y_eval: delta must be >= 0");
  const double l1 = std::log(t.x[0]), l2 = std::log(t.x[1]), l3 = std::log(t.x[2]);
  return std::exp(delta * l1) * std::expm1(delta * l2) -
         std::exp(delta * l3) * std::expm1(delta * (l2 - l3));
}

// y(1), the quantity whose sign picks the region branch.
inline double y_tilde(const XTriple& t) { return y_eval(t, 1.0); }

enum class DeltaLocation { Finite, ZeroPlus, Infinity, Everywhere };

struct FDeltaProfile {
  int case_id = 0;  // appendix scenarios 1..7
  DeltaLocation location = DeltaLocation::Finite;
  double delta0 = 0.0;  // finite root of y when location == Finite
  double sup_f = 0.0;   // min_{i != j} x_i x_j in every case
  bool attained = false;
};

namespace detail3 {

// Unique positive root of y for the two strict-interior cases; y < 0 below
// the root and > 0 above it.
inline double bisect_y_root(const XTriple& t) {
  double lo = 1.0;
  while (y_eval(t, lo) >= 0.0 && lo > 1e-280) lo *= 0.5;
  double hi = std::max(2.0 * lo, 1.0);
  while (y_eval(t, hi) <= 0.0 && hi < 1e280) hi *= 2.0;
  for (int it = 0; it < 400 && (hi - lo) > 1e-12 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (y_eval(t, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail3

// Classification into the seven appendix scenarios by the multiplicity
// pattern of (x1, x2, x3, 1); ties use tie_tol.
inline FDeltaProfile f_profile(const XTriple& t, double tie_tol = 1e-12) {
  const double x1 = t.x[0], x2 = t.x[1], x3 = t.x[2];
  auto same = [&](double a, double b) { return b - a <= tie_tol; };
  FDeltaProfile p;
  p.sup_f = x1 * x2;
  if (same(x3, 1.0)) {
    if (same(x2, 1.0)) {
      p.case_id = 7;  // f constant, equal to x1 everywhere
      p.location = DeltaLocation::Everywhere;
      p.delta0 = std::numeric_limits<double>::quiet_NaN();
      p.sup_f = x1;
      p.attained = true;
    } else {
      p.case_id = same(x1, x2) ? 6 : 5;
      p.location = DeltaLocation::ZeroPlus;
      p.delta0 = 0.0;
      p.attained = false;
    }
    return p;
  }
  if (same(x2, x3)) {
    p.case_id = same(x1, x2) ? 4 : 3;
    p.location = DeltaLocation::Infinity;
    p.delta0 = kInf;
    p.attained = false;
    return p;
  }
  p.case_id = same(x1, x2) ? 2 : 1;
  p.location = DeltaLocation::Finite;
  p.delta0 = detail3::bisect_y_root(t);
  p.attained = true;
  return p;
}

// The six inequalities cutting out the continuous (Shannon) region for
// n = 3: g_ij <= g_i + g_j and g_123 + g_k <= g_ik + g_jk.
inline bool check_continuous3(const SubsetVector& g, double tol = 1e-12) {
  if (g.n != 3) throw std::invalid_argument("check_continuous3: n must be 3");
  const double g1 = g[mask_of({1})], g2 = g[mask_of({2})], g3 = g[mask_of({3})];
  const double g12 = g[mask_of({1, 2})], g13 = g[mask_of({1, 3})],
               g23 = g[mask_of({2, 3})];
  const double g123 = g[mask_of({1, 2, 3})];
  return g12 <= g1 + g2 + tol && g13 <= g1 + g3 + tol && g23 <= g2 + g3 + tol &&
         g123 + g1 <= g12 + g13 + tol && g123 + g2 <= g12 + g23 + tol &&
         g123 + g3 <= g13 + g23 + tol;
}

// Conjectured 3-variable Gaussian region. The verdict depends on Conjecture
// territory whenever y_tilde > 0 and is labeled CONJECTURAL at every output
// surface.
struct RegionVerdict {
  enum class Zone { Inside, Outside, Boundary };
  Zone zone = Zone::Outside;
  bool pairwise_ok = false;
  bool tighter_branch = false;  // y_tilde > 0, Eq. tighter123 bound applies
  double y_tilde = 0.0;
  double bound_g123 = 0.0;  // may be -inf on the tighter branch
  std::array<double, 3> x{};  // x_k = exp(g_ij - g_i - g_j), k = 1,2,3
};

inline RegionVerdict conjectured_region_classify(const SubsetVector& g,
                                                 double tol = 1e-9) {
  if (g.n != 3) throw std::invalid_argument("classify: n must be 3");
  const double gi[3] = {g[mask_of({1})], g[mask_of({2})], g[mask_of({3})]};
  const double gpair[3] = {g[mask_of({2, 3})], g[mask_of({1, 3})],
                           g[mask_of({1, 2})]};  // pair opposite k
  const double g123 = g[mask_of({1, 2, 3})];
  RegionVerdict v;
  v.pairwise_ok = true;
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    if (gpair[k] > gi[i] + gi[j] + tol) v.pairwise_ok = false;
    v.x[k] = std::exp(gpair[k] - gi[i] - gi[j]);
  }
  if (!v.pairwise_ok) {
    v.zone = RegionVerdict::Zone::Outside;
    v.bound_g123 = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  XTriple t(std::min(v.x[0], 1.0), std::min(v.x[1], 1.0), std::min(v.x[2], 1.0));
  v.y_tilde = y_tilde(t);
  if (v.y_tilde <= 0.0) {
    v.tighter_branch = false;
    double bound = kInf;
    for (int j = 0; j < 3; ++j) {
      const int i = (j + 1) % 3, k = (j + 2) % 3;
      bound = std::min(bound, gpair[k] + gpair[i] - gi[j]);  // g_ij + g_jk - g_j
    }
    v.bound_g123 = bound;
  } else {
    v.tighter_branch = true;
    const double le = detail3::log_e_plus(t, 1.0);
    v.bound_g123 = (le == -kInf) ? -kInf : gi[0] + gi[1] + gi[2] + le;
  }
  const double gap = g123 - v.bound_g123;  // +inf when bound is -inf
  if (gap > tol)
    v.zone = RegionVerdict::Zone::Outside;
  else if (gap < -tol)
    v.zone = RegionVerdict::Zone::Inside;
  else
    v.zone = RegionVerdict::Zone::Boundary;
  return v;
}

struct NotPSD : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Block-orthogonal boundary covariance: a That-sized coupled part with
// off-blocks alpha_ij Phi_ij plus a (T - That)-sized independent diagonal
// part per variable.
struct BoundaryCovarianceSpec {
  double a11 = 1.0, a22 = 1.0, a33 = 1.0;
  double a12 = 0.0, a13 = 0.0, a23 = 0.0;
  int T = 1;
  int That = 1;
  Matrix phi12, phi23;  // That x That orthogonal; empty means identity
  enum class Phi13Mode {
    Extremal,       // Phi13 = sign(a12 a13 a23) Phi12 Phi23 (upper det bound)
    LowerExtremal,  // Phi13 = -sign(a12 a13 a23) Phi12 Phi23 (lower det bound)
    Rotation        // Phi13 = R(psi) Phi12 Phi23, That even
  };
  Phi13Mode mode = Phi13Mode::Extremal;
  double psi = 0.0;

  double sign_product() const {
    const double p = a12 * a13 * a23;
    return p >= 0.0 ? 1.0 : -1.0;
  }
};

namespace detail3 {

inline Matrix rotation_blocks(int size, double psi) {
  if (size % 2 != 0)
    throw std::invalid_argument("rotation interpolation requires even That");
  Matrix r = Matrix::Zero(size, size);
  const double c = std::cos(psi), s = std::sin(psi);
  for (int b = 0; b < size / 2; ++b) {
    r(2 * b, 2 * b) = c;
    r(2 * b, 2 * b + 1) = -s;
    r(2 * b + 1, 2 * b) = s;
    r(2 * b + 1, 2 * b + 1) = c;
  }
  return r;
}

inline void require_orthogonal(const Matrix& phi, int size, const char* name) {
  if (phi.rows() != size || phi.cols() != size)
    throw std::invalid_argument(std::string(name) + ": wrong size");
  if ((phi.transpose() * phi - Matrix::Identity(size, size)).cwiseAbs().maxCoeff() >
      1e-9)
    throw std::invalid_argument(std::string(name) + ": not orthogonal");
}

}  // namespace detail3

inline BlockCovariance build_boundary_covariance(const BoundaryCovarianceSpec& spec,
                                                 double psd_tol = 1e-10) {
  if (spec.T < 1 || spec.That < 0 || spec.That > spec.T)
    throw std::invalid_argument("boundary spec: need 0 <= That <= T, T >= 1");
  if (!(spec.a11 > 0.0 && spec.a22 > 0.0 && spec.a33 > 0.0))
    throw std::invalid_argument("boundary spec: diagonal alphas must be positive");
  const double pair_slack[3] = {spec.a11 * spec.a22 - spec.a12 * spec.a12,
                                spec.a11 * spec.a33 - spec.a13 * spec.a13,
                                spec.a22 * spec.a33 - spec.a23 * spec.a23};
  for (double s : pair_slack)
    if (s < -1e-12) throw std::invalid_argument("boundary spec: a_ii a_jj < a_ij^2");

  const int T = spec.T, That = spec.That;
  Matrix phi12 = spec.phi12.size() ? spec.phi12 : Matrix::Identity(That, That);
  Matrix phi23 = spec.phi23.size() ? spec.phi23 : Matrix::Identity(That, That);
  detail3::require_orthogonal(phi12, That, "phi12");
  detail3::require_orthogonal(phi23, That, "phi23");
  Matrix phi13;
  switch (spec.mode) {
    case BoundaryCovarianceSpec::Phi13Mode::Extremal:
      phi13 = spec.sign_product() * phi12 * phi23;
      break;
    case BoundaryCovarianceSpec::Phi13Mode::LowerExtremal:
      phi13 = -spec.sign_product() * phi12 * phi23;
      break;
    case BoundaryCovarianceSpec::Phi13Mode::Rotation:
      phi13 = detail3::rotation_blocks(That, spec.psi) * phi12 * phi23;
      break;
  }

  BlockCovariance r(3, T);
  const double diag[3] = {spec.a11, spec.a22, spec.a33};
  for (int i = 0; i < 3; ++i) r.block(i, i) = diag[i] * Matrix::Identity(T, T);
  auto put = [&](int i, int j, double a, const Matrix& phi) {
    Matrix b = Matrix::Zero(T, T);
    if (That > 0) b.topLeftCorner(That, That) = a * phi;
    r.block(i, j) = b;
    r.block(j, i) = b.transpose();
  };
  put(0, 1, spec.a12, phi12);
  put(0, 2, spec.a13, phi13);
  put(1, 2, spec.a23, phi23);

  if (!is_psd(r, psd_tol)) throw NotPSD("boundary covariance is not PSD");

  // Minor identities m_i = a_ii^T, m_ij = (a_ii a_jj - a_ij^2)^That (a_ii a_jj)^(T-That)
  for (int i = 0; i < 3; ++i) {
    const double want = std::pow(diag[i], T);
    const double got = principal_minor(r, SubsetMask{1} << i);
    if (std::abs(got - want) > 1e-10 * std::max(1.0, std::abs(want)))
      throw std::runtime_error("boundary covariance: 1x1 minor identity failed");
  }
  const int pair_idx[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pi : pair_idx) {
    const double prod = diag[pi[0]] * diag[pi[1]];
    const double slack = pair_slack[pi[0] + pi[1] - 1];
    const double want = std::pow(slack, That) * std::pow(prod, T - That);
    const SubsetMask s = (SubsetMask{1} << pi[0]) | (SubsetMask{1} << pi[1]);
    const double got = principal_minor(r, s);
    if (std::abs(got - want) > 1e-10 * std::max(1.0, std::abs(want)))
      throw std::runtime_error("boundary covariance: 2x2 minor identity failed");
  }
  return r;
}

// Closed-form det-R bounds for the block-orthogonal structure, with the
// That/(T - That) split.
inline std::pair<double, double> m123_bounds(const BoundaryCovarianceSpec& spec) {
  const double base = spec.a11 * spec.a22 * spec.a33 - spec.a11 * spec.a23 * spec.a23 -
                      spec.a22 * spec.a13 * spec.a13 - spec.a33 * spec.a12 * spec.a12;
  const double twoprod = 2.0 * std::abs(spec.a12 * spec.a13 * spec.a23);
  const double outer =
      std::pow(spec.a11 * spec.a22 * spec.a33, spec.T - spec.That);
  return {outer * std::pow(base - twoprod, spec.That),
          outer * std::pow(base + twoprod, spec.That)};
}

// Exact 2x2 covariance for any (g1, g2, g12) with g12 <= g1 + g2.
inline SymmetricMatrix pair_covariance(double g1, double g2, double g12) {
  if (g12 > g1 + g2 + 1e-12)
    throw std::invalid_argument("pair_covariance: g12 > g1 + g2");
  const double v1 = std::exp(g1), v2 = std::exp(g2);
  const double c = std::sqrt(std::max(0.0, v1 * v2 - std::exp(g12)));
  SymmetricMatrix m(2);
  m.set(0, 0, v1);
  m.set(1, 1, v2);
  m.set(0, 1, c);
  return m;
}

struct NotInContinuousRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Continuous-theta description of an achieving structure; theta = That/T.
struct ConeSolution {
  double theta = 1.0;
  double delta = 1.0;        // 1/theta
  double cos_psi = 1.0;      // rotation interpolation parameter
  double alpha_diag[3] = {1.0, 1.0, 1.0};
  double alpha_off[3] = {0.0, 0.0, 0.0};  // (a12, a13, a23), nonnegative gauge
  int That_rational = 1;     // smallest-denominator rational approximation
  int T_rational = 1;
  double theta_rational_error = 0.0;
};

struct AchieveResult {
  double theta_prime = 1.0;
  bool asymptotic = false;
  ConeSolution solution;
  SubsetVector achieved_q;  // minors^(1/T) of the achieving structure
  double max_rel_gap = 0.0;  // achieved vs target p^(1/theta_prime)
  FDeltaProfile profile;     // of the unscaled x-triple
};

namespace detail3 {

struct BandHit {
  double delta;
  double cos_psi;
};

// Searches delta >= 1 for containment of u^delta in [e_minus, e_plus]; the
// closed-form cos_psi then hits the target exactly.
inline std::optional<BandHit> find_band_hit(const XTriple& t, double log_u,
                                            double delta0_hint) {
  auto try_delta = [&](double delta) -> std::optional<BandHit> {
    if (!(delta >= 1.0) || !std::isfinite(delta)) return std::nullopt;
    const double lt = delta * log_u;  // log of target ratio u^delta
    const double lp = log_e_plus(t, delta);
    const double slack = 1e-9;
    if (lt > lp + slack) return std::nullopt;  // above the band
    const double target = std::exp(lt);
    const double em = e_minus(t, delta);
    if (target < em - 1e-12 * std::max(1.0, std::abs(em)))
      return std::nullopt;  // below the band
    const auto u = one_minus_pow(t, delta);
    const double root = std::sqrt(u[0] * u[1] * u[2]);
    double cp;
    if (root < 1e-300) {
      cp = 1.0;  // degenerate band: some alpha_ij vanishes, angle irrelevant
    } else {
      cp = (target - (1.0 - (u[0] + u[1] + u[2]))) / (2.0 * root);
      cp = std::clamp(cp, -1.0, 1.0);
    }
    return BandHit{delta, cp};
  };
  // candidate deltas: the profile root (clamped to >= 1) first, then a log grid
  std::vector<double> candidates;
  if (std::isfinite(delta0_hint) && delta0_hint > 0.0)
    candidates.push_back(std::max(1.0, delta0_hint));
  candidates.push_back(1.0);
  const int grid_points = 1200;
  for (int i = 0; i <= grid_points; ++i)
    candidates.push_back(std::pow(10.0, 4.0 * i / grid_points));
  for (double d : candidates)
    if (auto hit = try_delta(d)) return hit;
  // refine: bisect the sign changes of log e_plus - delta log u over the grid
  double prev_delta = 1.0;
  double prev_s = log_e_plus(t, prev_delta) - prev_delta * log_u;
  for (int i = 1; i <= grid_points; ++i) {
    const double d = std::pow(10.0, 4.0 * i / grid_points);
    const double s = log_e_plus(t, d) - d * log_u;
    if ((prev_s < 0.0) != (s < 0.0)) {
      double lo = prev_delta, hi = d;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double sm = log_e_plus(t, mid) - mid * log_u;
        ((sm < 0.0) == (prev_s < 0.0) ? lo : hi) = mid;
      }
      for (double d2 : {lo, hi, 0.5 * (lo + hi)}) {
        auto hit = try_delta(d2);
        if (hit) return hit;
      }
    }
    prev_delta = d;
    prev_s = s;
  }
  return std::nullopt;
}

// Smallest denominator <= 64 approximating theta to 1e-3.
inline void rational_theta(double theta, int& num, int& den, double& err) {
  num = 1;
  den = 1;
  err = std::abs(theta - 1.0);
  for (int q = 1; q <= 64; ++q) {
    const int p = std::clamp(static_cast<int>(std::lround(theta * q)), 1, q);
    const double e = std::abs(theta - static_cast<double>(p) / q);
    if (e < err - 1e-15) {
      num = p;
      den = q;
      err = e;
    }
    if (err <= 1e-3) break;
  }
}

}  // namespace detail3

// Achieves p (7 exponentiated entropies, n = 3) inside the convex cone:
// theta_prime = 1 when p itself is reachable by a single block-orthogonal
// structure, otherwise the smallest scale theta_prime with p^(1/theta_prime)
// reachable; targets only approached in the limit are flagged asymptotic.
inline AchieveResult achieve_in_cone(const SubsetVector& p) {
  if (p.n != 3) throw std::invalid_argument("achieve_in_cone: n must be 3");
  const double p1 = p[mask_of({1})], p2 = p[mask_of({2})], p3 = p[mask_of({3})];
  const double p12 = p[mask_of({1, 2})], p13 = p[mask_of({1, 3})],
               p23 = p[mask_of({2, 3})];
  const double p123 = p[mask_of({1, 2, 3})];
  const double slack = 1e-12;
  if (!(p1 > 0.0 && p2 > 0.0 && p3 > 0.0))
    throw NotInContinuousRegion("achieve_in_cone: singleton entries must be positive");
  // x_k keyed by the opposite element k (0-based): x_k = p_ij / (p_i p_j)
  const std::array<double, 3> x_orig = {
      std::min(p23 / (p2 * p3), 1.0), std::min(p13 / (p1 * p3), 1.0),
      std::min(p12 / (p1 * p2), 1.0)};
  const double raw_x[3] = {p23 / (p2 * p3), p13 / (p1 * p3), p12 / (p1 * p2)};
  for (double v : raw_x)
    if (!(v >= 0.0) || v > 1.0 + slack)
      throw NotInContinuousRegion("achieve_in_cone: pair constraint violated");
  const double cap = std::min({p13 * p23 / p3, p12 * p23 / p2, p12 * p13 / p1});
  if (!(p123 >= -slack) || p123 > cap * (1.0 + 1e-9))
    throw NotInContinuousRegion("achieve_in_cone: triple constraint violated");

  XTriple t(x_orig[0], x_orig[1], x_orig[2]);
  AchieveResult out;
  out.profile = f_profile(t);

  const double P = p1 * p2 * p3;
  const double u = std::min(std::max(p123 / P, 0.0), t.x[0] * t.x[1]);

  auto scaled_triple = [&](double theta_prime) {
    const double inv = 1.0 / theta_prime;
    return XTriple(std::pow(x_orig[0], inv), std::pow(x_orig[1], inv),
                   std::pow(x_orig[2], inv));
  };
  auto attempt = [&](double theta_prime) -> std::optional<detail3::BandHit> {
    const XTriple ts = scaled_triple(theta_prime);
    double hint = out.profile.delta0;
    if (std::isfinite(hint)) hint *= theta_prime;
    if (u == 0.0) {
      // need e_minus <= 0 <= e_plus at some delta
      for (double d : {1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0, 8192.0}) {
        if (detail3::e_minus(ts, d) <= 0.0 && detail3::log_e_plus(ts, d) > -kInf) {
          const auto uu = detail3::one_minus_pow(ts, d);
          const double root = std::sqrt(uu[0] * uu[1] * uu[2]);
          const double cp =
              root < 1e-300
                  ? 1.0
                  : std::clamp(-(1.0 - (uu[0] + uu[1] + uu[2])) / (2.0 * root),
                               -1.0, 1.0);
          return detail3::BandHit{d, cp};
        }
      }
      return std::nullopt;
    }
    return detail3::find_band_hit(ts, std::log(u) / theta_prime, hint);
  };

  double theta_prime = 1.0;
  std::optional<detail3::BandHit> hit = attempt(1.0);
  if (!hit) {
    // geometric grid, factor 2, then bisection to 1e-6
    double lo = 1.0, hi = 2.0;
    constexpr double kThetaCap = 1.0e9;
    while (hi < kThetaCap) {
      hit = attempt(hi);
      if (hit) break;
      lo = hi;
      hi *= 2.0;
    }
    if (hit) {
      auto best_hit = hit;
      double best_theta = hi;
      while ((hi - lo) > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        auto h = attempt(mid);
        if (h) {
          hi = mid;
          best_hit = h;
          best_theta = mid;
        } else {
          lo = mid;
        }
      }
      hit = best_hit;
      theta_prime = best_theta;
    } else {
      // No finite scale reaches the target (delta0 = inf corners and the
      // doubly-degenerate profiles); report the closest finite-structure
      // approximation at theta_prime = 1 with its gap.
      out.asymptotic = true;
      theta_prime = 1.0;
      double best_gap = kInf;
      detail3::BandHit best{1.0, 1.0};
      const double log_target = std::log(std::max(u, 1e-300));
      for (double d : {1.0, 2.0, 4.0, 10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4}) {
        const auto uu = detail3::one_minus_pow(t, d);
        const double root = std::sqrt(uu[0] * uu[1] * uu[2]);
        double cp = 1.0;
        if (root >= 1e-300)
          cp = std::clamp(
              (std::exp(d * log_target) - (1.0 - (uu[0] + uu[1] + uu[2]))) /
                  (2.0 * root),
              -1.0, 1.0);
        const double e_val = 1.0 - (uu[0] + uu[1] + uu[2]) + 2.0 * cp * root;
        const double got = e_val <= 0.0 ? 0.0 : std::exp(std::log(e_val) / d);
        const double gap = std::abs(got - u);
        if (gap < best_gap) {
          best_gap = gap;
          best = detail3::BandHit{d, cp};
        }
      }
      hit = best;
    }
  }
  out.theta_prime = theta_prime;

  // Assemble the continuous solution for p' = p^(1/theta_prime).
  const double inv = 1.0 / theta_prime;
  const double pd[3] = {std::pow(p1, inv), std::pow(p2, inv), std::pow(p3, inv)};
  const XTriple ts = scaled_triple(theta_prime);
  const double delta = hit->delta;
  ConeSolution& sol = out.solution;
  sol.delta = delta;
  sol.theta = 1.0 / delta;
  sol.cos_psi = hit->cos_psi;
  for (int i = 0; i < 3; ++i) sol.alpha_diag[i] = pd[i];
  // ts is sorted; position[] maps each slot back to the opposite element k
  const auto uu = detail3::one_minus_pow(ts, delta);
  double u_by_k[3];
  for (int i = 0; i < 3; ++i) u_by_k[ts.position[i]] = uu[i];
  // alpha_off order (a12, a13, a23): pairs opposite k = 3, 2, 1 (0-based 2,1,0)
  sol.alpha_off[0] = std::sqrt(std::max(0.0, pd[0] * pd[1] * u_by_k[2]));
  sol.alpha_off[1] = std::sqrt(std::max(0.0, pd[0] * pd[2] * u_by_k[1]));
  sol.alpha_off[2] = std::sqrt(std::max(0.0, pd[1] * pd[2] * u_by_k[0]));
  detail3::rational_theta(sol.theta, sol.That_rational, sol.T_rational,
                          sol.theta_rational_error);

  // Achieved q from the closed-form minor identities.
  out.achieved_q = SubsetVector(3);
  out.achieved_q[mask_of({1})] = pd[0];
  out.achieved_q[mask_of({2})] = pd[1];
  out.achieved_q[mask_of({3})] = pd[2];
  const SubsetMask pair_mask[3] = {mask_of({1, 2}), mask_of({1, 3}), mask_of({2, 3})};
  const int pair_k[3] = {2, 1, 0};  // opposite element (0-based) per pair
  for (int e = 0; e < 3; ++e) {
    const int k = pair_k[e];
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    out.achieved_q[pair_mask[e]] =
        pd[i] * pd[j] * std::pow(1.0 - u_by_k[k], sol.theta);
  }
  {
    const double root = std::sqrt(uu[0] * uu[1] * uu[2]);
    const double e_val = 1.0 - (uu[0] + uu[1] + uu[2]) + 2.0 * sol.cos_psi * root;
    out.achieved_q[mask_of({1, 2, 3})] =
        e_val <= 0.0 ? 0.0 : pd[0] * pd[1] * pd[2] * std::exp(std::log(e_val) / delta);
  }
  // gap vs target p^(1/theta_prime)
  double gap = 0.0;
  for (SubsetMask s : enumerate_subsets(3)) {
    const double want = std::pow(p[s], inv);
    gap = std::max(gap,
                   std::abs(want - out.achieved_q[s]) / std::max(1.0, std::abs(want)));
  }
  out.max_rel_gap = gap;
  return out;
}

struct SingularMinor : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotBalanced : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail3 {

// Sum over nonempty s of gamma_s * embed((R_[s])^-1), the gradient of
// sum gamma_s log det R_[s]; also reports the largest single-term entry for
// residual normalization.
inline Matrix kkt_gradient(const BlockCovariance& r, const LinearFunctional& gamma,
                           double* term_scale = nullptr) {
  if (r.n != 3 || gamma.n != 3)
    throw std::invalid_argument("kkt: three variables required");
  const int T = r.T;
  Matrix g = Matrix::Zero(3 * T, 3 * T);
  double scale = 0.0;
  for (SubsetMask s : enumerate_subsets(3)) {
    const double w = gamma.coeffs[s];
    if (w == 0.0) continue;
    const Matrix sub = r.submatrix(s);
    if (sym_det(sub) <= 0.0)
      throw SingularMinor("kkt: non-positive principal minor " + subset_to_string(s));
    const Matrix inv = sub.inverse();
    const auto els = elements_of(s);
    for (std::size_t bi = 0; bi < els.size(); ++bi)
      for (std::size_t bj = 0; bj < els.size(); ++bj)
        g.block((els[bi] - 1) * T, (els[bj] - 1) * T, T, T) +=
            w * inv.block(bi * T, bj * T, T, T);
    scale = std::max(scale, std::abs(w) * inv.cwiseAbs().maxCoeff());
  }
  if (term_scale) *term_scale = scale;
  return g;
}

}  // namespace detail3

// Largest entry of the 7-term stationarity sum, normalized by the largest
// single term.
inline double kkt_residual(const BlockCovariance& r, const LinearFunctional& gamma) {
  double scale = 0.0;
  const Matrix g = detail3::kkt_gradient(r, gamma, &scale);
  if (scale == 0.0) return 0.0;
  return g.cwiseAbs().maxCoeff() / scale;
}

// gamma (normalized to gamma_123 = -1) making a given scalar 3x3 covariance
// stationary for the log-det objective; solves the 6x6 linear system given
// by the upper triangle of the stationarity matrix.
inline LinearFunctional gamma_for_structure(const SymmetricMatrix& a) {
  if (a.n != 3) throw std::invalid_argument("gamma_for_structure: n must be 3");
  const SubsetMask subsets[6] = {mask_of({1}),    mask_of({2}),    mask_of({3}),
                                 mask_of({1, 2}), mask_of({1, 3}), mask_of({2, 3})};
  Matrix sys(6, 6);
  Vector rhs(6);
  auto embed = [&](SubsetMask s) {
    Matrix m = Matrix::Zero(3, 3);
    const Matrix inv = select_submatrix(a.m, s).inverse();
    const auto els = elements_of(s);
    for (std::size_t bi = 0; bi < els.size(); ++bi)
      for (std::size_t bj = 0; bj < els.size(); ++bj)
        m(els[bi] - 1, els[bj] - 1) = inv(bi, bj);
    return m;
  };
  std::array<Matrix, 6> terms;
  for (int c = 0; c < 6; ++c) terms[c] = embed(subsets[c]);
  const Matrix full = a.m.inverse();
  int row = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j, ++row) {
      for (int c = 0; c < 6; ++c) sys(row, c) = terms[c](i, j);
      rhs(row) = full(i, j);  // gamma_123 = -1 moved to the right-hand side
    }
  const Vector sol = sys.colPivHouseholderQr().solve(rhs);
  LinearFunctional gamma(3);
  for (int c = 0; c < 6; ++c) gamma.coeffs[subsets[c]] = sol(c);
  gamma.coeffs[full_mask(3)] = -1.0;
  return gamma;
}

struct BoundaryDiagnostics {
  double objective = 0.0;
  double kkt_residual = 0.0;
  // max over off-blocks of || R_ij^t R_ij - (tr/T) I || / (tr/T)
  double ortho_deviation = 0.0;
  // min over signs of || Phi13^t Phi12 Phi23 -/+ I ||
  double phi_product_deviation = 0.0;
  int iterations = 0;
  int best_restart = 0;
  bool converged = false;
};

struct OptimizeResult {
  BlockCovariance R;
  BoundaryDiagnostics diagnostics;
};

struct OptimizeOptions {
  int restarts = 8;
  int max_iterations = 4000;
  double residual_target = 1e-7;
  double init_perturbation = 1e-2;
  double eigen_floor = 1e-10;
};

namespace detail3 {

inline double logdet_objective(const BlockCovariance& r, const LinearFunctional& gamma) {
  double obj = 0.0;
  for (SubsetMask s : enumerate_subsets(3)) {
    const double w = gamma.coeffs[s];
    if (w == 0.0) continue;
    const double det = sym_det(r.submatrix(s));
    if (det <= 0.0) return -kInf;
    obj += w * std::log(det);
  }
  return obj;
}

// Per-variable rescaling making every diagonal block unit determinant;
// balanced gamma leaves the objective invariant under it.
inline void normalize_diagonal_blocks(BlockCovariance& r) {
  const int T = r.T;
  Vector scale(3);
  for (int i = 0; i < 3; ++i) {
    const double det = sym_det(r.block(i, i));
    scale(i) = std::pow(det, -0.5 / T);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.block(i, j) *= scale(i) * scale(j);
}

inline void orthogonality_diagnostics(const BlockCovariance& r,
                                      BoundaryDiagnostics& diag) {
  const int T = r.T;
  double worst = 0.0;
  std::array<Matrix, 3> phi;
  std::array<bool, 3> have{false, false, false};
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int e = 0; e < 3; ++e) {
    const Matrix b = r.block(pairs[e][0], pairs[e][1]);
    const Matrix btb = b.transpose() * b;
    const double c2 = btb.trace() / T;
    if (c2 < 1e-18) continue;  // vanishing block: orthogonality is vacuous
    worst = std::max(worst,
                     (btb - c2 * Matrix::Identity(T, T)).cwiseAbs().maxCoeff() / c2);
    phi[e] = b / std::sqrt(c2);
    have[e] = true;
  }
  diag.ortho_deviation = worst;
  if (have[0] && have[1] && have[2]) {
    const Matrix p = phi[1].transpose() * phi[0] * phi[2];  // Phi13^t Phi12 Phi23
    const Matrix i3 = Matrix::Identity(T, T);
    diag.phi_product_deviation = std::min((p - i3).cwiseAbs().maxCoeff(),
                                          (p + i3).cwiseAbs().maxCoeff());
  } else {
    diag.phi_product_deviation = 0.0;
  }
}

}  // namespace detail3

// Projected-gradient ascent on sum gamma_s log det R_[s] over the PSD cone,
// with per-variable unit-determinant normalization; diagnostics report the
// KKT residual and how close the optimum is to the block-orthogonal
// boundary structure.
inline OptimizeResult boundary_optimize(const LinearFunctional& gamma, int T,
                                        std::uint64_t seed,
                                        const OptimizeOptions& opts = {}) {
  if (gamma.n != 3) throw std::invalid_argument("boundary_optimize: n must be 3");
  if (T < 1) throw std::invalid_argument("boundary_optimize: T must be >= 1");
  if (!is_balanced(gamma, 1e-12))
    throw NotBalanced("boundary_optimize: gamma must be balanced");

  const int dim = 3 * T;
  std::optional<OptimizeResult> best;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (restart + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix init = Matrix::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const double v = opts.init_perturbation * gauss(rng);
        init(i, j) += v;
        init(j, i) = init(i, j);
      }
    BlockCovariance r(3, T, clip_eigenvalues(init, opts.eigen_floor));
    detail3::normalize_diagonal_blocks(r);

    double obj = detail3::logdet_objective(r, gamma);
    double step = 0.1;
    double residual = kInf;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      double scale = 0.0;
      Matrix grad;
      try {
        grad = detail3::kkt_gradient(r, gamma, &scale);
      } catch (const SingularMinor&) {
        break;
      }
      residual = scale == 0.0 ? 0.0 : grad.cwiseAbs().maxCoeff() / scale;
      if (residual <= opts.residual_target) break;
      bool moved = false;
      while (step > 1e-14) {
        BlockCovariance cand(3, T,
                             clip_eigenvalues(r.m + step * grad, opts.eigen_floor));
        detail3::normalize_diagonal_blocks(cand);
        const double cobj = detail3::logdet_objective(cand, gamma);
        if (cobj > obj) {
          r = std::move(cand);
          obj = cobj;
          step = std::min(step * 1.5, 1.0);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    OptimizeResult result{std::move(r), {}};
    result.diagnostics.objective = obj;
    try {
      result.diagnostics.kkt_residual = kkt_residual(result.R, gamma);
    } catch (const SingularMinor&) {
      result.diagnostics.kkt_residual = kInf;
    }
    result.diagnostics.iterations = it;
    result.diagnostics.best_restart = restart;
    result.diagnostics.converged =
        result.diagnostics.kkt_residual <= opts.residual_target * 10.0;
    detail3::orthogonality_diagnostics(result.R, result.diagnostics);
    if (!best ||
        result.diagnostics.kkt_residual < best->diagnostics.kkt_residual)
      best = std::move(result);
  }
  return *best;
}

}  // namespace gentropy
