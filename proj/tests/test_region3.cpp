#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gentropy/entropy.hpp"
#include "gentropy/region3.hpp"
#include "oracles.hpp"

using namespace gentropy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SubsetVector g_of(const Matrix& a) {
  return entropy_g(SymmetricMatrix(a)).data;
}

// scalar PD covariance with unit diagonal and off-diagonal magnitudes < 1
Matrix random_correlation(oracle::Rng& rng) {
  while (true) {
    Matrix a = Matrix::Identity(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) a(i, j) = a(j, i) = rng.uniform(-0.75, 0.75);
    if (sym_eigenvalues(a).minCoeff() > 1e-3) return a;
  }
}

SubsetVector p_of_matrix(const Matrix& a) {
  return all_principal_minors(SymmetricMatrix(a));
}

}  // namespace

TEST_CASE("XTriple validation and sorting") {
  XTriple t(0.9, 0.2, 0.5);
  REQUIRE(t.x[0] == 0.2);
  REQUIRE(t.x[1] == 0.5);
  REQUIRE(t.x[2] == 0.9);
  REQUIRE(t.position[0] == 1);
  REQUIRE(t.position[1] == 2);
  REQUIRE(t.position[2] == 0);
  REQUIRE_THROWS_AS(XTriple(0.0, 0.5, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(XTriple(0.5, 1.5, 0.5), std::invalid_argument);
  REQUIRE(XTriple(1.0 + 5e-13, 0.5, 0.5).x[2] == 1.0);  // boundary rounding
}

TEST_CASE("f_eval closed values") {
  // constant case: two entries at 1
  XTriple c7(1.0, 1.0, 0.5);
  for (double d : {1e-3, 0.1, 1.0, 10.0, 1e3})
    REQUIRE_THAT(f_eval(c7, d), WithinRel(0.5, 1e-12));

  // direct arithmetic at delta = 1
  XTriple x(0.5, 0.5, 0.8);
  const double e1 = -2.0 + 1.8 + 2.0 * std::sqrt(0.5 * 0.5 * 0.2);
  REQUIRE_THAT(e1, WithinRel(0.24721359549995792, 1e-12));
  REQUIRE_THAT(f_eval(x, 1.0), WithinRel(e1, 1e-12));

  // case-1 tail: f -> 0 as delta grows when x3 < 1
  XTriple x1(0.3, 0.5, 0.8);
  REQUIRE(f_eval(x1, 1e3) < 1e-6);
  REQUIRE(f_eval(x1, 1e3) >= 0.0);

  REQUIRE_THROWS_AS(f_eval(x, 0.0), std::invalid_argument);
}

TEST_CASE("y_eval closed values") {
  XTriple x(0.5, 0.5, 0.8);
  REQUIRE(y_eval(x, 0.0) == 0.0);
  REQUIRE_THAT(y_eval(x, 1.0), WithinAbs(0.05, 1e-14));
  REQUIRE_THAT(y_tilde(x), WithinAbs(0.05, 1e-14));

  // x = (0.5, 0.9, 0.9): y = 0.45^d - 0.5^d < 0 for all d > 0
  XTriple x3(0.5, 0.9, 0.9);
  for (double d : {0.01, 0.5, 1.0, 3.0, 20.0}) {
    REQUIRE_THAT(y_eval(x3, d),
                 WithinAbs(std::pow(0.45, d) - std::pow(0.5, d), 1e-13));
    REQUIRE(y_eval(x3, d) < 0.0);
  }
}

TEST_CASE("f_profile classifies all seven cases") {
  // case 1: distinct, below 1
  auto p1 = f_profile(XTriple(0.3, 0.5, 0.8));
  REQUIRE(p1.case_id == 1);
  REQUIRE(p1.location == DeltaLocation::Finite);
  REQUIRE(p1.attained);
  REQUIRE_THAT(p1.sup_f, WithinRel(0.15, 1e-12));

  // case 2: x1 = x2 < x3 < 1, the worked example
  auto p2 = f_profile(XTriple(0.5, 0.5, 0.8));
  REQUIRE(p2.case_id == 2);
  REQUIRE(p2.location == DeltaLocation::Finite);
  REQUIRE_THAT(p2.delta0, WithinRel(0.6765040660174905, 1e-9));
  REQUIRE_THAT(y_eval(XTriple(0.5, 0.5, 0.8), p2.delta0), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(f_eval(XTriple(0.5, 0.5, 0.8), p2.delta0), WithinRel(0.25, 1e-9));

  // case 3: x1 < x2 = x3 < 1, supremum at infinity
  auto p3 = f_profile(XTriple(0.5, 0.9, 0.9));
  REQUIRE(p3.case_id == 3);
  REQUIRE(p3.location == DeltaLocation::Infinity);
  REQUIRE_FALSE(p3.attained);
  REQUIRE_THAT(p3.sup_f, WithinRel(0.45, 1e-12));

  // case 4: all equal below 1
  auto p4 = f_profile(XTriple(0.7, 0.7, 0.7));
  REQUIRE(p4.case_id == 4);
  REQUIRE(p4.location == DeltaLocation::Infinity);
  REQUIRE_THAT(p4.sup_f, WithinRel(0.49, 1e-12));

  // case 5: x3 = 1, distinct below
  auto p5 = f_profile(XTriple(0.3, 0.6, 1.0));
  REQUIRE(p5.case_id == 5);
  REQUIRE(p5.location == DeltaLocation::ZeroPlus);
  REQUIRE_THAT(p5.sup_f, WithinRel(0.18, 1e-12));
  REQUIRE_THAT(f_eval(XTriple(0.3, 0.6, 1.0), 1e-8), WithinRel(0.18, 1e-6));

  // case 6: x1 = x2 < x3 = 1
  auto p6 = f_profile(XTriple(0.4, 0.4, 1.0));
  REQUIRE(p6.case_id == 6);
  REQUIRE(p6.location == DeltaLocation::ZeroPlus);
  REQUIRE_THAT(p6.sup_f, WithinRel(0.16, 1e-12));

  // case 7: two at 1, constant
  auto p7 = f_profile(XTriple(1.0, 1.0, 0.5));
  REQUIRE(p7.case_id == 7);
  REQUIRE(p7.location == DeltaLocation::Everywhere);
  REQUIRE(p7.attained);
  REQUIRE_THAT(p7.sup_f, WithinRel(0.5, 1e-12));
}

TEST_CASE("f never exceeds the pair products") {
  oracle::Rng rng(2003);
  for (int rep = 0; rep < 10000; ++rep) {
    XTriple x(rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0),
              rng.uniform(1e-3, 1.0));
    const double delta = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double f = f_eval(x, delta);
    REQUIRE(f <= x.x[0] * x.x[1] + 1e-12);
    REQUIRE(f <= x.x[0] * x.x[2] + 1e-12);
    REQUIRE(f <= x.x[1] * x.x[2] + 1e-12);
  }
}

TEST_CASE("y sign pattern around the finite root") {
  oracle::Rng rng(2011);
  for (int rep = 0; rep < 100; ++rep) {
    const double x1 = rng.uniform(0.05, 0.9);
    const double x2 = rng.uniform(x1, 0.95);
    const double x3 = rng.uniform(x2 + 0.01, 0.99);
    if (x3 >= 1.0) continue;
    XTriple x(x1, x2, x3);
    const auto profile = f_profile(x);
    if (profile.location != DeltaLocation::Finite) continue;
    REQUIRE_THAT(y_eval(x, profile.delta0), WithinAbs(0.0, 1e-10));
    for (int i = 1; i <= 50; ++i) {
      const double below = profile.delta0 * i / 51.0;
      if (below > 0.0) REQUIRE(y_eval(x, below) <= 1e-12);
      const double above = profile.delta0 * (1.0 + 3.0 * i / 50.0);
      REQUIRE(y_eval(x, above) >= -1e-12);
    }
  }
}

TEST_CASE("y_tilde <= 0 implies the maximizer is at delta >= 1") {
  oracle::Rng rng(2017);
  int conforming = 0;
  while (conforming < 1000) {
    XTriple x(rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0),
              rng.uniform(1e-3, 1.0));
    if (y_tilde(x) > 0.0) continue;
    ++conforming;
    const auto profile = f_profile(x);
    if (profile.location == DeltaLocation::Finite)
      REQUIRE(profile.delta0 >= 1.0 - 1e-9);
    else
      REQUIRE((profile.location == DeltaLocation::Infinity ||
               profile.location == DeltaLocation::Everywhere));
  }
}

TEST_CASE("conjecture scan: no f(delta) above f(1) when y_tilde > 0") {
  // property-based check of the open conjecture; a failure here is a
  // counterexample worth reporting, not a library bug
  oracle::Rng rng(2027);
  int scanned = 0;
  double worst = 0.0;
  while (scanned < 1000) {
    XTriple x(rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0),
              rng.uniform(1e-3, 1.0));
    if (y_tilde(x) <= 0.0) continue;
    ++scanned;
    const double f1 = f_eval(x, 1.0);
    for (int i = 0; i <= 60; ++i) {
      const double delta = std::pow(10.0, 3.0 * i / 60.0);
      const double excess = f_eval(x, delta) - f1;
      worst = std::max(worst, excess);
      INFO("x = (" << x.x[0] << ", " << x.x[1] << ", " << x.x[2]
                   << "), delta = " << delta);
      REQUIRE(excess <= 1e-9);
    }
  }
  REQUIRE(worst <= 1e-9);
}

TEST_CASE("check_continuous3") {
  REQUIRE(check_continuous3(SubsetVector(3, 0.0)));

  SubsetVector bad(3, 0.0);
  bad[mask_of({1, 2})] = 1.0;  // g_12 = g_1 + g_2 + 1
  REQUIRE_FALSE(check_continuous3(bad));

  oracle::Rng rng(2029);
  for (int rep = 0; rep < 100; ++rep)
    REQUIRE(check_continuous3(g_of(rng.spd(3))));
}

TEST_CASE("classifier: independent case uses the continuous bound") {
  oracle::Rng rng(2039);
  SubsetVector g(3);
  const double g1 = rng.uniform(-1.0, 1.0), g2 = rng.uniform(-1.0, 1.0),
               g3 = rng.uniform(-1.0, 1.0);
  g[mask_of({1})] = g1;
  g[mask_of({2})] = g2;
  g[mask_of({3})] = g3;
  g[mask_of({1, 2})] = g1 + g2;
  g[mask_of({1, 3})] = g1 + g3;
  g[mask_of({2, 3})] = g2 + g3;
  g[mask_of({1, 2, 3})] = g1 + g2 + g3 - 0.5;
  const auto v = conjectured_region_classify(g);
  REQUIRE(v.pairwise_ok);
  REQUIRE_FALSE(v.tighter_branch);
  REQUIRE_THAT(v.y_tilde, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(v.bound_g123, WithinAbs(g1 + g2 + g3, 1e-12));
  REQUIRE(v.zone == RegionVerdict::Zone::Inside);

  g[mask_of({1, 2, 3})] = g1 + g2 + g3 + 0.5;
  REQUIRE(conjectured_region_classify(g).zone == RegionVerdict::Zone::Outside);
}

TEST_CASE("classifier: tighter branch bound for x = (0.5, 0.5, 0.8)") {
  // g chosen so x1 = x2 = 0.5, x3 = 0.8 with all singletons zero
  SubsetVector g(3, 0.0);
  g[mask_of({2, 3})] = std::log(0.5);
  g[mask_of({1, 3})] = std::log(0.5);
  g[mask_of({1, 2})] = std::log(0.8);
  g[mask_of({1, 2, 3})] = std::log(0.2);
  const auto v = conjectured_region_classify(g);
  REQUIRE(v.tighter_branch);
  REQUIRE_THAT(v.y_tilde, WithinAbs(0.05, 1e-12));
  REQUIRE_THAT(v.bound_g123, WithinRel(std::log(0.24721359549995792), 1e-9));
  REQUIRE(v.bound_g123 < std::log(0.25));
  REQUIRE(v.zone == RegionVerdict::Zone::Inside);  // log 0.2 < bound

  g[mask_of({1, 2, 3})] = std::log(0.25);  // above the tighter bound
  REQUIRE(conjectured_region_classify(g).zone == RegionVerdict::Zone::Outside);
}

TEST_CASE("classifier: minus-infinity bound corner is reported verbatim") {
  SubsetVector g(3, 0.0);
  g[mask_of({2, 3})] = std::log(0.1);
  g[mask_of({1, 3})] = std::log(0.1);
  g[mask_of({1, 2})] = std::log(0.9);
  g[mask_of({1, 2, 3})] = -40.0;
  const auto v = conjectured_region_classify(g);
  REQUIRE(v.tighter_branch);
  REQUIRE(v.bound_g123 == -kInf);
  REQUIRE(v.zone == RegionVerdict::Zone::Outside);
}

TEST_CASE("classifier: scalar Gaussians satisfy their own region") {
  oracle::Rng rng(2053);
  for (int rep = 0; rep < 200; ++rep) {
    const auto v = conjectured_region_classify(g_of(random_correlation(rng)));
    REQUIRE(v.pairwise_ok);
    REQUIRE(v.zone != RegionVerdict::Zone::Outside);
  }
}

TEST_CASE("classifier: pairwise violation is outside immediately") {
  SubsetVector g(3, 0.0);
  g[mask_of({1, 2})] = 0.5;
  const auto v = conjectured_region_classify(g);
  REQUIRE_FALSE(v.pairwise_ok);
  REQUIRE(v.zone == RegionVerdict::Zone::Outside);
}

TEST_CASE("boundary covariance: diagonal and scalar reductions") {
  BoundaryCovarianceSpec spec;
  spec.a11 = 1.5;
  spec.a22 = 2.0;
  spec.a33 = 0.7;
  spec.T = 2;
  spec.That = 2;
  const auto r = build_boundary_covariance(spec);
  const auto g = entropy_g(r).data;
  REQUIRE_THAT(g[mask_of({1, 2, 3})],
               WithinAbs(g[mask_of({1})] + g[mask_of({2})] + g[mask_of({3})], 1e-10));

  BoundaryCovarianceSpec scalar;
  scalar.a11 = 1.0;
  scalar.a22 = 1.0;
  scalar.a33 = 1.0;
  scalar.a12 = 0.3;
  scalar.a13 = 0.2;
  scalar.a23 = -0.4;
  scalar.T = 1;
  scalar.That = 1;
  const auto rs = build_boundary_covariance(scalar);
  REQUIRE(rs.m.rows() == 3);
  REQUIRE(rs.m(0, 1) == 0.3);
  // the (1,3) block is a13 * Phi13 with Phi13 = sign(a12 a13 a23) * I
  const double sign = scalar.a12 * scalar.a13 * scalar.a23 >= 0 ? 1.0 : -1.0;
  REQUIRE(rs.m(0, 2) == scalar.a13 * sign);
}

TEST_CASE("boundary covariance: extremal determinant hits the closed bound") {
  oracle::Rng rng(2063);
  for (int rep = 0; rep < 30; ++rep) {
    BoundaryCovarianceSpec spec;
    spec.a11 = rng.uniform(0.5, 2.0);
    spec.a22 = rng.uniform(0.5, 2.0);
    spec.a33 = rng.uniform(0.5, 2.0);
    auto bounded = [&](double aii, double ajj) {
      return rng.uniform(-0.45, 0.45) * std::sqrt(aii * ajj);
    };
    spec.a12 = bounded(spec.a11, spec.a22);
    spec.a13 = bounded(spec.a11, spec.a33);
    spec.a23 = bounded(spec.a22, spec.a33);
    spec.T = 3;
    spec.That = 2;
    oracle::Rng r1(100 + rep), r2(200 + rep);
    spec.phi12 = r1.orthogonal(2);
    spec.phi23 = r2.orthogonal(2);

    const auto [lower, upper] = m123_bounds(spec);
    const auto r = build_boundary_covariance(spec);
    const double det = principal_minor(r, full_mask(3));
    REQUIRE_THAT(det, WithinRel(upper, 1e-9));

    spec.mode = BoundaryCovarianceSpec::Phi13Mode::LowerExtremal;
    try {
      const auto rl = build_boundary_covariance(spec);
      REQUIRE_THAT(principal_minor(rl, full_mask(3)), WithinRel(lower, 1e-9));
    } catch (const NotPSD&) {
      REQUIRE(lower <= 1e-9);  // lower extremal can leave the cone
    }
  }
}

TEST_CASE("boundary covariance: rotation interpolation stays within bounds") {
  oracle::Rng rng(2069);
  BoundaryCovarianceSpec spec;
  spec.a11 = 1.2;
  spec.a22 = 0.9;
  spec.a33 = 1.0;
  spec.a12 = 0.4;
  spec.a13 = -0.25;
  spec.a23 = 0.3;
  spec.T = 3;
  spec.That = 2;
  oracle::Rng r1(7), r2(8);
  spec.phi12 = r1.orthogonal(2);
  spec.phi23 = r2.orthogonal(2);
  spec.mode = BoundaryCovarianceSpec::Phi13Mode::Rotation;
  const auto [lower, upper] = m123_bounds(spec);
  for (int i = 0; i < 100; ++i) {
    spec.psi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    try {
      const auto r = build_boundary_covariance(spec);
      const double det = principal_minor(r, full_mask(3));
      REQUIRE(det >= lower - 1e-9 * std::max(1.0, std::abs(lower)));
      REQUIRE(det <= upper + 1e-9 * std::max(1.0, std::abs(upper)));
      // det is linear in cos(psi)
      const double c = spec.a12 * spec.a13 * spec.a23;
      const double base =
          spec.a11 * spec.a22 * spec.a33 - spec.a11 * spec.a23 * spec.a23 -
          spec.a22 * spec.a13 * spec.a13 - spec.a33 * spec.a12 * spec.a12;
      const double expect =
          std::pow(spec.a11 * spec.a22 * spec.a33, spec.T - spec.That) *
          std::pow(base + 2.0 * c * std::cos(spec.psi), spec.That);
      REQUIRE_THAT(det, WithinRel(expect, 1e-9));
    } catch (const NotPSD&) {
      // angles that push the determinant negative are legitimately rejected
    }
  }
}

TEST_CASE("m123_bounds degenerate cases") {
  BoundaryCovarianceSpec spec;
  spec.a11 = 2.0;
  spec.a22 = 3.0;
  spec.a33 = 4.0;
  spec.T = 2;
  spec.That = 1;
  auto [lo, hi] = m123_bounds(spec);
  REQUIRE_THAT(lo, WithinRel(std::pow(24.0, 2), 1e-12));
  REQUIRE_THAT(hi, WithinRel(std::pow(24.0, 2), 1e-12));

  spec.a12 = 0.5;  // product a12 a13 a23 still zero
  auto [lo2, hi2] = m123_bounds(spec);
  REQUIRE(lo2 == hi2);
}

TEST_CASE("boundary covariance rejects non-PSD specs") {
  BoundaryCovarianceSpec spec;
  spec.a11 = spec.a22 = spec.a33 = 1.0;
  spec.a12 = spec.a13 = spec.a23 = 0.9;
  spec.T = 2;
  spec.That = 2;
  spec.mode = BoundaryCovarianceSpec::Phi13Mode::Rotation;
  spec.psi = std::numbers::pi;  // cos = -1 sends the determinant negative
  REQUIRE_THROWS_AS(build_boundary_covariance(spec), NotPSD);
}

TEST_CASE("closed-form minors match an assembled covariance") {
  // bridge between the continuous-theta formulas and an integer structure
  BoundaryCovarianceSpec spec;
  spec.a11 = 1.3;
  spec.a22 = 0.9;
  spec.a33 = 1.1;
  spec.a12 = 0.4;
  spec.a13 = -0.25;
  spec.a23 = 0.3;
  spec.T = 3;
  spec.That = 2;
  oracle::Rng r1(11), r2(12);
  spec.phi12 = r1.orthogonal(2);
  spec.phi23 = r2.orthogonal(2);
  spec.mode = BoundaryCovarianceSpec::Phi13Mode::Rotation;
  spec.psi = 0.7;
  const auto r = build_boundary_covariance(spec);
  const auto m = all_principal_minors(r);
  const double theta = static_cast<double>(spec.That) / spec.T;
  auto q = [&](SubsetMask s) { return std::pow(m[s], 1.0 / spec.T); };
  REQUIRE_THAT(q(mask_of({1})), WithinRel(spec.a11, 1e-10));
  const double q12 = std::pow(spec.a11 * spec.a22 - spec.a12 * spec.a12, theta) *
                     std::pow(spec.a11 * spec.a22, 1.0 - theta);
  REQUIRE_THAT(q(mask_of({1, 2})), WithinRel(q12, 1e-10));
  const double base =
      spec.a11 * spec.a22 * spec.a33 - spec.a11 * spec.a23 * spec.a23 -
      spec.a22 * spec.a13 * spec.a13 - spec.a33 * spec.a12 * spec.a12;
  const double c = spec.a12 * spec.a13 * spec.a23;
  const double q123 = std::pow(base + 2.0 * c * std::cos(spec.psi), theta) *
                      std::pow(spec.a11 * spec.a22 * spec.a33, 1.0 - theta);
  REQUIRE_THAT(q(full_mask(3)), WithinRel(q123, 1e-10));
}

TEST_CASE("pair_covariance achieves any n=2 point") {
  oracle::Rng rng(2081);
  for (int rep = 0; rep < 200; ++rep) {
    const double g1 = rng.uniform(-2.0, 2.0);
    const double g2 = rng.uniform(-2.0, 2.0);
    const double g12 = g1 + g2 - rng.uniform(0.0, 3.0);
    const auto m = pair_covariance(g1, g2, g12);
    REQUIRE_THAT(m(0, 0), WithinRel(std::exp(g1), 1e-12));
    REQUIRE_THAT(m(1, 1), WithinRel(std::exp(g2), 1e-12));
    REQUIRE_THAT(principal_minor(m, mask_of({1, 2})), WithinRel(std::exp(g12), 1e-9));
    // rho^2 = 1 - exp(g12 - g1 - g2)
    const double rho2 = m(0, 1) * m(0, 1) / (m(0, 0) * m(1, 1));
    REQUIRE_THAT(rho2, WithinAbs(1.0 - std::exp(g12 - g1 - g2), 1e-10));
  }
  REQUIRE_THROWS_AS(pair_covariance(0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("achieve_in_cone: scalar Gaussian round trip") {
  oracle::Rng rng(2083);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = p_of_matrix(random_correlation(rng));
    const auto result = achieve_in_cone(p);
    REQUIRE(result.theta_prime == 1.0);
    REQUIRE_FALSE(result.asymptotic);
    REQUIRE(result.max_rel_gap <= 1e-8);
  }
}

TEST_CASE("achieve_in_cone: independent vector gives a diagonal spec") {
  SubsetVector p(3);
  p[mask_of({1})] = 2.0;
  p[mask_of({2})] = 0.5;
  p[mask_of({3})] = 1.5;
  p[mask_of({1, 2})] = 1.0;
  p[mask_of({1, 3})] = 3.0;
  p[mask_of({2, 3})] = 0.75;
  p[mask_of({1, 2, 3})] = 1.5;
  const auto result = achieve_in_cone(p);
  REQUIRE(result.theta_prime == 1.0);
  REQUIRE_THAT(result.solution.alpha_off[0], WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(result.solution.alpha_off[1], WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(result.solution.alpha_off[2], WithinAbs(0.0, 1e-12));
  REQUIRE(result.max_rel_gap <= 1e-10);
}

TEST_CASE("achieve_in_cone: corner with y_tilde > 0 needs scaling") {
  SubsetVector p(3, 1.0);
  p[mask_of({2, 3})] = 0.5;
  p[mask_of({1, 3})] = 0.5;
  p[mask_of({1, 2})] = 0.8;
  p[mask_of({1, 2, 3})] = 0.25;  // = min p_ik p_jk / p_k, the corner
  const auto result = achieve_in_cone(p);
  REQUIRE(result.theta_prime > 1.0);
  REQUIRE_FALSE(result.asymptotic);
  // theta' converges to 1/delta0 of the unscaled profile
  REQUIRE_THAT(result.theta_prime, WithinRel(1.0 / 0.6765040660174905, 1e-4));
  REQUIRE(result.max_rel_gap <= 1e-6);
  // achieved q equals p^(1/theta') entrywise
  for (SubsetMask s : enumerate_subsets(3))
    REQUIRE_THAT(result.achieved_q[s],
                 WithinAbs(std::pow(p[s], 1.0 / result.theta_prime), 1e-6));
}

TEST_CASE("achieve_in_cone rejects vectors outside the continuous region") {
  SubsetVector p(3, 1.0);
  p[mask_of({1, 2})] = 1.2;  // p_12 > p_1 p_2
  REQUIRE_THROWS_AS(achieve_in_cone(p), NotInContinuousRegion);

  SubsetVector q(3, 1.0);
  q[mask_of({1, 2, 3})] = 1.5;  // above min p_ik p_jk / p_k = 1
  REQUIRE_THROWS_AS(achieve_in_cone(q), NotInContinuousRegion);
}

TEST_CASE("achieve_in_cone: asymptotic corner is flagged with its gap") {
  // x = (0.5, 0.9, 0.9) is case 3 (sup at infinity); the corner target is
  // approached but never attained
  SubsetVector p(3, 1.0);
  p[mask_of({2, 3})] = 0.5;
  p[mask_of({1, 3})] = 0.9;
  p[mask_of({1, 2})] = 0.9;
  p[mask_of({1, 2, 3})] = 0.45;
  const auto result = achieve_in_cone(p);
  REQUIRE(result.asymptotic);
  REQUIRE(result.max_rel_gap > 0.0);
  REQUIRE(result.max_rel_gap < 0.05);  // already close at the probe scales
}

TEST_CASE("kkt residual: structured gamma makes scalar structures stationary") {
  oracle::Rng rng(2087);
  for (int rep = 0; rep < 25; ++rep) {
    const Matrix a = random_correlation(rng);
    const auto gamma = gamma_for_structure(SymmetricMatrix(a));
    REQUIRE(is_balanced(gamma, 1e-8));
    REQUIRE(kkt_residual(BlockCovariance(3, 1, a), gamma) <= 1e-6);

    // alphaij relation: a_ij^2 gamma_i gamma_j =
    //   (gamma_i + gamma_ij)(gamma_j + gamma_ij) a_ii a_jj
    for (int i = 1; i <= 3; ++i)
      for (int j = i + 1; j <= 3; ++j) {
        const double gi = gamma.coeffs[mask_of({i})];
        const double gj = gamma.coeffs[mask_of({j})];
        const double gij = gamma.coeffs[mask_of({i, j})];
        const double lhs = a(i - 1, j - 1) * a(i - 1, j - 1) * gi * gj;
        const double rhs = (gi + gij) * (gj + gij) * a(i - 1, i - 1) * a(j - 1, j - 1);
        REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-8 * std::max(1.0, std::abs(rhs))));
      }
  }
}

TEST_CASE("kkt residual: orthogonal lift keeps stationarity") {
  oracle::Rng rng(2089);
  for (int rep = 0; rep < 10; ++rep) {
    // positive off-diagonal product so the extremal lift matches the scalar
    Matrix a = Matrix::Identity(3, 3);
    a(0, 1) = a(1, 0) = rng.uniform(0.05, 0.4);
    a(0, 2) = a(2, 0) = rng.uniform(0.05, 0.4);
    a(1, 2) = a(2, 1) = rng.uniform(0.05, 0.4);
    const auto gamma = gamma_for_structure(SymmetricMatrix(a));

    BoundaryCovarianceSpec spec;
    spec.a11 = a(0, 0);
    spec.a22 = a(1, 1);
    spec.a33 = a(2, 2);
    spec.a12 = a(0, 1);
    spec.a13 = a(0, 2);
    spec.a23 = a(1, 2);
    spec.T = 3;
    spec.That = 3;
    oracle::Rng r1(300 + rep), r2(400 + rep);
    spec.phi12 = r1.orthogonal(3);
    spec.phi23 = r2.orthogonal(3);
    const auto r = build_boundary_covariance(spec);
    REQUIRE(kkt_residual(r, gamma) <= 1e-6);
  }
}

TEST_CASE("kkt residual: unbalanced gamma cannot be stationary") {
  LinearFunctional gamma(3);
  gamma.coeffs[mask_of({1})] = 1.0;  // marginal of element 1 is nonzero
  const BlockCovariance r(3, 2, Matrix::Identity(6, 6));
  REQUIRE(kkt_residual(r, gamma) > 0.5);
}

TEST_CASE("kkt residual: diagonal covariances are critical for balanced gamma") {
  // submodularity pattern completed to balanced: (1,1,0,-1,0,0,0)
  LinearFunctional gamma(3);
  gamma.coeffs[mask_of({1})] = 1.0;
  gamma.coeffs[mask_of({2})] = 1.0;
  gamma.coeffs[mask_of({1, 2})] = -1.0;
  REQUIRE(is_balanced(gamma));
  Matrix d = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  REQUIRE(kkt_residual(BlockCovariance(3, 1, d), gamma) <= 1e-12);

  // a correlated, non-stationary point shows a visible residual
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = a(1, 0) = 0.6;
  REQUIRE(kkt_residual(BlockCovariance(3, 1, a), gamma) > 1e-2);
}

TEST_CASE("kkt residual propagates singular minors") {
  LinearFunctional gamma(3);
  gamma.coeffs[mask_of({1, 2})] = 1.0;
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = a(1, 0) = 1.0;  // det R_[12] = 0
  REQUIRE_THROWS_AS(kkt_residual(BlockCovariance(3, 1, a), gamma), SingularMinor);
}

TEST_CASE("boundary_optimize: T=1 reduces to scalars, gamma = 0 stays put") {
  oracle::Rng rng(2099);
  const auto gamma = gamma_for_structure(SymmetricMatrix(random_correlation(rng)));
  OptimizeOptions opts;
  opts.restarts = 2;
  const auto result = boundary_optimize(gamma, 1, 555, opts);
  REQUIRE(result.diagnostics.kkt_residual <= 1e-5);
  REQUIRE(result.diagnostics.ortho_deviation <= 1e-9);  // scalars: exact

  LinearFunctional zero(3);
  const auto idle = boundary_optimize(zero, 2, 555, opts);
  REQUIRE(idle.diagnostics.kkt_residual == 0.0);
  REQUIRE(idle.diagnostics.iterations == 0);

  LinearFunctional unbalanced(3);
  unbalanced.coeffs[mask_of({1})] = 1.0;
  REQUIRE_THROWS_AS(boundary_optimize(unbalanced, 1, 1), NotBalanced);
}

TEST_CASE("boundary_optimize: T=3 recovers block-orthogonal structure") {
  oracle::Rng rng(2111);
  int converged = 0;
  const int total = 5;
  for (int rep = 0; rep < total; ++rep) {
    const auto gamma = gamma_for_structure(SymmetricMatrix(random_correlation(rng)));
    const auto result = boundary_optimize(gamma, 3, 1000 + rep);
    if (result.diagnostics.kkt_residual <= 1e-5 &&
        result.diagnostics.ortho_deviation <= 1e-4)
      ++converged;
  }
  REQUIRE(converged >= (total * 4) / 5);
}
