#include <doctest.h>

#include "cvxgeo/stability.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "cvxgeo/generate.hpp"

namespace {

using cvx::ConvexBody;
using cvx::Matrix;
using cvx::ModulusCurve;
using cvx::Rational;
using cvx::StabilityKind;
using cvx::Vector;

ConvexBody unit_square() {
  Matrix n(4, 2);
  n << 1, 0, -1, 0, 0, 1, 0, -1;
  return ConvexBody::hpolytope(n, Vector::Ones(4));
}

ConvexBody triangle() {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, -1, -1;
  return ConvexBody::vpolytope(v);
}

// Certified curve for the polar gauge of the unit disk on the dyadic grid
// {0, t0/64, ..., t0} that the radius solver consumes.
ModulusCurve disk_polar_curve(double t0) {
  std::vector<double> ts = {0.0};
  for (int i = 6; i >= 0; --i) ts.push_back(t0 / static_cast<double>(1 << i));
  return cvx::lp_modulus_curve(2.0, ts);
}

double ipow(double b, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= b;
  return out;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("ellipsoid regime matches its closed forms") {
  const ModulusCurve none;
  CHECK(cvx::epsilon0(StabilityKind::ellipsoid, 2, none) ==
        doctest::Approx(1.52587890625e-8).epsilon(1e-15));
  CHECK(cvx::epsilon0(StabilityKind::ellipsoid, 3, none) ==
        doctest::Approx(3.9691612051008485e-10).epsilon(1e-15));
  // The n = 3 threshold is the exact reciprocal of 128000 * 3^9.
  CHECK(Rational(1, 128000) / Rational(3).pow(9) ==
        Rational(1, 2519424000LL));

  CHECK(cvx::solve_r(StabilityKind::ellipsoid, 3, 2e-10, none) ==
        doctest::Approx(0.0014736125994561546).epsilon(1e-14));
  CHECK(cvx::solve_r(StabilityKind::ellipsoid, 5, 0.0, none) == 0.0);

  cvx::StabilityCase c =
      cvx::solve_case(StabilityKind::ellipsoid, 3, 2e-10, none);
  CHECK(c.bound == doctest::Approx(2.591501607412647).epsilon(1e-14));
  CHECK(c.bound == cvx::stability_bound(c));  // stored exactly as computed
  CHECK(c.eps0 == doctest::Approx(3.9691612051008485e-10).epsilon(1e-15));

  cvx::StabilityCase c2 =
      cvx::solve_case(StabilityKind::ellipsoid, 2, 1e-12, none);
  CHECK(c2.bound == doctest::Approx(1.080634947193272).epsilon(1e-14));

  // At the threshold itself the radius hits the cap exactly: in exact
  // arithmetic (16 * eps0)^(1/3) is precisely 1/(20 n^3).
  for (int n : {2, 3, 4}) {
    const Rational eps0 = Rational(1, 128000) / Rational(n).pow(9);
    const auto root = (Rational(16) * eps0).exact_cbrt();
    REQUIRE(root.has_value());
    CHECK(*root == Rational(1) / (Rational(20) * Rational(n).pow(3)));
    const double rd = cvx::solve_r(StabilityKind::ellipsoid, n,
                                   cvx::epsilon0(StabilityKind::ellipsoid, n,
                                                 ModulusCurve{}),
                                   ModulusCurve{});
    CHECK(rd <= 1.0 / (20.0 * ipow(n, 3)) + 1e-15);
    CHECK(rd == doctest::Approx(1.0 / (20.0 * ipow(n, 3))).epsilon(1e-14));
  }

  CHECK_THROWS_AS(cvx::solve_r(StabilityKind::ellipsoid, 2, 1.6e-8, none),
                  cvx::Error);  // above the threshold
  CHECK_THROWS_AS(cvx::epsilon0(StabilityKind::ellipsoid, 1, none),
                  cvx::Error);
  CHECK_THROWS_AS(cvx::solve_r(StabilityKind::ellipsoid, 2, -1e-12, none),
                  cvx::Error);
}

TEST_CASE("radius solving tracks the certified envelope") {
  const double rmax = 1.0 / 160.0;  // n = 2 cap
  const double t0s = 1.0 / 1280.0;  // symmetric-regime argument at the cap
  const double t0g = 1.0 / 5120.0;  // general-regime argument at the cap
  const ModulusCurve sym_curve = disk_polar_curve(t0s);
  const ModulusCurve gen_curve = disk_polar_curve(t0g);

  const double eps0s = cvx::epsilon0(StabilityKind::symmetric, 2, sym_curve);
  const double eps0g = cvx::epsilon0(StabilityKind::general, 2, gen_curve);
  CHECK(eps0s == doctest::Approx(5.960464704912756e-11).epsilon(1e-12));
  CHECK(eps0g == doctest::Approx(1.86264515367185e-12).epsilon(1e-12));

  // Any deficit within a factor 8 of the threshold pins the radius to the
  // cap (the envelope is flat between dyadic grid points and the left-hand
  // side is cubic in r); smaller deficits step down the grid one level per
  // factor of 8 and then settle inside the flat step.
  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, eps0s, sym_curve) == rmax);
  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, eps0s / 2, sym_curve) ==
        rmax);
  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, eps0s / 8, sym_curve) ==
        doctest::Approx(0.003125000081851397).epsilon(1e-6));
  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, eps0s / 64, sym_curve) ==
        doctest::Approx(0.001562500059115593).epsilon(1e-6));
  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, eps0s / 512, sym_curve) ==
        doctest::Approx(0.0007812500477476917).epsilon(1e-6));
  CHECK(cvx::solve_r(StabilityKind::general, 2, eps0g / 2, gen_curve) ==
        rmax);

  // Solutions certify the inequality, sit at the feasibility boundary, and
  // respect the cap.
  const double eps = eps0s / 8;
  const double r = cvx::solve_r(StabilityKind::symmetric, 2, eps, sym_curve);
  CHECK(r * cvx::curve_lower_at(sym_curve, r / 8.0) >=
        8.0 * eps * (1.0 - 1e-12));
  const double below = r * (1.0 - 1e-8);
  CHECK(below * cvx::curve_lower_at(sym_curve, below / 8.0) <
        8.0 * eps * (1.0 - 1e-12));
  CHECK(r <= rmax + 1e-15);

  // Monotone in the deficit.
  double prev = 0.0;
  for (double f : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0}) {
    const double ri =
        cvx::solve_r(StabilityKind::symmetric, 2, f * eps0s, sym_curve);
    CHECK(ri >= prev - 1e-18);
    prev = ri;
  }

  CHECK(cvx::solve_r(StabilityKind::symmetric, 2, 0.0, sym_curve) == 0.0);
  CHECK_THROWS_AS(
      cvx::solve_r(StabilityKind::symmetric, 2, eps0s * 1.01, sym_curve),
      cvx::Error);  // no certified radius above the threshold

  // A curve with no certified sample at the required argument is rejected.
  ModulusCurve uncertified;
  uncertified.samples.push_back({t0s, 0.1, 0.2, false});
  CHECK_THROWS_AS(cvx::epsilon0(StabilityKind::symmetric, 2, uncertified),
                  cvx::Error);
  CHECK_THROWS_AS(
      cvx::solve_r(StabilityKind::symmetric, 2, 1e-12, uncertified),
      cvx::Error);
}

TEST_CASE("flat polar envelopes yield zero thresholds") {
  // The polar of a polytope is again a polytope, so its modulus vanishes:
  // the threshold is certified to be zero and no positive deficit admits a
  // radius.
  const ConvexBody square = unit_square();
  const double t0g = 1.0 / 5120.0;
  std::vector<double> ts = {0.0};
  for (int i = 6; i >= 0; --i) ts.push_back(t0g / static_cast<double>(1 << i));
  const ModulusCurve curve =
      cvx::build_modulus_curve(cvx::polar(square), ts, 512);
  CHECK(cvx::epsilon0(StabilityKind::general, 2, curve) == 0.0);
  CHECK(cvx::solve_r(StabilityKind::general, 2, 0.0, curve) == 0.0);
  CHECK_THROWS_AS(cvx::solve_r(StabilityKind::general, 2, 1e-15, curve),
                  cvx::Error);
}

TEST_CASE("assembled cases persist their invariants") {
  const double t0s = 1.0 / 1280.0;
  const ModulusCurve curve = disk_polar_curve(t0s);
  const double eps0 = cvx::epsilon0(StabilityKind::symmetric, 2, curve);

  cvx::StabilityCase c =
      cvx::solve_case(StabilityKind::symmetric, 2, eps0 / 8, curve);
  CHECK(c.n == 2);
  CHECK(c.kind == StabilityKind::symmetric);
  CHECK(c.eps == eps0 / 8);
  CHECK(c.eps0 == eps0);
  CHECK(c.eps <= c.eps0);
  CHECK(c.r <= 1.0 / 160.0 + 1e-15);
  CHECK(c.bound == cvx::stability_bound(c));
  CHECK(c.bound == 1.0 + 320.0 * c.r);

  CHECK_THROWS_AS(
      cvx::solve_case(StabilityKind::symmetric, 2, eps0 * 1.5, curve),
      cvx::Error);
  CHECK_THROWS_AS(
      cvx::solve_case(StabilityKind::symmetric, 2, -1e-16, curve),
      cvx::Error);
}

TEST_CASE("lp corollary evaluates the branch constants") {
  // Steep branch, frozen constants.
  cvx::LpCorollary hi = cvx::lp_corollary(4.0, 2, 1e-12);
  CHECK(hi.bound == doctest::Approx(2.172187384374612).epsilon(1e-13));
  CHECK(hi.threshold ==
        doctest::Approx(7.761021455128987e-11).epsilon(1e-13));
  CHECK(hi.applicable);
  CHECK(cvx::lp_corollary(4.0, 2, 1e-10).applicable == false);

  // Shallow branch, frozen constants.
  cvx::LpCorollary lo = cvx::lp_corollary(1.5, 2, 1e-20);
  CHECK(lo.threshold ==
        doctest::Approx(1.850371707708594e-17).epsilon(1e-13));
  CHECK(lo.bound == doctest::Approx(1.0566621142886565).epsilon(1e-13));
  CHECK(lo.proof_r == doctest::Approx(0.0017706910715205146).epsilon(1e-13));
  CHECK(lo.applicable);

  // Zero deficit collapses both branches to the trivial bound.
  CHECK(cvx::lp_corollary(3.0, 3, 0.0).bound == 1.0);
  CHECK(cvx::lp_corollary(1.5, 3, 0.0).bound == 1.0);
  CHECK(cvx::lp_corollary(3.0, 3, 0.0).proof_r == 0.0);

  // The two branches agree on the deficit exponent at p = 2: scaling the
  // deficit by 8 scales bound - 1 by 8^(1/3) = 2 on both sides of the seam.
  const double e1 = 1e-18;
  const double ra = (cvx::lp_corollary(2.0, 2, 8 * e1).bound - 1.0) /
                    (cvx::lp_corollary(2.0, 2, e1).bound - 1.0);
  const double rb =
      (cvx::lp_corollary(2.0 - 1e-9, 2, 8 * e1).bound - 1.0) /
      (cvx::lp_corollary(2.0 - 1e-9, 2, e1).bound - 1.0);
  CHECK(ra == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rb == doctest::Approx(2.0).epsilon(1e-6));

  CHECK_THROWS_AS(cvx::lp_corollary(1.0, 2, 1e-12), cvx::Error);
  CHECK_THROWS_AS(cvx::lp_corollary(0.5, 2, 1e-12), cvx::Error);
  CHECK_THROWS_AS(
      cvx::lp_corollary(std::numeric_limits<double>::infinity(), 2, 1e-12),
      cvx::Error);
  CHECK_THROWS_AS(cvx::lp_corollary(4.0, 2, -1.0), cvx::Error);
}

TEST_CASE("corollary radii satisfy the symmetric regime") {
  // The radius the steep branch plugs into the symmetric-regime inequality
  // keeps a factor-4 margin when the polar modulus is replaced by its
  // certified quadratic lower bound.
  for (double p : {2.0, 4.0}) {
    for (int n : {2, 3}) {
      const double q = p / (p - 1.0);
      const double thr = cvx::lp_corollary(p, n, 0.0).threshold;
      for (double eps : {thr * 1e-6, thr / 8.0}) {
        const cvx::LpCorollary cor = cvx::lp_corollary(p, n, eps);
        const double arg = cor.proof_r / (2.0 * n * n);
        const double dq = cvx::modulus_lp(q, arg).value;
        CHECK(cor.proof_r * dq >= 4.0 * n * eps * (1.0 - 1e-12));

        // The generic solver with the same modulus never needs a larger
        // radius than the branch states.
        std::vector<double> ts = {0.0};
        for (int k = 0; k <= 48; ++k) {
          ts.push_back(arg * std::pow(2.0, -0.25 * k));
        }
        const ModulusCurve curve = cvx::lp_modulus_curve(q, ts);
        const double solved =
            cvx::solve_r(StabilityKind::symmetric, n, eps, curve);
        CHECK(solved <= cor.proof_r * (1.0 + 1e-9));
      }
    }
  }

  // Shallow branch: both the stated radius and the one the displayed bound
  // implies satisfy the inequality against the exact polar modulus.
  for (double eps : {1.850371707708594e-17 * 1e-3, 1.850371707708594e-17}) {
    const cvx::LpCorollary cor = cvx::lp_corollary(1.5, 2, eps);
    const double q = 3.0;
    for (double r : {cor.proof_r, (cor.bound - 1.0) / 320.0}) {
      const double dq = cvx::modulus_lp(q, r / 8.0).value;
      CHECK(r * dq >= 8.0 * eps * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("diameter replay is exact") {
  const cvx::DiameterTrace t2 = cvx::diameter_bound(2);
  CHECK(t2.ok());
  CHECK(t2.bound == Rational(2147483647LL, 536870912LL));
  CHECK(t2.term == Rational(5, 8));
  CHECK(t2.eps == Rational(1, 2147483648LL));
  CHECK(t2.r == Rational(1, 512));

  const cvx::DiameterTrace t3 = cvx::diameter_bound(3);
  CHECK(t3.ok());
  CHECK(t3.bound == Rational(82556485631LL, 9172942848LL));
  CHECK(t3.term == Rational(5, 8));

  for (int n = 2; n <= 10; ++n) {
    const cvx::DiameterTrace tr = cvx::diameter_bound(n);
    CHECK(tr.ok());
    CHECK(tr.term == Rational(5, 8));
    const Rational one_plus_sq =
        (Rational(1) + tr.term) * (Rational(1) + tr.term);
    CHECK(one_plus_sq == Rational(169, 64));
    // The stored bound is the same rational as (1 - eps) n^2.
    CHECK(tr.bound == (Rational(1) - tr.eps) * Rational(n).pow(2));
    CHECK(tr.bound.to_double() <
          static_cast<double>(n) * static_cast<double>(n));
  }

  CHECK_THROWS_AS(cvx::diameter_bound(1), cvx::Error);
}

TEST_CASE("validation accepts extremal pairs and rejects distant ones") {
  const ConvexBody disk = ConvexBody::lp_ball(2.0, 2);

  SUBCASE("simplex against the disk is the equality case") {
    const cvx::StabilityReport rep = cvx::validate_stability(
        disk, cvx::regular_simplex(2), StabilityKind::ellipsoid);
    CHECK(rep.n == 2);
    CHECK(rep.distance_lower == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.eps <= 1e-9);
    CHECK(rep.applicable);
    CHECK(rep.r >= 0.0);
    CHECK(rep.bound >= 1.0);
    CHECK(rep.bound < 1.1);
    CHECK(rep.proximity.upper == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_FALSE(rep.violation);
    CHECK(rep.placement.cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("jittered simplex against the ball passes end to end") {
    const cvx::StabilityReport rep = cvx::validate_stability(
        ConvexBody::lp_ball(2.0, 3), cvx::jittered_simplex(3, 1e-6, 7, 0),
        StabilityKind::ellipsoid);
    CHECK(rep.applicable);  // a jittered simplex is still a simplex
    CHECK(rep.eps <= rep.eps0);
    CHECK(rep.proximity.upper >= 1.0 - 1e-9);
    CHECK(rep.proximity.upper <= 1.05);
    CHECK_FALSE(rep.violation);
  }

  SUBCASE("square against the disk is far from extremal") {
    const cvx::StabilityReport rep = cvx::validate_stability(
        disk, unit_square(), StabilityKind::ellipsoid);
    CHECK_FALSE(rep.applicable);  // both bodies symmetric: deficit 1/2
    CHECK(rep.eps == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.r == 0.0);
    CHECK(rep.bound == 1.0);
    CHECK_FALSE(rep.violation);
  }

  SUBCASE("polytope reference bodies carry flat envelopes") {
    // The triangle attains the planar asymmetry maximum, so the deficit is
    // zero and even the flat envelope of a polytope polar applies.
    const cvx::StabilityReport rep = cvx::validate_stability(
        unit_square(), triangle(), StabilityKind::general);
    CHECK(rep.eps0 == 0.0);
    CHECK(rep.eps == 0.0);
    CHECK(rep.applicable);
    CHECK(rep.r == 0.0);
    CHECK(rep.bound == 1.0);
    CHECK(rep.proximity.upper == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_FALSE(rep.violation);
  }

  SUBCASE("symmetric regime uses the closed-form polar curve") {
    const cvx::StabilityReport rep = cvx::validate_stability(
        disk, cvx::regular_simplex(2), StabilityKind::symmetric);
    CHECK(rep.eps0 == doctest::Approx(5.960464704912756e-11).epsilon(1e-9));
    CHECK(rep.applicable);
    CHECK(rep.eps1 >= 0.0);
    CHECK_FALSE(rep.violation);
  }

  SUBCASE("regime guards reject mismatched references") {
    CHECK_THROWS_AS(cvx::validate_stability(triangle(), disk,
                                            StabilityKind::symmetric),
                    cvx::Error);
    CHECK_THROWS_AS(cvx::validate_stability(unit_square(), disk,
                                            StabilityKind::ellipsoid),
                    cvx::Error);
    CHECK_THROWS_AS(cvx::validate_stability(ConvexBody::lp_ball(2.0, 3),
                                            cvx::regular_simplex(2),
                                            StabilityKind::ellipsoid),
                    cvx::Error);
  }
}

}  // TEST_SUITE
