#include "cvxgeo/stability.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace cvx {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

// Argument of the polar envelope in the regime's threshold definition; the
// radius inequality evaluates the same envelope at r / denom, so the
// threshold argument is exactly rmax / denom.
double envelope_denominator(StabilityKind kind, int n) {
  const double nd = static_cast<double>(n);
  return kind == StabilityKind::general ? 4.0 * ipow(nd, 3) : 2.0 * nd * nd;
}

void require_certified_at(const ModulusCurve& curve, double t) {
  for (const ModulusSample& s : curve.samples) {
    if (s.certified && s.t <= t) return;
  }
  fail(ErrorCode::uncertified_curve,
       "stability: polar curve has no certified sample at the required "
       "separation");
}

bool pristine_lp_ball(const ConvexBody& b) {
  if (b.kind() != BodyKind::lp_ball) return false;
  if (!b.linear_inverse().isIdentity(1e-14)) return false;
  return b.lp_base_shift().cwiseAbs().maxCoeff() <= 1e-15;
}

}  // namespace

double epsilon0(StabilityKind kind, int n, const ModulusCurve& polar_curve) {
  if (n < 2) fail(ErrorCode::domain_error, "epsilon0: need n >= 2");
  const double nd = static_cast<double>(n);
  if (kind == StabilityKind::ellipsoid) {
    return 1.0 / (128000.0 * ipow(nd, 9));
  }
  const double t0 = 1.0 / (20.0 * ipow(nd, 3) * envelope_denominator(kind, n));
  require_certified_at(polar_curve, t0);
  const double env = curve_lower_at(polar_curve, t0);
  const double denom = kind == StabilityKind::general ? 80.0 * ipow(nd, 5)
                                                      : 80.0 * ipow(nd, 4);
  return env / denom;
}

double solve_r(StabilityKind kind, int n, double eps,
               const ModulusCurve& polar_curve) {
  if (n < 2) fail(ErrorCode::domain_error, "solve_r: need n >= 2");
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    fail(ErrorCode::domain_error, "solve_r: deficit must be finite and >= 0");
  }
  if (eps == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  if (kind == StabilityKind::ellipsoid) {
    if (eps > 1.0 / (128000.0 * ipow(nd, 9))) {
      fail(ErrorCode::domain_error,
           "solve_r: deficit exceeds the ellipsoid threshold");
    }
    return std::cbrt(16.0 * eps);
  }
  const double rmax = 1.0 / (20.0 * ipow(nd, 3));
  const double denom = envelope_denominator(kind, n);
  const double target =
      (kind == StabilityKind::general ? 4.0 * nd * nd : 4.0 * nd) * eps;
  require_certified_at(polar_curve, rmax / denom);
  // The tiny relative cushion keeps eps == epsilon0 feasible at rmax even
  // though the two sides round differently; it sits far below every
  // downstream tolerance.
  const auto feasible = [&](double r) {
    return r * curve_lower_at(polar_curve, r / denom) >=
           target * (1.0 - 1e-12);
  };
  if (!feasible(rmax)) {
    fail(ErrorCode::no_solution,
         "solve_r: no certified radius; deficit exceeds what the envelope "
         "supports");
  }
  double lo = 0.0;
  double hi = rmax;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

StabilityCase solve_case(StabilityKind kind, int n, double eps,
                         ModulusCurve polar_curve) {
  StabilityCase c;
  c.kind = kind;
  c.n = n;
  c.polar_curve = std::move(polar_curve);
  c.eps = eps;
  c.eps0 = epsilon0(kind, n, c.polar_curve);
  if (!(eps >= 0.0) || eps > c.eps0) {
    fail(ErrorCode::domain_error,
         "solve_case: deficit outside [0, epsilon0]");
  }
  c.r = solve_r(kind, n, eps, c.polar_curve);
  c.bound = stability_bound(c);
  return c;
}

double stability_bound(const StabilityCase& c) {
  return 1.0 + 40.0 * ipow(static_cast<double>(c.n), 3) * c.r;
}

LpCorollary lp_corollary(double p, int n, double eps) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    fail(ErrorCode::domain_error, "lp_corollary: need p in (1, inf)");
  }
  if (n < 2) fail(ErrorCode::domain_error, "lp_corollary: need n >= 2");
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    fail(ErrorCode::domain_error,
         "lp_corollary: deficit must be finite and >= 0");
  }
  const double nd = static_cast<double>(n);
  LpCorollary out;
  if (p >= 2.0) {
    out.threshold = 1.0 / (262144.0 * (p - 1.0) * ipow(nd, 14));
    const double common = std::cbrt(p - 1.0) * std::cbrt(eps);
    out.bound = 1.0 + 320.0 * std::pow(nd, 14.0 / 3.0) * common;
    out.proof_r = 8.0 * std::pow(nd, 5.0 / 3.0) * common;
  } else {
    const double q = p / (p - 1.0);
    out.threshold = 1.0 / (q * std::pow(2.0, (15.0 * p - 7.0) / (p - 1.0)) *
                           std::pow(nd, (11.0 * p - 5.0) / (p - 1.0)));
    const double x = 1.0 / (2.0 * (2.0 * p - 1.0));
    const double common =
        std::pow(q, 0.5 - x) * std::pow(eps, 0.5 - x);
    out.bound = 1.0 + 160.0 * std::pow(nd, 4.5 + x) * common;
    out.proof_r = 40.0 * std::pow(nd, 1.5 + x) * common;
  }
  out.applicable = eps <= out.threshold;
  return out;
}

DiameterTrace diameter_bound(int n) {
  if (n < 2) fail(ErrorCode::domain_error, "diameter_bound: need n >= 2");
  if (n > 64) {
    fail(ErrorCode::domain_error,
         "diameter_bound: rational replay supports n <= 64");
  }
  DiameterTrace tr;
  tr.n = n;
  const Rational n3 = Rational(n).pow(3);
  const Rational n9 = Rational(n).pow(9);
  tr.eps = Rational(1, 4194304) / n9;  // 2^-22 n^-9
  tr.eps0 = Rational(1, 128000) / n9;
  tr.eps_within = tr.eps <= tr.eps0;
  const auto root = (Rational(16) * tr.eps).exact_cbrt();
  tr.r = root ? *root : Rational(0);
  tr.cube_exact =
      root.has_value() && tr.r == Rational(1) / (Rational(64) * n3);
  tr.term = Rational(40) * n3 * tr.r;
  const Rational one_plus = Rational(1) + tr.term;
  tr.square_below_three = one_plus * one_plus < Rational(3);
  const Rational nsq = Rational(n).pow(2);
  tr.three_below_target = Rational(3) < (Rational(1) - tr.eps) * nsq;
  tr.bound = nsq - Rational(1, 4194304) / Rational(n).pow(7);
  return tr;
}

StabilityReport validate_stability(const ConvexBody& l, const ConvexBody& k,
                                   StabilityKind kind, int budget) {
  const int n = l.dim();
  if (k.dim() != n) {
    fail(ErrorCode::domain_error, "validate_stability: dimension mismatch");
  }
  if (n < 2) fail(ErrorCode::domain_error, "validate_stability: need n >= 2");

  StabilityReport rep;
  rep.n = n;
  rep.kind = kind;

  const AsymmetryResult as = asymmetry_constant(l);
  if (kind == StabilityKind::symmetric && as.s > 1.0 + 1e-9) {
    fail(ErrorCode::domain_error,
         "validate_stability: symmetric regime needs a centrally symmetric "
         "body");
  }
  if (kind == StabilityKind::ellipsoid) {
    const bool is_ellipsoid =
        l.kind() == BodyKind::ellipsoid ||
        (l.kind() == BodyKind::lp_ball && l.lp_exponent() == 2.0);
    if (!is_ellipsoid) {
      fail(ErrorCode::domain_error,
           "validate_stability: ellipsoid regime needs an ellipsoid");
    }
  }
  // Re-anchor at the asymmetry-optimal center: there the containment
  // constraint holds with the best possible factor s <= n.
  const ConvexBody work_l = shift(l, as.z);
  rep.placement = as.z;

  rep.distance_lower = distance_lower_via_asymmetry(k, work_l);
  rep.eps = std::max(0.0, 1.0 - rep.distance_lower / static_cast<double>(n));

  ModulusCurve curve;
  if (kind != StabilityKind::ellipsoid) {
    const double nd = static_cast<double>(n);
    const double t0 =
        1.0 / (20.0 * ipow(nd, 3) * envelope_denominator(kind, n));
    std::vector<double> ts = {0.0};
    for (int i = 6; i >= 0; --i) ts.push_back(t0 / static_cast<double>(1 << i));
    if (pristine_lp_ball(work_l)) {
      // The polar of the unit lp ball is the unit lq ball, so the closed
      // form replaces the estimator.
      const double p = work_l.lp_exponent();
      curve = lp_modulus_curve(p / (p - 1.0), ts);
    } else {
      curve = build_modulus_curve(polar(work_l), ts, budget);
    }
  }
  rep.eps0 = epsilon0(kind, n, curve);
  rep.applicable = rep.eps <= rep.eps0;
  if (rep.applicable) {
    rep.r = solve_r(kind, n, rep.eps, curve);
    StabilityCase c;
    c.kind = kind;
    c.n = n;
    c.r = rep.r;
    rep.bound = stability_bound(c);
    const double nd = static_cast<double>(n);
    switch (kind) {
      case StabilityKind::general:
        rep.eps1 = curve_lower_at(curve, rep.r / (4.0 * ipow(nd, 3))) /
                   (2.0 * nd);
        break;
      case StabilityKind::symmetric:
        rep.eps1 = curve_lower_at(curve, rep.r / (2.0 * nd * nd)) / 2.0;
        break;
      case StabilityKind::ellipsoid:
        rep.eps1 = rep.r * rep.r / 8.0;
        break;
    }
  }

  // Proximity of k to the simplex class: contact-simplex pipeline when k is
  // a polytope, positioned template otherwise.
  if (k.kind() == BodyKind::vpolytope || k.kind() == BodyKind::hpolytope) {
    const AffineMap pose = max_volume_position(k, work_l);
    const ConvexBody kpos = transform(pose, k);
    const JohnCertificate cert = decomposition_shift(kpos, work_l);
    rep.proximity = simplex_proximity(kpos, cert);
  } else {
    rep.proximity = simplex_proximity(k);
  }
  rep.violation = rep.applicable && rep.proximity.upper > rep.bound + 1e-7;
  return rep;
}

}  // namespace cvx
