#ifndef CVXGEO_STABILITY_HPP
#define CVXGEO_STABILITY_HPP

#include <string>

#include "cvxgeo/body.hpp"
#include "cvxgeo/distance.hpp"
#include "cvxgeo/moduli.hpp"
#include "cvxgeo/rational.hpp"

namespace cvx {

// The three regimes of the simplex-proximity estimate, ordered by how much
// structure the reference body carries.
enum class StabilityKind { general, symmetric, ellipsoid };

// One solved instance: the applicability threshold eps0, the radius r fed by
// the deficit eps, and the resulting proximity bound 1 + 40 n^3 r.
struct StabilityCase {
  StabilityKind kind = StabilityKind::general;
  int n = 0;
  ModulusCurve polar_curve;  // certified envelope of the polar modulus
                             // (ignored for the ellipsoid regime)
  double eps = 0.0;
  double eps0 = 0.0;
  double r = 0.0;
  double bound = 1.0;
};

// Largest deficit the estimate tolerates, per regime:
//   general    envelope(1/(80 n^6)) / (80 n^5)
//   symmetric  envelope(1/(40 n^5)) / (80 n^4)
//   ellipsoid  1 / (128000 n^9)
// The envelope is the certified lower envelope of `polar_curve`; requesting
// a regime whose argument has no certified sample at or below it throws
// UncertifiedCurve. A flat certified envelope legitimately yields 0.
double epsilon0(StabilityKind kind, int n, const ModulusCurve& polar_curve);

// Smallest radius r in [0, 1/(20 n^3)] whose certified envelope value
// satisfies the regime inequality
//   general    r * envelope(r / (4 n^3)) >= 4 n^2 eps
//   symmetric  r * envelope(r / (2 n^2)) >= 4 n  eps
// found by 64 bisection steps on the monotone left-hand side; the ellipsoid
// regime returns the closed form (16 eps)^(1/3). Requires eps <= epsilon0;
// an envelope too coarse to certify any radius throws NoSolution.
double solve_r(StabilityKind kind, int n, double eps,
               const ModulusCurve& polar_curve);

// Assembles a full case: eps0, r, and bound = 1 + 40 n^3 r.
StabilityCase solve_case(StabilityKind kind, int n, double eps,
                         ModulusCurve polar_curve);

// The proximity bound 1 + 40 n^3 r of a solved case.
double stability_bound(const StabilityCase& c);

// Specialization to K measured against the unit lp ball: the matching
// branch's threshold and proximity bound, plus the radius its derivation
// plugs into the symmetric regime (kept for cross-validation).
struct LpCorollary {
  double bound = 1.0;      // proximity bound of the matching branch
  double threshold = 0.0;  // deficit threshold of the matching branch
  bool applicable = false;  // eps <= threshold
  double proof_r = 0.0;    // radius certified against the symmetric regime
};
LpCorollary lp_corollary(double p, int n, double eps);

// Exact-arithmetic replay of the diameter estimate n^2 - 2^-22 n^-7 for the
// distance between two arbitrary bodies: every step of the derivation is a
// rational identity or comparison, recorded individually.
struct DiameterTrace {
  int n = 0;
  Rational eps;    // 2^-22 n^-9
  Rational eps0;   // ellipsoid threshold 1/(128000 n^9)
  Rational r;      // exact cube root of 16 eps = 1/(64 n^3)
  Rational term;   // 40 n^3 r, equal to 5/8 for every n
  Rational bound;  // n^2 - 2^-22 n^-7 = (1 - eps) n^2
  bool eps_within = false;         // eps <= eps0
  bool cube_exact = false;         // r^3 == 16 eps, r == 1/(64 n^3)
  bool square_below_three = false;  // (1 + term)^2 < 3
  bool three_below_target = false;  // 3 < (1 - eps) n^2
  bool ok() const {
    return eps_within && cube_exact && square_below_three &&
           three_below_target;
  }
};
DiameterTrace diameter_bound(int n);

// End-to-end check of one instance: derive the deficit eps from the
// certified asymmetry lower bound on the distance between k and l, test
// applicability, solve the radius, and compare the simplex-proximity upper
// bound of k against 1 + 40 n^3 r. l is re-anchored at its asymmetry-optimal
// center (recorded in `placement`) so the containment constraint l <= -n l
// holds. A proximity value above the bound is flagged as a violation; the
// estimate proven elsewhere makes that a reportable defect, not an expected
// outcome.
struct StabilityReport {
  int n = 0;
  StabilityKind kind = StabilityKind::general;
  Vector placement;             // shift applied to l
  double distance_lower = 1.0;  // certified lower bound on the distance
  double eps = 0.0;
  double eps0 = 0.0;
  bool applicable = false;  // eps <= eps0
  double r = 0.0;           // populated only when applicable
  double bound = 1.0;       // 1 + 40 n^3 r when applicable
  double eps1 = 0.0;        // regime threshold at the solved r (trace only)
  DistanceBound proximity;  // simplex-proximity result for k
  bool violation = false;   // applicable && proximity.upper > bound
};
StabilityReport validate_stability(const ConvexBody& l, const ConvexBody& k,
                                   StabilityKind kind, int budget = 512);

}  // namespace cvx

#endif  // CVXGEO_STABILITY_HPP
