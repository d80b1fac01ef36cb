#pragma once

#include <string>
#include <vector>

#include "cvxgeo/body.hpp"

namespace cvx {

// How a modulus value is to be interpreted: an exact closed form, or a
// certified one-sided bound.
enum class ModulusKind { exact, lower_bound };

struct ModulusValue {
  double value = 0.0;
  ModulusKind kind = ModulusKind::exact;
};

// Modulus of convexity of the unit lp ball. For p >= 2 the closed form
// 1 - (1 - (t/2)^p)^(1/p) is exact; for p in (1,2) the quadratic bound
// (p-1) t^2 / 8 is returned and tagged as a lower bound.
ModulusValue modulus_lp(double p, double t);

// Two-sided numerical bracket of the modulus of convexity at one t.
struct ModulusBracket {
  double lower = 0.0;
  double upper = 1.0;
  // True when the lower bound carries a mesh-slack certificate (always in
  // the plane; sampled estimates in higher dimension are not certified).
  bool certified = false;
};

// Brackets delta_body(t) = inf { 1 - gauge((x+y)/2) : x,y in body,
// separation >= t }, where the separation of a pair is the larger of the
// two gauge orientations of x - y. The upper bound comes from the best
// feasible pair found. In the plane the lower bound is certified by a
// two-stage angular scan of boundary pairs whose slack follows from the
// body's circumradius/inradius ratio; `budget` sets the coarse ring size.
// Requires 0 in the interior of the body and t in [0, 1].
ModulusBracket modulus_estimate(const ConvexBody& body, double t,
                                int budget = 1024);

struct ModulusSample {
  double t = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  bool certified = false;
};

// Sampled modulus curve; queries between samples fall back to the last
// certified sample at or below t, so certification is preserved.
struct ModulusCurve {
  std::string label;
  std::vector<ModulusSample> samples;  // ascending in t
};

// Estimates the modulus at each requested t and assembles a curve.
ModulusCurve build_modulus_curve(const ConvexBody& body,
                                 const std::vector<double>& ts,
                                 int budget = 1024,
                                 const std::string& label = "");

// Closed-form curve for the lp ball on a uniform grid (exact samples for
// p >= 2, certified lower bounds for p < 2).
ModulusCurve lp_modulus_curve(double p, int count = 65,
                              const std::string& label = "");

// Same closed-form construction on an explicit grid of separations, for
// callers needing certified values at specific (typically tiny) t.
ModulusCurve lp_modulus_curve(double p, const std::vector<double>& ts,
                              const std::string& label = "");

// Monotone certified lower envelope of the curve at t (0 below the first
// certified sample).
double curve_lower_at(const ModulusCurve& curve, double t);

// Lower bound for the modulus of the shifted body L - z when z lies in
// (1-c)L and L is contained in -r_asym L: the envelope of `curve_l` (the
// modulus curve of L) at c*t, divided by 1 + (1-c) r_asym.
double shift_bound_gauge(const ModulusCurve& curve_l, double c,
                         double r_asym, double t);

// Lower bound for the modulus of the polar of the shifted body under the
// same hypotheses: envelope of `curve_polar` (curve of the polar of L) at
// c^2 t / (1 - c + r_asym), divided by (1-c) r_asym + 1.
double shift_bound_polar(const ModulusCurve& curve_polar, double c,
                         double r_asym, double t);

enum class BodyClass { general, symmetric };

// Ready-made specializations for shifts z in (n/(n+1)) L: the general kind
// evaluates envelope(t / (4 n^3)) / (2n) and needs L inside -nL; the
// symmetric kind evaluates envelope(t / (2 n^2)) / 2 and needs L = -L.
// The symmetric form is genuinely stronger than plugging the symmetric
// parameters into shift_bound_polar; it relies on the gauge being a norm.
double corollary_polar_bound(BodyClass kind, const ModulusCurve& curve_polar,
                             int n, double t);

// Smallest r with body inside -r * body: exact over vertices for
// polytopes, sampled (and clamped to >= 1) for smooth kinds.
double origin_asymmetry(const ConvexBody& body);

}  // namespace cvx
