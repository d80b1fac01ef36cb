#ifndef CVXGEO_DISTANCE_HPP
#define CVXGEO_DISTANCE_HPP

#include "cvxgeo/body.hpp"
#include "cvxgeo/john.hpp"

namespace cvx {

enum class DistanceKind { banach_mazur, grunbaum };

// Witness of the homothety sandwich behind an upper bound:
//   map(K) subset of L  and  L - inner_shift subset of
//   sign * outer_scale * (map(K) - inner_shift).
struct DistanceWitness {
  AffineMap map;
  Vector inner_shift;
  double outer_scale = 1.0;
  int sign = +1;
};

struct SearchTelemetry {
  long evals = 0;       // objective evaluations in the shift search
  int restarts = 0;     // simplex-search restarts consumed
  double residual = 0.0;  // worst decomposition residual at the witness
};

struct DistanceBound {
  DistanceKind kind = DistanceKind::banach_mazur;
  double upper = 1.0;
  double lower = 1.0;
  Cert upper_status = Cert::heuristic;
  Cert lower_status = Cert::heuristic;
  DistanceWitness witness;
  SearchTelemetry telemetry;
};

// Least r >= 1 with L subset of sign * r * K. Requires K subset of L
// (certified, else NotNested) and 0 interior to K. Exact when K is a
// polytope (the gauge of K is a finite max over facets, so the supremum
// over L is a support-function evaluation per facet) or when L is a
// polytope (the gauge is maximized at a vertex). Only the smooth-smooth
// combination falls back to sampled maximization of the gauge over the
// boundary of L (heuristic).
double containment_factor(const ConvexBody& k, const ConvexBody& l, int sign);

// Upper bound via max-volume positioning + decomposition shift, minimized
// over both homothety signs, with a deterministic coordinate-descent
// refinement of (map, shift) around the positioned witness (200 trial
// steps, step decay 0.8 per sweep). The inner body must be a polytope
// unless the two bodies are structurally identical (then the bound is 1).
DistanceBound grunbaum_upper(const ConvexBody& k, const ConvexBody& l);

// Same pipeline restricted to the positive homothety sign, so that the
// sign-minimized bound never exceeds this one.
DistanceBound banach_mazur_upper(const ConvexBody& k, const ConvexBody& l);

// max(s(K)/s(L), s(L)/s(K)): a lower bound for the Banach-Mazur distance.
double distance_lower_via_asymmetry(const ConvexBody& k, const ConvexBody& l);

// Upper bound on the distance from k to the simplex class, built from the
// contact simplex: choose n+1 contact points of the certificate maximizing
// simplex volume (greedy seed + at most 50 swap improvements), center the
// simplex, and report the positive containment factor of k around it.
// k must be the positioned body the certificate belongs to.
DistanceBound simplex_proximity(const ConvexBody& k, const JohnCertificate& cert);

// Fallback without a certificate: positions a regular simplex template
// inside k and reports the factor around the positioned template.
DistanceBound simplex_proximity(const ConvexBody& k);

}  // namespace cvx

#endif  // CVXGEO_DISTANCE_HPP
