#ifndef CVXGEO_JOHN_HPP
#define CVXGEO_JOHN_HPP

#include "cvxgeo/body.hpp"

#include <cstdint>
#include <vector>

namespace cvx {

// One contact of a positioned pair: a point u on both boundaries and a
// functional v supporting both bodies there, scaled so <u, v> = 1.
struct ContactPair {
  Vector u;
  Vector v;
};

// Nonnegative least-squares fit of weights a_i >= 0 for the system
//   sum a_i v_i u_i^T = I,  sum a_i u_i = 0,  sum a_i v_i = 0,
// with the residual norm of each block reported separately.
struct WeightSolve {
  Vector weights;
  double residual_identity = 0.0;
  double residual_u = 0.0;
  double residual_v = 0.0;
  bool rank_deficient = false;  // stacked system has dependent columns
};

// Decomposition certificate for a positioned pair (K, L). The contact pairs
// are stored in the shifted frame, i.e. they belong to (K - shift, L - shift),
// so every stored identity can be re-verified from the raw arrays alone.
struct JohnCertificate {
  std::vector<ContactPair> contacts;
  Vector weights;
  double residual_identity = 0.0;
  double residual_u = 0.0;
  double residual_v = 0.0;
  Vector shift;  // z

  bool search_converged = false;  // all residuals within tolerance
  int search_restarts = 0;        // simplex-search restarts consumed
  long search_evals = 0;          // objective evaluations in the z-search

  // Positioning metadata (filled by callers that ran the barrier solve).
  int barrier_outer_steps = 0;
  int barrier_newton_steps = 0;
  double log_det = 0.0;
};

struct MaxVolumeStats {
  int outer_steps = 0;
  int newton_steps = 0;
  int polish_rounds = 0;
  double log_det = 0.0;
  double max_gauge = 0.0;        // max over positioned vertices of gauge_L
  double final_decrement = 0.0;  // Newton decrement at the last subproblem
};

// Value and gradient of the normalized barrier objective
//   f_tau(A, b) = -log det A - (1/tau) * sum_c log(slack_c)
// for the constraints keeping every row of `verts`, mapped through
// x -> A x + b, inside `l`. For a polytope container each (facet, vertex)
// pair contributes one linear constraint; for a smooth container each vertex
// contributes its gauge constraint. The gradient is taken with respect to
// the stacked variables [vec(A) column-major; b].
struct BarrierEval {
  double value = 0.0;
  Vector grad;
  bool feasible = false;
};

BarrierEval barrier_eval(const Matrix& verts, const ConvexBody& l, double tau,
                         const Matrix& a, const Vector& b);

// Affine map (A, b) locally maximizing log det A subject to the image of
// every vertex of k lying in l. Log-barrier with damped Newton inner solves
// (barrier weight x10 over eight outer steps), then an active-set polish to
// machine-tight contacts when the container is a polytope. k must be a
// polytope; l may be any kind (V-polytopes are converted to facet form).
AffineMap max_volume_position(const ConvexBody& k, const ConvexBody& l,
                              MaxVolumeStats* stats = nullptr);

// Contact pairs of the positioned image of k inside l: positioned vertices u
// with 1 - gauge_l(u) <= tol, paired with every supporting functional of l
// active at u (all tight facets for a polytope container, ascending facet
// index; the unique gauge gradient for a smooth container), normalized so
// <u, v> = 1. Coincident positioned vertices are deduplicated at 1e-7.
std::vector<ContactPair> contact_points(const ConvexBody& k,
                                        const ConvexBody& l,
                                        const AffineMap& pose,
                                        double tol = 1e-6);

// Weights for the decomposition identities over the given contacts
// (requires at least n+1 pairs).
WeightSolve john_weights(const std::vector<ContactPair>& contacts, int n);

// Searches for a shift z with gauge_K(z) <= n/(n+1) such that the shifted
// pair (K - z, L - z) carries a full decomposition: contact pairs transform
// as u -> u - z, v -> v / (1 - <z, v>), and the weights are re-fit at each
// candidate z (derivative-free simplex search, `restarts` random restarts).
// k must already be the positioned image inside l; 0 must be interior to l.
// Failure to reach the residual tolerance is reported through
// `search_converged = false` with the best certificate found, not an error.
JohnCertificate decomposition_shift(const ConvexBody& k, const ConvexBody& l,
                                    int restarts = 20,
                                    std::uint64_t seed = 7);

// Re-derivation of every certificate identity from the raw arrays.
struct DecompositionReport {
  double residual_identity = 0.0;
  double residual_u = 0.0;
  double residual_v = 0.0;
  double weight_sum = 0.0;
  int contact_count = 0;
  bool pass_identity = false;
  bool pass_u = false;
  bool pass_v = false;
  bool pass_sum = false;    // |sum a_i - n| <= 10 * tol
  bool pass_count = false;  // contact_count <= n^2 + n

  bool pass() const {
    return pass_identity && pass_u && pass_v && pass_sum && pass_count;
  }
};

DecompositionReport verify_decomposition(const JohnCertificate& cert, int n,
                                         double tol = 1e-5);

}  // namespace cvx

#endif  // CVXGEO_JOHN_HPP
