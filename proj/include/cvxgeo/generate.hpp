#ifndef CVXGEO_GENERATE_HPP
#define CVXGEO_GENERATE_HPP

#include "cvxgeo/body.hpp"

#include <cstdint>

namespace cvx {

// Deterministic instance generators. Randomized ones draw from a
// counter-based stream keyed by (seed, index), so instance i can be
// regenerated without generating the first i-1.

// Regular n-simplex centered at the origin, vertices on the unit sphere.
ConvexBody regular_simplex(int n);

// [-1, 1]^n in facet form.
ConvexBody cube(int n);

// conv{±e_1, ..., ±e_n} in vertex form.
ConvexBody cross_polytope(int n);

// Regular simplex with every vertex displaced by an independent random
// vector of length at most eta.
ConvexBody jittered_simplex(int n, double eta, std::uint64_t seed,
                            std::uint64_t index = 0);

// Hull of m random points with norms in [0.5, 1]; full-dimensional by
// construction checks (the factory rejects flat hulls).
ConvexBody random_vpolytope(int n, int m, std::uint64_t seed,
                            std::uint64_t index = 0);

// Bounded facet form: ±e_i plus m-2n random unit normals, offsets in
// [0.7, 1.3]; the origin is strictly interior.
ConvexBody random_hpolytope(int n, int m, std::uint64_t seed,
                            std::uint64_t index = 0);

struct BodyPair {
  ConvexBody k;  // inner: always a V-polytope
  ConvexBody l;  // container: mixed kinds, 0 strictly interior
};

// Random positioning instance: polytope inner body plus a container drawn
// from all four kinds (facet form, vertex form, lp ball, ellipsoid).
BodyPair random_pair(int n, std::uint64_t seed, std::uint64_t index = 0);

// Invertible affine map: identity plus noise, |det| >= 0.3, small shift.
AffineMap random_affine(int n, std::uint64_t seed, std::uint64_t index = 0);

}  // namespace cvx

#endif  // CVXGEO_GENERATE_HPP
