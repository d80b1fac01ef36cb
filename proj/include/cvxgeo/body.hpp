#ifndef CVXGEO_BODY_HPP
#define CVXGEO_BODY_HPP

#include "cvxgeo/affine_map.hpp"
#include "cvxgeo/types.hpp"

#include <optional>
#include <string>
#include <utility>

namespace cvx {

// A full-dimensional compact convex set, stored as one of four base shapes
// composed with an invertible affine pose. Values are immutable: every
// mutation-like operation returns a new body with derived data recomputed.
enum class BodyKind { vpolytope, hpolytope, lp_ball, ellipsoid };

inline const char* body_kind_name(BodyKind k) {
  switch (k) {
    case BodyKind::vpolytope: return "vpolytope";
    case BodyKind::hpolytope: return "hpolytope";
    case BodyKind::lp_ball: return "lpball";
    case BodyKind::ellipsoid: return "ellipsoid";
  }
  return "unknown";
}

class ConvexBody {
 public:
  // Vertices are the rows of `vertices`. Requires >= n+1 affinely
  // independent rows spanning full dimension.
  static ConvexBody vpolytope(const Matrix& vertices,
                              const AffineMap& pose = AffineMap{});

  // Halfspaces <normals.row(i), x> <= offsets[i]; must be bounded with
  // nonempty interior.
  static ConvexBody hpolytope(const Matrix& normals, const Vector& offsets,
                              const AffineMap& pose = AffineMap{});

  // Unit ball of ell_p in dimension n, p in (1, infinity).
  static ConvexBody lp_ball(double p, int n, const AffineMap& pose = AffineMap{});

  // {x : x^T shape x <= 1} with shape symmetric positive definite.
  static ConvexBody ellipsoid(const Matrix& shape,
                              const AffineMap& pose = AffineMap{});

  BodyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const AffineMap& pose() const { return pose_; }
  bool is_polytope() const {
    return kind_ == BodyKind::vpolytope || kind_ == BodyKind::hpolytope;
  }
  bool is_smooth() const { return !is_polytope(); }

  // Base data (before the pose is applied).
  const Matrix& base_vertices() const { return base_vertices_; }
  const Matrix& base_normals() const { return base_normals_; }
  const Vector& base_offsets() const { return base_offsets_; }
  double lp_exponent() const { return lp_p_; }
  const Matrix& base_shape() const { return base_shape_; }

  // Effective (posed) data, precomputed at construction.
  const Matrix& vertices() const;        // vpolytope: posed vertex rows
  const Matrix& normals() const;         // hpolytope: unit posed normal rows
  const Vector& offsets() const;         // hpolytope: matching offsets
  const Vector& center() const;          // lp_ball / ellipsoid: posed center
  const Matrix& ellipsoid_shape() const;  // ellipsoid: posed quadratic form
  const Matrix& ellipsoid_shape_inverse() const;
  // lp_ball helpers: x -> pose.linear^{-1} x and the posed center pulled
  // back through the linear part (so the base-frame picture is ball + shift).
  const Matrix& linear_inverse() const { return linear_inv_; }
  const Vector& lp_base_shift() const { return lp_base_shift_; }

  // Same base shape under a different pose.
  ConvexBody with_pose(const AffineMap& pose) const;

 private:
  ConvexBody() = default;
  void finalize();  // validates invariants, fills effective data

  BodyKind kind_ = BodyKind::vpolytope;
  int dim_ = 0;
  AffineMap pose_;

  Matrix base_vertices_;  // vpolytope
  Matrix base_normals_;   // hpolytope
  Vector base_offsets_;
  double lp_p_ = 2.0;     // lp_ball
  Matrix base_shape_;     // ellipsoid

  // Derived.
  Matrix eff_vertices_;
  Matrix eff_normals_;
  Vector eff_offsets_;
  Vector eff_center_;
  Matrix eff_shape_;
  Matrix eff_shape_inv_;
  Matrix linear_inv_;
  Vector lp_base_shift_;
};

// ---- Geometric kernel -------------------------------------------------

// Minkowski gauge ||x||_K = inf{t > 0 : x in tK}. Requires 0 interior.
// Closed form for hpolytope / lp_ball / ellipsoid; vpolytope uses a
// feasibility bisection to 1e-10 relative tolerance.
double gauge(const ConvexBody& body, const Vector& x);

// Support function sup_{y in K} <f, y>.
double support(const ConvexBody& body, const Vector& f);

// A maximizer of <f, .> over the body.
Vector support_point(const ConvexBody& body, const Vector& f);

// Gradient of the gauge at x != 0 (unique for smooth kinds; for hpolytope
// the lowest-index active facet's scaled normal; errors on vpolytope).
Vector gauge_gradient(const ConvexBody& body, const Vector& x);

// Polar body {f : <f, y> <= 1 for all y in K}. Representation rules:
// vpolytope -> hpolytope (normals = vertices, offsets = 1); hpolytope ->
// vpolytope (vertices n_i / c_i, reduced to extreme points); centered
// lp_ball -> lp_ball of the dual exponent; ellipsoids (and shifted round
// balls) -> ellipsoid. A translated lp_ball with p != 2 has no polar in
// this family and raises `unsupported`.
ConvexBody polar(const ConvexBody& body);

// K - z (new body; pose composition only).
ConvexBody shift(const ConvexBody& body, const Vector& z);

// s * K for s != 0 (s < 0 yields the negative homothet).
ConvexBody scale(const ConvexBody& body, double s);

inline ConvexBody negate(const ConvexBody& body) { return scale(body, -1.0); }

// map(K) as a new body.
ConvexBody transform(const AffineMap& map, const ConvexBody& body);

// ---- Containment ------------------------------------------------------

enum class ContainsStatus { certified_yes, certified_no, heuristic_yes };

struct ContainsResult {
  ContainsStatus status = ContainsStatus::certified_no;
  // For certified_no: a point of `inner` outside `outer`, and its gauge.
  std::optional<Vector> witness_point;
  double witness_gauge = 0.0;

  bool yes() const { return status != ContainsStatus::certified_no; }
  bool certified() const { return status != ContainsStatus::heuristic_yes; }
};

// Is inner a subset of outer (up to tol on outer's gauge)? Certified via
// inner vertices or outer facets whenever either is available (converting
// polytope representations as needed); the smooth-inside-smooth case falls
// back to seeded multi-start boundary search and reports heuristic-yes.
ContainsResult contains(const ConvexBody& inner, const ConvexBody& outer,
                        double tol = 1e-9, std::uint64_t seed = 13);

// ---- Asymmetry --------------------------------------------------------

struct AsymmetryResult {
  double s = 1.0;   // asymmetry constant, in [1, n]
  Vector z;         // optimal center: (L - z) subset of -s (L - z)
  Cert cert = Cert::certified;
};

// For polytopes: exact LP in (w, lambda) with w = (1 + lambda) z. The two
// smooth kinds are symmetric about their centers, so s = 1 exactly.
AsymmetryResult asymmetry_constant(const ConvexBody& body);

// ---- Polytope structure -----------------------------------------------

// Vertex rows of a polytope body (enumerates basic solutions for hpolytope).
Matrix enumerate_vertices(const ConvexBody& body);

// Unit-normalized facet system (normals rows, offsets) of a polytope body.
std::pair<Matrix, Vector> enumerate_facets(const ConvexBody& body);

// Extreme points of a point set (rows), via per-point feasibility solves.
Matrix hull_reduce(const Matrix& points);

// A strictly interior point (Chebyshev center for hpolytope, vertex
// centroid for vpolytope, the center for smooth kinds).
Vector interior_point(const ConvexBody& body);

// Certified lower bound on the radius of a Euclidean ball around the
// origin contained in the body; <= 0 when 0 is not certified interior.
double origin_interior_radius(const ConvexBody& body);

// Exact gauge of a vpolytope via one LP (min sum of hull coefficients);
// used on hot paths and cross-checked against the bisection gauge.
double vpolytope_gauge_lp(const ConvexBody& body, const Vector& x);

// Polytope conversions (identity when already in the requested form).
ConvexBody to_hpolytope(const ConvexBody& body);
ConvexBody to_vpolytope(const ConvexBody& body);

}  // namespace cvx

#endif  // CVXGEO_BODY_HPP
