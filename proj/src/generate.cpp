#include "cvxgeo/generate.hpp"

#include "cvxgeo/rng.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace cvx {
namespace {

// Orthonormal basis of the hyperplane orthogonal to the all-ones vector in
// R^{n+1}: the trailing n columns of a Householder Q whose first column is
// the normalized ones vector.
Matrix simplex_basis(int n) {
  Matrix ones(n + 1, 1);
  ones.setOnes();
  Eigen::HouseholderQR<Matrix> qr(ones);
  Matrix q = qr.householderQ();
  return q.rightCols(n);
}

}  // namespace

ConvexBody regular_simplex(int n) {
  if (n < 2) fail(ErrorCode::domain_error, "simplex generator needs n >= 2");
  const Matrix basis = simplex_basis(n);
  const double scale = std::sqrt((n + 1.0) / n);
  Matrix verts(n + 1, n);
  for (int i = 0; i <= n; ++i) {
    Vector q = Vector::Constant(n + 1, -1.0 / (n + 1));
    q[i] += 1.0;
    verts.row(i) = (scale * (basis.transpose() * q)).transpose();
  }
  return ConvexBody::vpolytope(verts);
}

ConvexBody cube(int n) {
  if (n < 2) fail(ErrorCode::domain_error, "cube generator needs n >= 2");
  Matrix normals = Matrix::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    normals(2 * i, i) = 1.0;
    normals(2 * i + 1, i) = -1.0;
  }
  return ConvexBody::hpolytope(normals, Vector::Ones(2 * n));
}

ConvexBody cross_polytope(int n) {
  if (n < 2) fail(ErrorCode::domain_error, "cross-polytope generator needs n >= 2");
  Matrix verts = Matrix::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    verts(2 * i, i) = 1.0;
    verts(2 * i + 1, i) = -1.0;
  }
  return ConvexBody::vpolytope(verts);
}

ConvexBody jittered_simplex(int n, double eta, std::uint64_t seed,
                            std::uint64_t index) {
  if (eta < 0.0) fail(ErrorCode::domain_error, "jitter must be nonnegative");
  Matrix verts = regular_simplex(n).vertices();
  CounterRng rng(seed, index);
  for (int i = 0; i < verts.rows(); ++i) {
    const Vector dir = rng.unit_vector(n);
    const double mag = eta * rng.uniform();
    verts.row(i) += (mag * dir).transpose();
  }
  return ConvexBody::vpolytope(verts);
}

ConvexBody random_vpolytope(int n, int m, std::uint64_t seed,
                            std::uint64_t index) {
  if (m < n + 1) fail(ErrorCode::domain_error, "need at least n+1 points");
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    CounterRng rng(seed, index * 97 + attempt);
    Matrix pts(m, n);
    for (int i = 0; i < m; ++i) {
      const Vector dir = rng.unit_vector(n);
      pts.row(i) = ((0.5 + 0.5 * rng.uniform()) * dir).transpose();
    }
    try {
      return ConvexBody::vpolytope(pts);
    } catch (const Error&) {
      // flat draw; next attempt uses a fresh stream
    }
  }
  fail(ErrorCode::degenerate_body, "vertex generator kept producing flat hulls");
}

ConvexBody random_hpolytope(int n, int m, std::uint64_t seed,
                            std::uint64_t index) {
  if (m < 2 * n) fail(ErrorCode::domain_error, "need at least 2n facets");
  CounterRng rng(seed, index * 131);
  Matrix normals = Matrix::Zero(m, n);
  Vector offsets(m);
  for (int i = 0; i < n; ++i) {
    normals(2 * i, i) = 1.0;
    normals(2 * i + 1, i) = -1.0;
  }
  for (int i = 2 * n; i < m; ++i) {
    normals.row(i) = rng.unit_vector(n).transpose();
  }
  for (int i = 0; i < m; ++i) offsets[i] = 0.7 + 0.6 * rng.uniform();
  return ConvexBody::hpolytope(normals, offsets);
}

BodyPair random_pair(int n, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index * 7919);
  const int mk = n + 2 + static_cast<int>(rng.uniform() * 3.0);
  const ConvexBody k = random_vpolytope(n, mk, seed, index * 2 + 1);

  const double kind_draw = rng.uniform();
  if (kind_draw < 0.40) {
    const int ml = 2 * n + 1 + static_cast<int>(rng.uniform() * 4.0);
    return {k, random_hpolytope(n, ml, seed, index * 2 + 2)};
  }
  if (kind_draw < 0.80) {
    // Vertex-form container with 0 certified interior; resample until the
    // hull holds the origin with margin.
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
      CounterRng draw(seed, index * 523 + attempt);
      const int ml = n + 3 + static_cast<int>(draw.uniform() * 4.0);
      Matrix pts(ml, n);
      for (int i = 0; i < ml; ++i) {
        const Vector dir = draw.unit_vector(n);
        pts.row(i) = ((0.7 + 0.6 * draw.uniform()) * dir).transpose();
      }
      try {
        ConvexBody l = ConvexBody::vpolytope(pts);
        if (origin_interior_radius(l) > 0.05) return {k, std::move(l)};
      } catch (const Error&) {
      }
    }
    fail(ErrorCode::degenerate_body, "container generator stalled");
  }
  if (kind_draw < 0.90) {
    const double choices[4] = {2.0, 2.5, 3.0, 4.0};
    const double p = choices[static_cast<int>(rng.uniform() * 4.0)];
    Matrix a = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) += 0.15 * rng.normal();
    }
    if (std::abs(a.determinant()) < 0.3) a = Matrix::Identity(n, n);
    return {k, ConvexBody::lp_ball(p, n, AffineMap{a, Vector::Zero(n)})};
  }
  // Ellipsoid with eigenvalues in [0.5, 2].
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Vector eig(n);
  for (int i = 0; i < n; ++i) eig[i] = 0.5 + 1.5 * rng.uniform();
  const Matrix shape = q * eig.asDiagonal() * q.transpose();
  return {k, ConvexBody::ellipsoid(0.5 * (shape + shape.transpose()))};
}

AffineMap random_affine(int n, std::uint64_t seed, std::uint64_t index) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    CounterRng rng(seed, index * 613 + attempt);
    Matrix a = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) += 0.25 * rng.normal();
    }
    if (std::abs(a.determinant()) < 0.3) continue;
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = 0.1 * rng.normal();
    return AffineMap{a, b};
  }
  fail(ErrorCode::solver_stall, "affine generator kept drawing singular maps");
}

}  // namespace cvx
