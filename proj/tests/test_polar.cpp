#include <doctest.h>

#include "cvxgeo/body.hpp"
#include "cvxgeo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace {

using cvx::AffineMap;
using cvx::BodyKind;
using cvx::ConvexBody;
using cvx::Matrix;
using cvx::Vector;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Symmetric Hausdorff distance between two point sets given as rows.
double hausdorff(const Matrix& a, const Matrix& b) {
  auto one_sided = [](const Matrix& p, const Matrix& q) {
    double worst = 0.0;
    for (int i = 0; i < p.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < q.rows(); ++j) {
        best = std::min(best, (p.row(i) - q.row(j)).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

ConvexBody random_centered_polytope(cvx::CounterRng& rng, int n, int m) {
  Matrix pts(m, n);
  for (int i = 0; i < m; ++i) pts.row(i) = rng.normal_vector(n).transpose();
  Matrix hull = cvx::hull_reduce(pts);
  const Vector c = hull.colwise().mean().transpose();
  Matrix centered = hull.rowwise() - c.transpose();
  return ConvexBody::vpolytope(centered);
}

}  // namespace

TEST_SUITE("polar") {

TEST_CASE("square and cross-polytope are dual") {
  Matrix v(4, 2);
  v << 1, 1, 1, -1, -1, 1, -1, -1;
  const ConvexBody square = ConvexBody::vpolytope(v);
  const ConvexBody dual = cvx::polar(square);
  REQUIRE(dual.kind() == BodyKind::hpolytope);

  const Matrix cross = cvx::enumerate_vertices(dual);
  Matrix expected(4, 2);
  expected << 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK(hausdorff(cross, expected) <= 1e-9);
}

TEST_CASE("euclidean ball is self-dual and lp duals pair up") {
  const ConvexBody b2 = ConvexBody::lp_ball(2.0, 2);
  const ConvexBody b2_polar = cvx::polar(b2);
  REQUIRE(b2_polar.kind() == BodyKind::lp_ball);
  CHECK(b2_polar.lp_exponent() == doctest::Approx(2.0));

  const ConvexBody b3 = ConvexBody::lp_ball(3.0, 2);
  const ConvexBody b3_polar = cvx::polar(b3);
  CHECK(b3_polar.lp_exponent() == doctest::Approx(1.5));
  // polar of polar restores the exponent
  CHECK(cvx::polar(b3_polar).lp_exponent() == doctest::Approx(3.0));
}

TEST_CASE("simplex polar is the halfspace system of its vertices") {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, -1, -1;
  const ConvexBody tri = ConvexBody::vpolytope(v);
  const ConvexBody dual = cvx::polar(tri);
  REQUIRE(dual.kind() == BodyKind::hpolytope);
  REQUIRE(dual.normals().rows() == 3);
  // Each dual facet normal is a vertex direction with matching offset.
  for (int i = 0; i < 3; ++i) {
    const Vector vi = v.row(i).transpose();
    bool found = false;
    for (int j = 0; j < 3; ++j) {
      const Vector nj = dual.normals().row(j).transpose();
      const double dist = (vi / vi.norm() - nj).norm();
      if (dist <= 1e-9 &&
          std::abs(dual.offsets()[j] - 1.0 / vi.norm()) <= 1e-9) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
  // Bipolar recovers the vertices.
  const ConvexBody bipolar = cvx::polar(dual);
  CHECK(hausdorff(bipolar.vertices(), v) <= 1e-9);
}

TEST_CASE("bipolar identity on random centered polytopes") {
  cvx::CounterRng rng(21, 71);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 2);
    const int m = n + 3 + static_cast<int>(rng.next_u64() % 4);
    const ConvexBody body = random_centered_polytope(rng, n, m);
    if (cvx::origin_interior_radius(body) < 1e-3) continue;
    const ConvexBody once = cvx::polar(body);
    const ConvexBody twice = cvx::polar(once);
    REQUIRE(twice.kind() == BodyKind::vpolytope);
    CHECK(hausdorff(twice.vertices(), body.vertices()) <= 1e-8);
  }
}

TEST_CASE("support of the polar equals the gauge and vice versa") {
  cvx::CounterRng rng(22, 73);
  std::vector<ConvexBody> bodies;
  Matrix v(4, 2);
  v << 1, 1, 1, -1, -1, 1, -1, -1;
  bodies.push_back(ConvexBody::vpolytope(v));
  Matrix tv(3, 2);
  tv << 1, 0, 0, 1, -1, -1;
  bodies.push_back(ConvexBody::vpolytope(tv));
  bodies.push_back(ConvexBody::lp_ball(2.0, 2));
  bodies.push_back(ConvexBody::lp_ball(3.0, 2));
  Matrix q(2, 2);
  q << 2.0, 0.3, 0.3, 1.0;
  bodies.push_back(ConvexBody::ellipsoid(q));
  // Linearly posed ball (still centered).
  Matrix a(2, 2);
  a << 1.2, 0.3, -0.1, 0.8;
  bodies.push_back(ConvexBody::lp_ball(3.0, 2, AffineMap{a, Vector::Zero(2)}));

  for (const ConvexBody& body : bodies) {
    const ConvexBody dual = cvx::polar(body);
    for (int rep = 0; rep < 10; ++rep) {
      const Vector x = rng.normal_vector(2);
      CHECK(cvx::support(dual, x) ==
            doctest::Approx(cvx::gauge(body, x)).epsilon(1e-8));
      CHECK(cvx::gauge(dual, x) ==
            doctest::Approx(cvx::support(body, x)).epsilon(1e-8));
    }
  }
}

TEST_CASE("polar of a shifted round body stays exact") {
  cvx::CounterRng rng(23, 79);
  // Shifted disk: representable via the ellipsoid route.
  const ConvexBody moved_disk =
      cvx::shift(ConvexBody::lp_ball(2.0, 2), vec2(0.3, -0.2));
  const ConvexBody dual = cvx::polar(moved_disk);
  REQUIRE(dual.kind() == BodyKind::ellipsoid);
  for (int rep = 0; rep < 12; ++rep) {
    const Vector x = rng.normal_vector(2);
    CHECK(cvx::support(dual, x) ==
          doctest::Approx(cvx::gauge(moved_disk, x)).epsilon(1e-9));
    CHECK(cvx::gauge(dual, x) ==
          doctest::Approx(cvx::support(moved_disk, x)).epsilon(1e-9));
  }
  // Bipolar returns to the original set.
  const ConvexBody back = cvx::polar(dual);
  for (int rep = 0; rep < 8; ++rep) {
    const Vector x = rng.normal_vector(2);
    CHECK(cvx::gauge(back, x) ==
          doctest::Approx(cvx::gauge(moved_disk, x)).epsilon(1e-9));
  }

  // Shifted ellipsoid with anisotropic shape.
  Matrix q(2, 2);
  q << 2.0, 0.4, 0.4, 0.9;
  const ConvexBody e =
      ConvexBody::ellipsoid(q, AffineMap::translate(vec2(0.25, 0.1)));
  const ConvexBody ep = cvx::polar(e);
  for (int rep = 0; rep < 12; ++rep) {
    const Vector x = rng.normal_vector(2);
    CHECK(cvx::support(ep, x) == doctest::Approx(cvx::gauge(e, x)).epsilon(1e-9));
  }
  const ConvexBody eb = cvx::polar(ep);
  for (int rep = 0; rep < 8; ++rep) {
    const Vector x = rng.normal_vector(2);
    CHECK(cvx::gauge(eb, x) == doctest::Approx(cvx::gauge(e, x)).epsilon(1e-9));
  }
}

TEST_CASE("polar requires a well-centered body") {
  Matrix v(3, 2);
  v << 1, 1, 2, 1, 1, 2;  // origin outside
  CHECK_THROWS_AS(cvx::polar(ConvexBody::vpolytope(v)), cvx::Error);

  // Shifted lp ball with p != 2 leaves the family.
  const ConvexBody moved = cvx::shift(ConvexBody::lp_ball(3.0, 2), vec2(0.2, 0.0));
  CHECK_THROWS_AS(cvx::polar(moved), cvx::Error);

  // Origin on the boundary.
  Matrix n(4, 2);
  n << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector c(4);
  c << 1, 0, 1, 1;  // x >= 0 halfplane touches 0
  CHECK_THROWS_AS(cvx::polar(ConvexBody::hpolytope(n, c)), cvx::Error);
}

TEST_CASE("gauge of polar equals support under linear images") {
  // Applying a linear map to a body maps the polar by the inverse transpose.
  cvx::CounterRng rng(24, 83);
  Matrix a(2, 2);
  a << 1.5, 0.2, -0.3, 1.1;
  const AffineMap map{a, Vector::Zero(2)};
  Matrix tv(3, 2);
  tv << 1, 0, 0, 1, -1, -1;
  const ConvexBody tri = ConvexBody::vpolytope(tv);
  const ConvexBody image = cvx::transform(map, tri);
  const ConvexBody image_polar = cvx::polar(image);
  const ConvexBody tri_polar = cvx::polar(tri);
  const Matrix a_inv_t = a.inverse().transpose();
  for (int rep = 0; rep < 10; ++rep) {
    const Vector f = rng.normal_vector(2);
    // gauge_{(AK)°}(f) = gauge_{K°}(A^T f)
    CHECK(cvx::gauge(image_polar, f) ==
          doctest::Approx(cvx::gauge(tri_polar, a.transpose() * f)).epsilon(1e-8));
    (void)a_inv_t;
  }
}

}  // TEST_SUITE
