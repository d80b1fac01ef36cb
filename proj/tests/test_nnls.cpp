#include <doctest.h>

#include "cvxgeo/nnls.hpp"
#include "cvxgeo/rng.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace {

using cvx::Matrix;
using cvx::Vector;

// Independent oracle: the optimum of min ||Ax-b|| over x >= 0 makes some
// subset of coordinates strictly positive and the rest zero, so trying the
// (damped) unconstrained solve on every column subset and keeping the best
// nonnegative candidate bounds the answer. Exponential, fine for n <= 12.
double brute_force_nnls(const Matrix& a, const Vector& b) {
  const int n = static_cast<int>(a.cols());
  double best = b.norm();  // empty support
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    Matrix ap(a.rows(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) ap.col(j) = a.col(cols[j]);
    Matrix gram = ap.transpose() * ap;
    gram.diagonal().array() += 1e-12;
    Vector s = gram.ldlt().solve(ap.transpose() * b);
    if (s.minCoeff() < -1e-12) continue;
    Vector x = Vector::Zero(n);
    for (size_t j = 0; j < cols.size(); ++j) x[cols[j]] = s[j];
    best = std::min(best, (a * x - b).norm());
  }
  return best;
}

void check_kkt(const Matrix& a, const Vector& b, const Vector& x) {
  const double scale = 1.0 + a.cwiseAbs().maxCoeff() * (1.0 + b.norm());
  REQUIRE(x.minCoeff() >= -1e-12);
  Vector w = a.transpose() * (b - a * x);
  for (int j = 0; j < x.size(); ++j) {
    CHECK(w[j] <= 1e-7 * scale);                    // no descent direction
    CHECK(std::abs(x[j] * w[j]) <= 1e-7 * scale);   // complementarity
  }
}

}  // namespace

TEST_SUITE("nnls") {

TEST_CASE("identity system clips negatives") {
  Matrix a = Matrix::Identity(2, 2);
  Vector b(2);
  b << 1.0, -2.0;
  auto r = cvx::solve_nnls(a, b);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
  CHECK(r.residual == doctest::Approx(2.0));
}

TEST_CASE("consistent nonnegative system is solved exactly") {
  Matrix a(3, 2);
  a << 1.0, 0.0, 1.0, 1.0, 0.0, 2.0;
  Vector x_true(2);
  x_true << 0.5, 1.5;
  Vector b = a * x_true;
  auto r = cvx::solve_nnls(a, b);
  CHECK(r.residual <= 1e-7);
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("zero right-hand side returns zero") {
  Matrix a(2, 3);
  a << 1.0, -1.0, 0.5, 0.25, 1.0, -2.0;
  auto r = cvx::solve_nnls(a, Vector::Zero(2));
  CHECK(r.x.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.residual <= 1e-12);
}

TEST_CASE("matches subset enumeration on random systems") {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    cvx::CounterRng rng(seed, /*stream=*/303);
    const int m = 2 + static_cast<int>(rng.next_u64() % 5);  // 2..6
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);  // 2..5
    Matrix a(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    }
    Vector b = rng.normal_vector(m);

    CAPTURE(seed);
    auto r = cvx::solve_nnls(a, b);
    check_kkt(a, b, r.x);
    const double oracle = brute_force_nnls(a, b);
    CHECK(r.residual <= oracle + 1e-7 * (1.0 + oracle));
    // The oracle is itself optimal, so the two must agree.
    CHECK(r.residual == doctest::Approx(oracle).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("handles nearly dependent columns without blowing up") {
  Matrix a(3, 3);
  a << 1.0, 1.0 + 1e-9, 0.0,
       1.0, 1.0,        1.0,
       0.0, 1e-9,       1.0;
  Vector b(3);
  b << 1.0, 2.0, 1.0;
  auto r = cvx::solve_nnls(a, b);
  REQUIRE(std::isfinite(r.residual));
  check_kkt(a, b, r.x);
  CHECK(r.residual <= brute_force_nnls(a, b) + 1e-6);
}

}  // TEST_SUITE
