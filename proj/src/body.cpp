#include "cvxgeo/body.hpp"

#include "cvxgeo/linprog.hpp"
#include "cvxgeo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cvx {

namespace {

constexpr double kTinyNorm = 1e-12;

double dual_exponent(double p) { return p / (p - 1.0); }

// Overflow-safe ell_p norm (scaled by the max entry).
double lp_norm(const Vector& w, double p) {
  const double m = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  if (m <= 0.0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    sum += std::pow(std::abs(w[i]) / m, p);
  }
  return m * std::pow(sum, 1.0 / p);
}

// Gradient of the ell_p norm at w != 0.
Vector lp_norm_gradient(const Vector& w, double p) {
  const double norm = lp_norm(w, p);
  Vector g = Vector::Zero(w.size());
  if (norm <= 0.0) return g;
  for (int i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]) / norm;
    if (a > 0.0) {
      g[i] = (w[i] > 0 ? 1.0 : -1.0) * std::pow(a, p - 1.0);
    }
  }
  return g;
}

// Largest delta such that the origin is a convex combination of the rows
// with every weight >= delta; > 0 exactly when 0 lies in the interior of
// their hull (rows assumed to span). Used both for H-polytope boundedness
// (recession cone is {0} iff normals surround 0) and V-polytope interiority.
double surround_margin(const Matrix& rows) {
  const int m = static_cast<int>(rows.rows());
  const int n = static_cast<int>(rows.cols());
  // Variables: lambda_1..lambda_m, delta. Maximize delta subject to
  // rows^T lambda = 0, sum lambda = 1, lambda_i - delta >= 0.
  LpProblem p = LpProblem::with_dims(m + 1);
  p.c[m] = 1.0;
  p.a_eq = Matrix::Zero(n + 1, m + 1);
  p.b_eq = Vector::Zero(n + 1);
  for (int i = 0; i < m; ++i) {
    p.a_eq.block(0, i, n, 1) = rows.row(i).transpose();
    p.a_eq(n, i) = 1.0;
  }
  p.b_eq[n] = 1.0;
  p.a_ub = Matrix::Zero(m, m + 1);
  p.b_ub = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    p.a_ub(i, i) = -1.0;
    p.a_ub(i, m) = 1.0;  // delta - lambda_i <= 0
  }
  LpResult r = solve_lp(p);
  if (!r.ok()) return -1.0;
  return r.value;
}

int affine_rank(const Matrix& points, double rel_tol = 1e-9) {
  if (points.rows() < 2) return 0;
  Matrix centered = points.rowwise() - points.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centered);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > rel_tol * sv[0]) ++rank;
  }
  return rank;
}

Matrix dedup_rows(const Matrix& rows, double tol) {
  std::vector<int> keep;
  for (int i = 0; i < rows.rows(); ++i) {
    bool dup = false;
    for (int j : keep) {
      if ((rows.row(i) - rows.row(j)).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  Matrix out(static_cast<int>(keep.size()), rows.cols());
  for (size_t k = 0; k < keep.size(); ++k) out.row(k) = rows.row(keep[k]);
  return out;
}

// How far x is from lying in the body: <= 0 (or tiny) means member.
// Scale of the value: Euclidean-ish slack for hpolytope, gauge-like excess
// for the smooth kinds, L1 distance to the hull for vpolytope.
double membership_violation(const ConvexBody& body, const Vector& x) {
  switch (body.kind()) {
    case BodyKind::hpolytope: {
      return (body.normals() * x - body.offsets()).maxCoeff();
    }
    case BodyKind::lp_ball: {
      Vector u = body.linear_inverse() * x - body.lp_base_shift();
      return lp_norm(u, body.lp_exponent()) - 1.0;
    }
    case BodyKind::ellipsoid: {
      Vector d = x - body.center();
      const double q = d.dot(body.ellipsoid_shape() * d);
      return std::sqrt(std::max(q, 0.0)) - 1.0;
    }
    case BodyKind::vpolytope: {
      // min ||x - V^T lambda||_1 over the simplex, via split residuals.
      const Matrix& v = body.vertices();
      const int m = static_cast<int>(v.rows());
      const int n = body.dim();
      LpProblem p = LpProblem::with_dims(m + 2 * n);
      p.maximize = false;
      for (int i = 0; i < 2 * n; ++i) p.c[m + i] = 1.0;
      p.nonneg.assign(m + 2 * n, true);
      p.a_eq = Matrix::Zero(n + 1, m + 2 * n);
      p.b_eq = Vector::Zero(n + 1);
      for (int j = 0; j < m; ++j) {
        p.a_eq.block(0, j, n, 1) = v.row(j).transpose();
        p.a_eq(n, j) = 1.0;
      }
      for (int i = 0; i < n; ++i) {
        p.a_eq(i, m + i) = 1.0;        // + residual
        p.a_eq(i, m + n + i) = -1.0;   // - residual
      }
      p.b_eq.head(n) = x;
      p.b_eq[n] = 1.0;
      LpResult r = solve_lp(p);
      if (!r.ok()) fail(ErrorCode::solver_stall, "membership solve failed");
      return r.value;
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

}  // namespace

// ---- Construction -------------------------------------------------------

ConvexBody ConvexBody::vpolytope(const Matrix& vertices, const AffineMap& pose) {
  ConvexBody b;
  b.kind_ = BodyKind::vpolytope;
  b.dim_ = static_cast<int>(vertices.cols());
  b.base_vertices_ = vertices;
  b.pose_ = pose;
  b.finalize();
  return b;
}

ConvexBody ConvexBody::hpolytope(const Matrix& normals, const Vector& offsets,
                                 const AffineMap& pose) {
  ConvexBody b;
  b.kind_ = BodyKind::hpolytope;
  b.dim_ = static_cast<int>(normals.cols());
  b.base_normals_ = normals;
  b.base_offsets_ = offsets;
  b.pose_ = pose;
  b.finalize();
  return b;
}

ConvexBody ConvexBody::lp_ball(double p, int n, const AffineMap& pose) {
  ConvexBody b;
  b.kind_ = BodyKind::lp_ball;
  b.dim_ = n;
  b.lp_p_ = p;
  b.pose_ = pose;
  b.finalize();
  return b;
}

ConvexBody ConvexBody::ellipsoid(const Matrix& shape, const AffineMap& pose) {
  ConvexBody b;
  b.kind_ = BodyKind::ellipsoid;
  b.dim_ = static_cast<int>(shape.rows());
  b.base_shape_ = shape;
  b.pose_ = pose;
  b.finalize();
  return b;
}

ConvexBody ConvexBody::with_pose(const AffineMap& pose) const {
  ConvexBody b = *this;
  b.pose_ = pose;
  b.finalize();
  return b;
}

void ConvexBody::finalize() {
  const int n = dim_;
  if (n < 2) fail(ErrorCode::domain_error, "dimension must be at least 2");

  if (pose_.translation.size() == 0) pose_ = AffineMap::identity(n);
  if (pose_.linear.rows() != n || pose_.linear.cols() != n ||
      pose_.translation.size() != n) {
    fail(ErrorCode::domain_error, "pose dimensions do not match the body");
  }
  Eigen::FullPivLU<Matrix> lu(pose_.linear);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    fail(ErrorCode::degenerate_body, "pose linear part is singular");
  }
  linear_inv_ = lu.inverse();

  switch (kind_) {
    case BodyKind::vpolytope: {
      if (base_vertices_.rows() < n + 1) {
        fail(ErrorCode::degenerate_body, "vpolytope needs at least n+1 vertices");
      }
      eff_vertices_ =
          (base_vertices_ * pose_.linear.transpose()).rowwise() +
          pose_.translation.transpose();
      if (affine_rank(eff_vertices_) < n) {
        fail(ErrorCode::degenerate_body, "vpolytope vertices are not full-dimensional");
      }
      break;
    }
    case BodyKind::hpolytope: {
      const int m = static_cast<int>(base_normals_.rows());
      if (m < n + 1 || base_offsets_.size() != m) {
        fail(ErrorCode::degenerate_body, "hpolytope needs at least n+1 facets");
      }
      eff_normals_ = base_normals_ * linear_inv_;  // rows n_i^T A^{-1}
      eff_offsets_ = base_offsets_ + eff_normals_ * pose_.translation;
      for (int i = 0; i < m; ++i) {
        const double len = eff_normals_.row(i).norm();
        if (len <= kTinyNorm) {
          fail(ErrorCode::degenerate_body, "hpolytope facet normal vanishes");
        }
        eff_normals_.row(i) /= len;
        eff_offsets_[i] /= len;
      }
      if (surround_margin(eff_normals_) <= 1e-10) {
        fail(ErrorCode::unbounded_body,
             "halfspace intersection has an unbounded direction");
      }
      // Nonempty interior via the Chebyshev radius.
      LpProblem cheb = LpProblem::with_dims(n + 1);
      cheb.c[n] = 1.0;
      cheb.a_ub = Matrix::Zero(m, n + 1);
      cheb.b_ub = eff_offsets_;
      cheb.a_ub.leftCols(n) = eff_normals_;
      cheb.a_ub.col(n).setOnes();
      LpResult r = solve_lp(cheb);
      const double scale = 1.0 + eff_offsets_.cwiseAbs().maxCoeff();
      if (!r.ok() || r.value <= 1e-9 * scale) {
        fail(ErrorCode::degenerate_body, "hpolytope has empty interior");
      }
      break;
    }
    case BodyKind::lp_ball: {
      if (!(lp_p_ > 1.0) || !(lp_p_ < 1e6) || !std::isfinite(lp_p_)) {
        fail(ErrorCode::domain_error, "lp ball exponent must lie in (1, inf)");
      }
      eff_center_ = pose_.translation;
      lp_base_shift_ = linear_inv_ * pose_.translation;
      break;
    }
    case BodyKind::ellipsoid: {
      if (base_shape_.rows() != n || base_shape_.cols() != n) {
        fail(ErrorCode::domain_error, "ellipsoid shape must be n x n");
      }
      const double asym =
          (base_shape_ - base_shape_.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-9 * (1.0 + base_shape_.cwiseAbs().maxCoeff())) {
        fail(ErrorCode::domain_error, "ellipsoid shape must be symmetric");
      }
      Matrix q = 0.5 * (base_shape_ + base_shape_.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
      if (eig.eigenvalues().minCoeff() <=
          1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
        fail(ErrorCode::degenerate_body, "ellipsoid shape must be positive definite");
      }
      base_shape_ = q;
      eff_center_ = pose_.translation;
      eff_shape_ = linear_inv_.transpose() * q * linear_inv_;
      eff_shape_ = 0.5 * (eff_shape_ + eff_shape_.transpose());
      eff_shape_inv_ = pose_.linear * q.llt().solve(Matrix::Identity(n, n)) *
                       pose_.linear.transpose();
      eff_shape_inv_ = 0.5 * (eff_shape_inv_ + eff_shape_inv_.transpose());
      break;
    }
  }
}

const Matrix& ConvexBody::vertices() const {
  if (kind_ != BodyKind::vpolytope) {
    fail(ErrorCode::domain_error, "vertices() requires a vpolytope");
  }
  return eff_vertices_;
}

const Matrix& ConvexBody::normals() const {
  if (kind_ != BodyKind::hpolytope) {
    fail(ErrorCode::domain_error, "normals() requires an hpolytope");
  }
  return eff_normals_;
}

const Vector& ConvexBody::offsets() const {
  if (kind_ != BodyKind::hpolytope) {
    fail(ErrorCode::domain_error, "offsets() requires an hpolytope");
  }
  return eff_offsets_;
}

const Vector& ConvexBody::center() const {
  if (is_polytope()) fail(ErrorCode::domain_error, "center() requires a smooth kind");
  return eff_center_;
}

const Matrix& ConvexBody::ellipsoid_shape() const {
  if (kind_ != BodyKind::ellipsoid) {
    fail(ErrorCode::domain_error, "ellipsoid_shape() requires an ellipsoid");
  }
  return eff_shape_;
}

const Matrix& ConvexBody::ellipsoid_shape_inverse() const {
  if (kind_ != BodyKind::ellipsoid) {
    fail(ErrorCode::domain_error, "ellipsoid_shape_inverse() requires an ellipsoid");
  }
  return eff_shape_inv_;
}

// ---- Gauge / support ----------------------------------------------------

namespace {

bool origin_interior_flag(const ConvexBody& body) {
  switch (body.kind()) {
    case BodyKind::hpolytope:
      return body.offsets().minCoeff() > 0.0;
    case BodyKind::lp_ball:
      return lp_norm(body.lp_base_shift(), body.lp_exponent()) < 1.0;
    case BodyKind::ellipsoid: {
      const Vector& c = body.center();
      return c.dot(body.ellipsoid_shape() * c) < 1.0;
    }
    case BodyKind::vpolytope:
      return surround_margin(body.vertices()) > 1e-10;
  }
  return false;
}

// Is x a member of t * vpolytope? One feasibility solve.
bool vpoly_scaled_member(const Matrix& verts, const Vector& x, double t) {
  const int m = static_cast<int>(verts.rows());
  const int n = static_cast<int>(verts.cols());
  LpProblem p = LpProblem::with_dims(m);
  p.nonneg.assign(m, true);
  p.a_eq = Matrix::Zero(n + 1, m);
  for (int j = 0; j < m; ++j) {
    p.a_eq.block(0, j, n, 1) = verts.row(j).transpose() * t;
    p.a_eq(n, j) = 1.0;
  }
  p.b_eq = Vector::Zero(n + 1);
  p.b_eq.head(n) = x;
  p.b_eq[n] = 1.0;
  return lp_feasible(p);
}

double gauge_lp_ball(const ConvexBody& body, const Vector& x) {
  const double p = body.lp_exponent();
  const Vector y = body.linear_inverse() * x;
  const Vector& z = body.lp_base_shift();
  const double zn = lp_norm(z, p);
  const double yn = lp_norm(y, p);
  if (yn == 0.0) return 0.0;
  if (zn <= 1e-15) return yn;
  if (zn >= 1.0) fail(ErrorCode::origin_not_interior, "ball does not contain 0");
  if (p == 2.0) {
    // ||y - t z||_2 = t reduces to (1 - z.z) t^2 + 2 (y.z) t - y.y = 0 with
    // a unique positive root; use the numerically stable quadratic formula.
    const double a = 1.0 - z.squaredNorm();
    const double b = y.dot(z);
    const double c = y.squaredNorm();
    const double disc = std::sqrt(b * b + a * c);
    return b >= 0.0 ? c / (b + disc) : (disc - b) / a;
  }
  // Root of f(t) = ||y - t z||_p - t; f is convex, positive at t = 0, and
  // decreasing to -inf (since ||z||_p < 1), so it has a single root.  Newton
  // from the left of the root converges monotonically; keep a bisection
  // bracket as a safeguard against overshooting steps.
  const int n = static_cast<int>(y.size());
  double lo = 0.0;
  double hi = yn / (1.0 - zn);
  double t = yn;  // f(yn) <= 0 never holds left of the root unless z = 0.
  for (int it = 0; it < 80; ++it) {
    double sum = 0.0;    // sum |y_i - t z_i|^p
    double dsum = 0.0;   // d/dt of the sum
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - t * z[i];
      const double a = std::abs(r);
      if (a == 0.0) continue;
      const double ap1 = std::pow(a, p - 1.0);
      sum += ap1 * a;
      dsum += -p * ap1 * (r > 0.0 ? z[i] : -z[i]);
    }
    const double norm = std::pow(sum, 1.0 / p);
    const double f = norm - t;
    if (f == 0.0) return t;
    if (f > 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
    if (hi - lo <= 1e-15 * hi) break;
    const double df = (sum > 0.0 ? norm / (p * sum) * dsum : 0.0) - 1.0;
    double next = df < 0.0 ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 4e-16 * next) return next;
    t = next;
  }
  return 0.5 * (lo + hi);
}

double gauge_ellipsoid(const ConvexBody& body, const Vector& x) {
  const Matrix& s = body.ellipsoid_shape();
  const Vector& c = body.center();
  const Vector sx = s * x;
  const double alpha = std::max(x.dot(sx), 0.0);
  if (alpha == 0.0) return 0.0;
  const double beta = c.dot(sx);
  const double gamma = 1.0 - c.dot(s * c);
  if (gamma <= 0.0) fail(ErrorCode::origin_not_interior, "ellipsoid does not contain 0");
  const double disc = std::sqrt(beta * beta + gamma * alpha);
  return beta >= 0.0 ? alpha / (beta + disc) : (disc - beta) / gamma;
}

}  // namespace

double gauge(const ConvexBody& body, const Vector& x) {
  if (x.size() != body.dim()) fail(ErrorCode::domain_error, "gauge: dimension mismatch");
  if (x.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  switch (body.kind()) {
    case BodyKind::hpolytope: {
      if (body.offsets().minCoeff() <= 0.0) {
        fail(ErrorCode::origin_not_interior, "hpolytope does not contain 0");
      }
      const Vector ratios =
          (body.normals() * x).cwiseQuotient(body.offsets());
      return std::max(ratios.maxCoeff(), 0.0);
    }
    case BodyKind::lp_ball:
      return gauge_lp_ball(body, x);
    case BodyKind::ellipsoid:
      return gauge_ellipsoid(body, x);
    case BodyKind::vpolytope: {
      if (!origin_interior_flag(body)) {
        fail(ErrorCode::origin_not_interior, "vpolytope does not contain 0");
      }
      // Bisect along the unit direction so positive homogeneity is exact by
      // construction rather than subject to feasibility-threshold noise.
      const double xnorm = x.norm();
      const Vector u = x / xnorm;
      const Matrix& v = body.vertices();
      double hi = 1.0;
      int guard = 0;
      while (!vpoly_scaled_member(v, u, hi)) {
        hi *= 2.0;
        if (++guard > 90) {
          fail(ErrorCode::solver_stall, "vpolytope gauge failed to bracket");
        }
      }
      double lo = 0.0;
      while ((hi - lo) > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (vpoly_scaled_member(v, u, mid)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return xnorm * hi;
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

double vpolytope_gauge_lp(const ConvexBody& body, const Vector& x) {
  const Matrix& v = body.vertices();
  const int m = static_cast<int>(v.rows());
  const int n = body.dim();
  if (x.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  LpProblem p = LpProblem::with_dims(m);
  p.maximize = false;
  p.c.setOnes();
  p.nonneg.assign(m, true);
  p.a_eq = Matrix::Zero(n, m);
  for (int j = 0; j < m; ++j) p.a_eq.block(0, j, n, 1) = v.row(j).transpose();
  p.b_eq = x;
  LpResult r = solve_lp(p);
  if (!r.ok()) return std::numeric_limits<double>::infinity();
  return r.value;
}

double support(const ConvexBody& body, const Vector& f) {
  if (f.size() != body.dim()) fail(ErrorCode::domain_error, "support: dimension mismatch");
  switch (body.kind()) {
    case BodyKind::vpolytope:
      return (body.vertices() * f).maxCoeff();
    case BodyKind::lp_ball:
      return f.dot(body.center()) +
             lp_norm(body.pose().linear.transpose() * f,
                     dual_exponent(body.lp_exponent()));
    case BodyKind::ellipsoid: {
      const double q = f.dot(body.ellipsoid_shape_inverse() * f);
      return f.dot(body.center()) + std::sqrt(std::max(q, 0.0));
    }
    case BodyKind::hpolytope: {
      const int n = body.dim();
      LpProblem p = LpProblem::with_dims(n);
      p.c = f;
      p.a_ub = body.normals();
      p.b_ub = body.offsets();
      LpResult r = solve_lp(p);
      if (r.status == LpStatus::unbounded) {
        fail(ErrorCode::unbounded_body, "support is unbounded");
      }
      if (!r.ok()) fail(ErrorCode::solver_stall, "support solve failed");
      return r.value;
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

Vector support_point(const ConvexBody& body, const Vector& f) {
  const int n = body.dim();
  if (f.cwiseAbs().maxCoeff() == 0.0) return interior_point(body);
  switch (body.kind()) {
    case BodyKind::vpolytope: {
      int best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < body.vertices().rows(); ++j) {
        const double v = body.vertices().row(j).dot(f);
        if (v > best_v) {
          best_v = v;
          best = j;
        }
      }
      return body.vertices().row(best).transpose();
    }
    case BodyKind::lp_ball: {
      const double q = dual_exponent(body.lp_exponent());
      const Vector g = body.pose().linear.transpose() * f;
      const double norm = lp_norm(g, q);
      Vector u = Vector::Zero(n);
      if (norm > 0.0) {
        for (int i = 0; i < n; ++i) {
          const double a = std::abs(g[i]) / norm;
          if (a > 0.0) u[i] = (g[i] > 0 ? 1.0 : -1.0) * std::pow(a, q - 1.0);
        }
      }
      return body.pose().linear * u + body.center();
    }
    case BodyKind::ellipsoid: {
      const Vector w = body.ellipsoid_shape_inverse() * f;
      const double norm = std::sqrt(std::max(f.dot(w), 0.0));
      if (norm <= 0.0) return body.center();
      return body.center() + w / norm;
    }
    case BodyKind::hpolytope: {
      LpProblem p = LpProblem::with_dims(n);
      p.c = f;
      p.a_ub = body.normals();
      p.b_ub = body.offsets();
      LpResult r = solve_lp(p);
      if (!r.ok()) fail(ErrorCode::solver_stall, "support point solve failed");
      return r.x;
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

Vector gauge_gradient(const ConvexBody& body, const Vector& x) {
  switch (body.kind()) {
    case BodyKind::hpolytope: {
      const Vector ratios =
          (body.normals() * x).cwiseQuotient(body.offsets());
      int best = 0;
      for (int i = 1; i < ratios.size(); ++i) {
        if (ratios[i] > ratios[best] + 1e-12) best = i;
      }
      return body.normals().row(best).transpose() / body.offsets()[best];
    }
    case BodyKind::lp_ball: {
      const double g = gauge(body, x);
      if (g <= 0.0) fail(ErrorCode::domain_error, "gauge gradient at 0");
      const Vector y = body.linear_inverse() * x;
      const Vector& z = body.lp_base_shift();
      const Vector grad_base = lp_norm_gradient(y - g * z, body.lp_exponent());
      return body.linear_inverse().transpose() * grad_base /
             (1.0 + grad_base.dot(z));
    }
    case BodyKind::ellipsoid: {
      const double g = gauge(body, x);
      if (g <= 0.0) fail(ErrorCode::domain_error, "gauge gradient at 0");
      const Vector& c = body.center();
      const Vector w = body.ellipsoid_shape() * (x - g * c);
      return w / (c.dot(w) + g);
    }
    case BodyKind::vpolytope:
      fail(ErrorCode::unsupported, "gauge gradient of a vpolytope is set-valued");
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

// ---- Polar ----------------------------------------------------------------

ConvexBody polar(const ConvexBody& body) {
  const int n = body.dim();
  switch (body.kind()) {
    case BodyKind::vpolytope: {
      if (origin_interior_radius(body) < 1e-7) {
        fail(ErrorCode::origin_not_interior,
             "polar needs 0 interior with radius at least 1e-7");
      }
      return ConvexBody::hpolytope(body.vertices(),
                                   Vector::Ones(body.vertices().rows()));
    }
    case BodyKind::hpolytope: {
      if (body.offsets().minCoeff() <= 0.0) {
        fail(ErrorCode::origin_not_interior, "polar needs 0 in the interior");
      }
      Matrix pts(body.normals().rows(), n);
      for (int i = 0; i < pts.rows(); ++i) {
        pts.row(i) = body.normals().row(i) / body.offsets()[i];
      }
      return ConvexBody::vpolytope(hull_reduce(pts));
    }
    case BodyKind::lp_ball: {
      if (!origin_interior_flag(body)) {
        fail(ErrorCode::origin_not_interior, "polar needs 0 in the interior");
      }
      const Matrix& a = body.pose().linear;
      if (body.center().cwiseAbs().maxCoeff() <= 1e-14) {
        AffineMap dual_pose{body.linear_inverse().transpose(), Vector::Zero(n)};
        return ConvexBody::lp_ball(dual_exponent(body.lp_exponent()), n, dual_pose);
      }
      if (std::abs(body.lp_exponent() - 2.0) <= 1e-12) {
        // Round ball: rewrite as an ellipsoid and take its polar below.
        Matrix s = body.linear_inverse().transpose() * body.linear_inverse();
        return polar(ConvexBody::ellipsoid(0.5 * (s + s.transpose()),
                                           AffineMap::translate(body.center())));
      }
      (void)a;
      fail(ErrorCode::unsupported,
           "polar of a translated lp ball (p != 2) leaves the representable family");
    }
    case BodyKind::ellipsoid: {
      const Matrix& s = body.ellipsoid_shape();
      const Vector& c = body.center();
      const double gamma = 1.0 - c.dot(s * c);
      if (gamma <= 0.0) {
        fail(ErrorCode::origin_not_interior, "polar needs 0 in the interior");
      }
      const Matrix s_inv = body.ellipsoid_shape_inverse();
      Matrix shape = gamma * (s_inv - c * c.transpose());
      shape = 0.5 * (shape + shape.transpose());
      const Vector center = -(s * c) / gamma;
      return ConvexBody::ellipsoid(shape, AffineMap::translate(center));
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

// ---- Affine operations ----------------------------------------------------

ConvexBody shift(const ConvexBody& body, const Vector& z) {
  return body.with_pose(AffineMap::translate(-z).compose(body.pose()));
}

ConvexBody scale(const ConvexBody& body, double s) {
  if (s == 0.0) fail(ErrorCode::domain_error, "scale factor must be nonzero");
  return body.with_pose(AffineMap::scaling(body.dim(), s).compose(body.pose()));
}

ConvexBody transform(const AffineMap& map, const ConvexBody& body) {
  return body.with_pose(map.compose(body.pose()));
}

// ---- Containment -----------------------------------------------------------

namespace {

ContainsResult contains_by_inner_vertices(const Matrix& verts,
                                          const ConvexBody& outer, double tol) {
  ContainsResult out;
  double worst = -std::numeric_limits<double>::infinity();
  int worst_row = 0;
  for (int j = 0; j < verts.rows(); ++j) {
    const double viol = membership_violation(outer, verts.row(j).transpose());
    if (viol > worst) {
      worst = viol;
      worst_row = j;
    }
  }
  if (worst <= tol) {
    out.status = ContainsStatus::certified_yes;
    return out;
  }
  out.status = ContainsStatus::certified_no;
  out.witness_point = verts.row(worst_row).transpose();
  out.witness_gauge = worst;
  return out;
}

ContainsResult contains_by_outer_facets(const ConvexBody& inner,
                                        const Matrix& normals,
                                        const Vector& offsets, double tol) {
  ContainsResult out;
  for (int i = 0; i < normals.rows(); ++i) {
    const Vector f = normals.row(i).transpose();
    const double h = support(inner, f);
    if (h > offsets[i] + tol) {
      out.status = ContainsStatus::certified_no;
      out.witness_point = support_point(inner, f);
      out.witness_gauge = h - offsets[i];
      return out;
    }
  }
  out.status = ContainsStatus::certified_yes;
  return out;
}

}  // namespace

ContainsResult contains(const ConvexBody& inner, const ConvexBody& outer,
                        double tol, std::uint64_t seed) {
  // Cheapest certified route first: outer facets, then inner vertices.
  if (outer.kind() == BodyKind::hpolytope) {
    return contains_by_outer_facets(inner, outer.normals(), outer.offsets(), tol);
  }
  if (inner.kind() == BodyKind::vpolytope) {
    return contains_by_inner_vertices(inner.vertices(), outer, tol);
  }
  if (inner.kind() == BodyKind::hpolytope) {
    return contains_by_inner_vertices(enumerate_vertices(inner), outer, tol);
  }
  if (outer.kind() == BodyKind::vpolytope) {
    auto [normals, offsets] = enumerate_facets(outer);
    return contains_by_outer_facets(inner, normals, offsets, tol);
  }

  // Smooth inside smooth: seeded multi-start search over the inner boundary
  // maximizing the outer membership violation.
  const int n = inner.dim();
  const Vector c = inner.center();
  const ConvexBody centered = shift(inner, c);
  auto boundary_violation = [&](const Vector& dir) {
    const double g = gauge(centered, dir);
    if (g <= 0.0) return -1.0;
    return membership_violation(outer, c + dir / g);
  };

  CounterRng rng(seed, 11);
  double best = -std::numeric_limits<double>::infinity();
  Vector best_dir = Vector::Unit(n, 0);
  std::vector<Vector> starts;
  for (int i = 0; i < n; ++i) {
    starts.push_back(Vector::Unit(n, i));
    starts.push_back(-Vector::Unit(n, i));
  }
  for (int i = 0; i < 6; ++i) starts.push_back(rng.unit_vector(n));

  for (const Vector& s0 : starts) {
    // Coordinate-wise pattern search on the direction sphere.
    Vector d = s0;
    double fd = boundary_violation(d);
    double step = 0.5;
    for (int it = 0; it < 120 && step > 1e-10; ++it) {
      bool improved = false;
      for (int k = 0; k < n; ++k) {
        for (double sgn : {1.0, -1.0}) {
          Vector cand = d + sgn * step * Vector::Unit(n, k);
          cand /= cand.norm();
          const double fc = boundary_violation(cand);
          if (fc > fd + 1e-15) {
            d = cand;
            fd = fc;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fd > best) {
      best = fd;
      best_dir = d;
    }
  }

  ContainsResult out;
  if (best > tol) {
    const double g = gauge(centered, best_dir);
    out.status = ContainsStatus::certified_no;
    out.witness_point = c + best_dir / g;
    out.witness_gauge = best;
    return out;
  }
  out.status = ContainsStatus::heuristic_yes;
  return out;
}

// ---- Asymmetry --------------------------------------------------------------

AsymmetryResult asymmetry_constant(const ConvexBody& body) {
  AsymmetryResult out;
  const int n = body.dim();
  if (body.is_smooth()) {
    out.s = 1.0;
    out.z = body.center();
    out.cert = Cert::certified;
    return out;
  }

  const Matrix verts = enumerate_vertices(body);

  // A polytope with exactly n+1 affinely independent vertices is a simplex;
  // its asymmetry constant is exactly n, attained at the centroid. Taking the
  // structural value sidesteps the LP's roundoff, which matters to consumers
  // that feed the constant into certified lower bounds.
  if (static_cast<int>(verts.rows()) == n + 1) {
    Matrix edges(n, n);
    for (int t = 1; t <= n; ++t) {
      edges.col(t - 1) = (verts.row(t) - verts.row(0)).transpose();
    }
    const Eigen::JacobiSVD<Matrix> svd(edges);
    const Vector& sv = svd.singularValues();
    if (sv[0] > 0.0 && sv[sv.size() - 1] > 1e-9 * sv[0]) {
      out.s = static_cast<double>(n);
      out.z = verts.colwise().mean().transpose();
      out.cert = Cert::certified;
      return out;
    }
  }

  auto [normals, offsets] = enumerate_facets(body);
  const int nf = static_cast<int>(normals.rows());
  const int nv = static_cast<int>(verts.rows());

  // Variables (w, lambda): maximize lambda subject to
  //   <m_i, w> - lambda <m_i, v_j> <= d_i  for all facets i, vertices j.
  // Then s = 1/lambda and the optimal center is z = w / (1 + lambda).
  LpProblem p = LpProblem::with_dims(n + 1);
  p.c[n] = 1.0;
  p.a_ub = Matrix::Zero(nf * nv + 1, n + 1);
  p.b_ub = Vector::Zero(nf * nv + 1);
  int row = 0;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nv; ++j) {
      p.a_ub.block(row, 0, 1, n) = normals.row(i);
      p.a_ub(row, n) = -normals.row(i).dot(verts.row(j));
      p.b_ub[row] = offsets[i];
      ++row;
    }
  }
  p.a_ub(row, n) = 1.0;  // lambda <= 2: never binding, guards the solver
  p.b_ub[row] = 2.0;
  LpResult r = solve_lp(p);
  if (!r.ok() || r.value <= 0.0) {
    fail(ErrorCode::degenerate_body, "asymmetry solve failed");
  }
  const double lambda = r.value;
  out.s = 1.0 / lambda;
  out.z = r.x.head(n) / (1.0 + lambda);
  out.cert = Cert::certified;
  return out;
}

// ---- Polytope structure -----------------------------------------------------

Matrix enumerate_vertices(const ConvexBody& body) {
  if (body.kind() == BodyKind::vpolytope) {
    return hull_reduce(body.vertices());
  }
  if (body.kind() != BodyKind::hpolytope) {
    fail(ErrorCode::unsupported, "vertex enumeration needs a polytope");
  }
  const Matrix& normals = body.normals();
  const Vector& offsets = body.offsets();
  const int m = static_cast<int>(normals.rows());
  const int n = body.dim();
  const double scale = 1.0 + offsets.cwiseAbs().maxCoeff();

  double combos = 1.0;
  for (int i = 0; i < n; ++i) combos *= static_cast<double>(m - i) / (i + 1);
  if (combos > 2e6) {
    fail(ErrorCode::unsupported, "too many facet combinations to enumerate");
  }

  std::vector<Vector> found;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    Matrix a(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      a.row(i) = normals.row(idx[i]);
      b[i] = offsets[idx[i]];
    }
    Eigen::FullPivLU<Matrix> lu(a);
    lu.setThreshold(1e-9);
    if (lu.isInvertible()) {
      Vector x = lu.solve(b);
      if ((normals * x - offsets).maxCoeff() <= 1e-8 * scale) {
        bool dup = false;
        for (const Vector& y : found) {
          if ((x - y).cwiseAbs().maxCoeff() <= 1e-7 * scale) {
            dup = true;
            break;
          }
        }
        if (!dup) found.push_back(x);
      }
    }
    int pos = n - 1;
    while (pos >= 0 && idx[pos] == m - n + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (static_cast<int>(found.size()) < n + 1) {
    fail(ErrorCode::degenerate_body, "vertex enumeration found too few vertices");
  }
  Matrix out(static_cast<int>(found.size()), n);
  for (size_t i = 0; i < found.size(); ++i) out.row(i) = found[i].transpose();
  return out;
}

std::pair<Matrix, Vector> enumerate_facets(const ConvexBody& body) {
  if (body.kind() == BodyKind::hpolytope) {
    Matrix joint(body.normals().rows(), body.dim() + 1);
    joint.leftCols(body.dim()) = body.normals();
    joint.col(body.dim()) = body.offsets();
    joint = dedup_rows(joint, 1e-9);
    return {joint.leftCols(body.dim()), joint.col(body.dim())};
  }
  if (body.kind() != BodyKind::vpolytope) {
    fail(ErrorCode::unsupported, "facet enumeration needs a polytope");
  }
  const int n = body.dim();
  const Matrix verts = hull_reduce(body.vertices());
  const Vector c = verts.colwise().mean().transpose();
  const Matrix centered = verts.rowwise() - c.transpose();

  // Facets of K - c are the polar's vertices: K - c has 0 interior, so its
  // polar {f : <v_i - c, f> <= 1} is a bounded hpolytope.
  ConvexBody dual = ConvexBody::hpolytope(centered, Vector::Ones(centered.rows()));
  const Matrix dual_verts = enumerate_vertices(dual);

  Matrix normals(dual_verts.rows(), n);
  Vector offsets(dual_verts.rows());
  for (int i = 0; i < dual_verts.rows(); ++i) {
    const double len = dual_verts.row(i).norm();
    normals.row(i) = dual_verts.row(i) / len;
    offsets[i] = 1.0 / len + normals.row(i).dot(c);
  }
  return {normals, offsets};
}

Matrix hull_reduce(const Matrix& points) {
  const Matrix pts = dedup_rows(points, 1e-9 * (1.0 + points.cwiseAbs().maxCoeff()));
  const int m = static_cast<int>(pts.rows());
  const int n = static_cast<int>(pts.cols());
  std::vector<int> keep;
  for (int k = 0; k < m; ++k) {
    // Is pts[k] in the hull of the others?
    LpProblem p = LpProblem::with_dims(m - 1);
    p.nonneg.assign(m - 1, true);
    p.a_eq = Matrix::Zero(n + 1, m - 1);
    int col = 0;
    for (int j = 0; j < m; ++j) {
      if (j == k) continue;
      p.a_eq.block(0, col, n, 1) = pts.row(j).transpose();
      p.a_eq(n, col) = 1.0;
      ++col;
    }
    p.b_eq = Vector::Zero(n + 1);
    p.b_eq.head(n) = pts.row(k).transpose();
    p.b_eq[n] = 1.0;
    if (!lp_feasible(p)) keep.push_back(k);
  }
  Matrix out(static_cast<int>(keep.size()), n);
  for (size_t i = 0; i < keep.size(); ++i) out.row(i) = pts.row(keep[i]);
  return out;
}

Vector interior_point(const ConvexBody& body) {
  switch (body.kind()) {
    case BodyKind::vpolytope:
      return body.vertices().colwise().mean().transpose();
    case BodyKind::lp_ball:
    case BodyKind::ellipsoid:
      return body.center();
    case BodyKind::hpolytope: {
      const int n = body.dim();
      LpProblem p = LpProblem::with_dims(n + 1);
      p.c[n] = 1.0;
      p.a_ub = Matrix::Zero(body.normals().rows(), n + 1);
      p.a_ub.leftCols(n) = body.normals();
      p.a_ub.col(n).setOnes();
      p.b_ub = body.offsets();
      LpResult r = solve_lp(p);
      if (!r.ok()) fail(ErrorCode::solver_stall, "interior point solve failed");
      return r.x.head(n);
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

double origin_interior_radius(const ConvexBody& body) {
  switch (body.kind()) {
    case BodyKind::hpolytope:
      return body.offsets().minCoeff();
    case BodyKind::vpolytope: {
      if (!origin_interior_flag(body)) return 0.0;
      auto [normals, offsets] = enumerate_facets(body);
      (void)normals;
      return offsets.minCoeff();
    }
    case BodyKind::lp_ball: {
      // (1 - ||shift||_p) * inradius of the linear image of the ball.
      const double margin =
          1.0 - lp_norm(body.lp_base_shift(), body.lp_exponent());
      if (margin <= 0.0) return 0.0;
      Eigen::JacobiSVD<Matrix> svd(body.pose().linear);
      const double sigma_min = svd.singularValues().minCoeff();
      const double q = dual_exponent(body.lp_exponent());
      const double ball_inradius =
          std::min(1.0, std::pow(static_cast<double>(body.dim()), 1.0 / q - 0.5));
      return margin * sigma_min * ball_inradius;
    }
    case BodyKind::ellipsoid: {
      const Vector& c = body.center();
      const Matrix& s = body.ellipsoid_shape();
      const double margin = 1.0 - std::sqrt(std::max(c.dot(s * c), 0.0));
      if (margin <= 0.0) return 0.0;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
      return margin / std::sqrt(eig.eigenvalues().maxCoeff());
    }
  }
  fail(ErrorCode::domain_error, "unknown body kind");
}

ConvexBody to_hpolytope(const ConvexBody& body) {
  if (body.kind() == BodyKind::hpolytope) return body;
  auto [normals, offsets] = enumerate_facets(body);
  return ConvexBody::hpolytope(normals, offsets);
}

ConvexBody to_vpolytope(const ConvexBody& body) {
  if (body.kind() == BodyKind::vpolytope) return body;
  return ConvexBody::vpolytope(enumerate_vertices(body));
}

}  // namespace cvx
