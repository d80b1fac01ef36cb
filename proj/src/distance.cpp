#include "cvxgeo/distance.hpp"

#include "cvxgeo/generate.hpp"
#include "cvxgeo/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace cvx {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_mat(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

bool same_vec(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

// Structural identity of representations (enough for the distance-1 case;
// affinely equal bodies in different representations go through the solver).
bool structurally_identical(const ConvexBody& k, const ConvexBody& l) {
  if (k.kind() != l.kind() || k.dim() != l.dim()) return false;
  switch (k.kind()) {
    case BodyKind::vpolytope:
      return same_mat(k.vertices(), l.vertices());
    case BodyKind::hpolytope:
      return same_mat(k.normals(), l.normals()) &&
             same_vec(k.offsets(), l.offsets());
    case BodyKind::lp_ball:
      return k.lp_exponent() == l.lp_exponent() &&
             same_mat(k.linear_inverse(), l.linear_inverse()) &&
             same_vec(k.center(), l.center());
    case BodyKind::ellipsoid:
      return same_mat(k.ellipsoid_shape(), l.ellipsoid_shape()) &&
             same_vec(k.center(), l.center());
  }
  return false;
}

bool factor_certified(const ConvexBody& k, const ConvexBody& l) {
  return k.is_polytope() || l.is_polytope();
}

Matrix vertex_rows(const ConvexBody& body) {
  return body.kind() == BodyKind::vpolytope ? body.vertices()
                                            : enumerate_vertices(body);
}

// Containment factor without the nestedness precondition check, for use
// inside refinement loops where the caller already verified K subset L.
double factor_value(const ConvexBody& k, const ConvexBody& l, int sign) {
  double r = 1.0;
  if (k.is_polytope()) {
    const ConvexBody kh =
        k.kind() == BodyKind::hpolytope ? k : to_hpolytope(k);
    const Matrix& m = kh.normals();
    const Vector& d = kh.offsets();
    if (!(d.minCoeff() > 0.0)) {
      fail(ErrorCode::origin_not_interior, "inner body must hold 0 strictly inside");
    }
    for (int i = 0; i < m.rows(); ++i) {
      const Vector dir = sign * m.row(i).transpose();
      r = std::max(r, support(l, dir) / d[i]);
    }
    return r;
  }
  const ConvexBody ks = sign == 1 ? k : negate(k);
  if (l.is_polytope()) {
    const Matrix verts = vertex_rows(l);
    for (int j = 0; j < verts.rows(); ++j) {
      r = std::max(r, gauge(ks, verts.row(j).transpose()));
    }
    return r;
  }
  // Smooth body around a smooth body: sampled boundary maximization.
  CounterRng rng(31);
  for (int t = 0; t < 256; ++t) {
    const Vector dir = rng.unit_vector(k.dim());
    r = std::max(r, gauge(ks, support_point(l, dir)));
  }
  return r;
}

struct RefineResult {
  Matrix a;
  Vector b;
  Vector z;
  double r = kInf;
};

// Deterministic coordinate descent on r over (map, inner shift), starting
// from the positioned witness. Keeps only candidates whose positioned body
// stays inside l; 200 trial steps, step decay 0.8 after each sweep.
RefineResult refine_witness(const ConvexBody& k, const ConvexBody& l,
                            const Matrix& a0, const Vector& b0,
                            const Vector& z0, int sign) {
  const int n = k.dim();
  const int dim = n * n + 2 * n;
  auto eval = [&](const Vector& theta) -> double {
    Matrix a(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) a(i, j) = theta[j * n + i];
    }
    const Vector b = theta.segment(n * n, n);
    const Vector z = theta.tail(n);
    try {
      const ConvexBody kp = transform(AffineMap{a, b}, k);
      if (!contains(kp, l, 1e-9).yes()) return kInf;
      const ConvexBody kz = shift(kp, z);
      if (!(origin_interior_radius(kz) > 0.0)) return kInf;
      return factor_value(kz, shift(l, z), sign);
    } catch (const Error&) {
      return kInf;
    }
  };

  Vector theta(dim);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) theta[j * n + i] = a0(i, j);
  }
  theta.segment(n * n, n) = b0;
  theta.tail(n) = z0;

  double best = eval(theta);
  double step = 0.02;
  int budget = 200;
  while (budget > 0) {
    for (int c = 0; c < dim && budget > 0; ++c, --budget) {
      for (const double delta : {step, -step}) {
        Vector cand = theta;
        cand[c] += delta;
        const double val = eval(cand);
        if (val < best - 1e-12) {
          best = val;
          theta = cand;
          break;
        }
      }
    }
    step *= 0.8;
  }

  RefineResult out;
  out.a.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out.a(i, j) = theta[j * n + i];
  }
  out.b = theta.segment(n * n, n);
  out.z = theta.tail(n);
  out.r = best;
  return out;
}

DistanceBound run_pipeline(const ConvexBody& k, const ConvexBody& l,
                           DistanceKind kind) {
  if (k.dim() != l.dim()) fail(ErrorCode::domain_error, "dimension mismatch");
  const int n = k.dim();
  DistanceBound out;
  out.kind = kind;

  if (structurally_identical(k, l)) {
    out.upper = 1.0;
    out.lower = 1.0;
    out.upper_status = Cert::certified;
    out.lower_status = Cert::certified;
    out.witness.map = AffineMap::identity(n);
    out.witness.inner_shift = interior_point(k);
    out.witness.outer_scale = 1.0;
    out.witness.sign = +1;
    return out;
  }

  if (kind == DistanceKind::banach_mazur) {
    const AsymmetryResult sk = asymmetry_constant(k);
    const AsymmetryResult sl = asymmetry_constant(l);
    out.lower = std::max(sk.s / sl.s, sl.s / sk.s);
    out.lower_status = (sk.cert == Cert::certified && sl.cert == Cert::certified)
                           ? Cert::certified
                           : Cert::heuristic;
  } else {
    out.lower = 1.0;  // any affine copy scales volume by |det| on both sides
    out.lower_status = Cert::certified;
  }

  if (!k.is_polytope()) {
    fail(ErrorCode::unsupported,
         "positioning pipeline needs a polytope as the first body");
  }

  const AffineMap pose = max_volume_position(k, l);
  const ConvexBody kpos = transform(pose, k);
  const JohnCertificate cert = decomposition_shift(kpos, l);
  out.telemetry.evals = cert.search_evals;
  out.telemetry.restarts = cert.search_restarts;
  out.telemetry.residual = std::max(
      {cert.residual_identity, cert.residual_u, cert.residual_v});

  std::vector<int> signs;
  signs.push_back(+1);
  if (kind == DistanceKind::grunbaum) signs.push_back(-1);

  RefineResult best;
  int best_sign = +1;
  for (const int sign : signs) {
    const RefineResult res = refine_witness(k, l, pose.linear, pose.translation,
                                            cert.shift, sign);
    if (res.r < best.r) {
      best = res;
      best_sign = sign;
    }
  }
  if (!std::isfinite(best.r)) {
    fail(ErrorCode::solver_stall, "refinement lost feasibility of the witness");
  }

  out.upper = best.r;
  out.witness.map = AffineMap{best.a, best.b};
  out.witness.inner_shift = best.z;
  out.witness.outer_scale = best.r;
  out.witness.sign = best_sign;

  // Certification: replay the two inclusions at the final witness.
  const ConvexBody kfin = transform(out.witness.map, k);
  const ContainsResult nested = contains(kfin, l, 1e-7);
  const bool exact_factor = factor_certified(shift(kfin, best.z), l);
  out.upper_status = (nested.yes() && nested.certified() && exact_factor)
                         ? Cert::certified
                         : Cert::heuristic;
  return out;
}

// Simplex volume surrogate: sqrt of the Gram determinant of the edge matrix.
double hull_volume_sq(const std::vector<Vector>& pts,
                      const std::vector<int>& idx) {
  const int n = static_cast<int>(pts[0].size());
  const int m = static_cast<int>(idx.size()) - 1;
  Matrix e(n, m);
  for (int t = 1; t <= m; ++t) e.col(t - 1) = pts[idx[t]] - pts[idx[0]];
  const Matrix g = e.transpose() * e;
  return g.determinant();
}

std::vector<int> select_simplex_points(const std::vector<Vector>& pts, int n) {
  const int m = static_cast<int>(pts.size());
  std::vector<int> chosen;
  int start = 0;
  for (int i = 1; i < m; ++i) {
    if (pts[i].norm() > pts[start].norm()) start = i;
  }
  chosen.push_back(start);
  while (static_cast<int>(chosen.size()) < n + 1) {
    int pick = -1;
    double best = -1.0;
    for (int c = 0; c < m; ++c) {
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      std::vector<int> trial = chosen;
      trial.push_back(c);
      const double vol = hull_volume_sq(pts, trial);
      if (vol > best) {
        best = vol;
        pick = c;
      }
    }
    chosen.push_back(pick);
  }
  double vol = hull_volume_sq(pts, chosen);
  for (int round = 0; round < 50; ++round) {
    double gain = vol * (1.0 + 1e-12);
    std::pair<int, int> swap{-1, -1};
    for (int s = 0; s < n + 1; ++s) {
      for (int c = 0; c < m; ++c) {
        if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
        std::vector<int> trial = chosen;
        trial[s] = c;
        const double v = hull_volume_sq(pts, trial);
        if (v > gain) {
          gain = v;
          swap = {s, c};
        }
      }
    }
    if (swap.first < 0) break;
    chosen[swap.first] = swap.second;
    vol = gain;
  }
  return chosen;
}

DistanceBound simplex_factor(const ConvexBody& kz, const Matrix& simplex_verts) {
  const int n = kz.dim();
  // Affine-dependence guard: smallest relative singular value of the edges.
  Matrix e(n, n);
  for (int t = 1; t <= n; ++t) {
    e.col(t - 1) =
        (simplex_verts.row(t) - simplex_verts.row(0)).transpose();
  }
  const Eigen::JacobiSVD<Matrix> svd(e);
  const Vector& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[sv.size() - 1] <= 1e-9 * sv[0]) {
    fail(ErrorCode::degenerate_simplex,
         "selected contact points are affinely dependent");
  }

  const Vector c = simplex_verts.colwise().mean().transpose();
  Matrix centered = simplex_verts;
  centered.rowwise() -= c.transpose();
  const ConvexBody s = ConvexBody::vpolytope(centered);
  const ConvexBody outer = shift(kz, c);
  const ContainsResult nested = contains(s, outer, 1e-7);
  if (!nested.yes()) {
    fail(ErrorCode::not_nested, "contact simplex escaped the body");
  }

  DistanceBound out;
  out.kind = DistanceKind::banach_mazur;
  out.upper = factor_value(s, outer, +1);
  out.upper_status =
      (nested.certified() && factor_certified(s, outer)) ? Cert::certified
                                                         : Cert::heuristic;
  const AsymmetryResult sk = asymmetry_constant(kz);
  out.lower = std::max(sk.s / n, n / sk.s);
  out.lower_status = sk.cert;
  out.witness.map = AffineMap::identity(n);
  out.witness.inner_shift = c;
  out.witness.outer_scale = out.upper;
  out.witness.sign = +1;
  return out;
}

}  // namespace

double containment_factor(const ConvexBody& k, const ConvexBody& l, int sign) {
  if (sign != 1 && sign != -1) {
    fail(ErrorCode::domain_error, "homothety sign must be +1 or -1");
  }
  if (k.dim() != l.dim()) fail(ErrorCode::domain_error, "dimension mismatch");
  if (!(origin_interior_radius(k) > 0.0)) {
    fail(ErrorCode::origin_not_interior, "inner body must hold 0 strictly inside");
  }
  const ContainsResult nested = contains(k, l, 1e-7);
  if (!nested.yes()) {
    fail(ErrorCode::not_nested, "inner body is not contained in the outer body");
  }
  return factor_value(k, l, sign);
}

DistanceBound grunbaum_upper(const ConvexBody& k, const ConvexBody& l) {
  return run_pipeline(k, l, DistanceKind::grunbaum);
}

DistanceBound banach_mazur_upper(const ConvexBody& k, const ConvexBody& l) {
  return run_pipeline(k, l, DistanceKind::banach_mazur);
}

double distance_lower_via_asymmetry(const ConvexBody& k, const ConvexBody& l) {
  const double sk = asymmetry_constant(k).s;
  const double sl = asymmetry_constant(l).s;
  return std::max(sk / sl, sl / sk);
}

DistanceBound simplex_proximity(const ConvexBody& k, const JohnCertificate& cert) {
  const int n = k.dim();
  if (static_cast<int>(cert.contacts.size()) < n + 1) {
    fail(ErrorCode::no_contacts, "certificate has too few contacts");
  }
  std::vector<Vector> pts;
  for (const ContactPair& cp : cert.contacts) {
    bool dup = false;
    for (const Vector& p : pts) {
      if ((p - cp.u).norm() <= 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) pts.push_back(cp.u);
  }
  if (static_cast<int>(pts.size()) < n + 1) {
    fail(ErrorCode::degenerate_simplex,
         "fewer than n+1 distinct contact points");
  }
  const std::vector<int> chosen = select_simplex_points(pts, n);
  Matrix verts(n + 1, n);
  for (int i = 0; i <= n; ++i) verts.row(i) = pts[chosen[i]].transpose();
  return simplex_factor(shift(k, cert.shift), verts);
}

DistanceBound simplex_proximity(const ConvexBody& k) {
  const int n = k.dim();
  const Vector frame = interior_point(k);
  const ConvexBody k0 = shift(k, frame);
  const ConvexBody tmpl = regular_simplex(n);
  const AffineMap pose = max_volume_position(tmpl, k0);
  const ConvexBody spos = transform(pose, tmpl);
  const JohnCertificate cert = decomposition_shift(spos, k0);
  const ConvexBody sz = shift(spos, cert.shift);
  DistanceBound out = simplex_factor(shift(k0, cert.shift), sz.vertices());
  out.telemetry.evals = cert.search_evals;
  out.telemetry.restarts = cert.search_restarts;
  out.telemetry.residual = std::max(
      {cert.residual_identity, cert.residual_u, cert.residual_v});
  return out;
}

}  // namespace cvx
