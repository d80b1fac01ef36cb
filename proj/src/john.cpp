#include "cvxgeo/john.hpp"

#include "cvxgeo/nnls.hpp"
#include "cvxgeo/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace cvx {
namespace {

constexpr double kNewtonDecrementTol = 1e-7;
constexpr double kResidualTol = 1e-5;
constexpr double kContactDedupTol = 1e-7;

ConvexBody container_form(const ConvexBody& l) {
  return l.kind() == BodyKind::vpolytope ? to_hpolytope(l) : l;
}

Matrix polytope_vertices(const ConvexBody& k) {
  if (!k.is_polytope()) {
    fail(ErrorCode::unsupported, "the positioned body must be a polytope");
  }
  return k.kind() == BodyKind::vpolytope ? k.vertices() : enumerate_vertices(k);
}

int stacked_size(int n) { return n * n + n; }

Vector stack_vars(const Matrix& a, const Vector& b) {
  const int n = static_cast<int>(b.size());
  Vector x(stacked_size(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) x[j * n + i] = a(i, j);
  }
  x.tail(n) = b;
  return x;
}

void unstack_vars(const Vector& x, int n, Matrix& a, Vector& b) {
  a.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = x[j * n + i];
  }
  b = x.tail(n);
}

// d/d[vec(A); b] of <m, A w + b>.
Vector pair_gradient(const Vector& m, const Vector& w) {
  const int n = static_cast<int>(m.size());
  Vector g(stacked_size(n));
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) g[c * n + r] = m[r] * w[c];
  }
  g.tail(n) = m;
  return g;
}

void add_neg_logdet_gradient(const Matrix& ainv, Vector& g) {
  const int n = static_cast<int>(ainv.rows());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g[j * n + i] -= ainv(j, i);
  }
}

void add_neg_logdet_hessian(const Matrix& ainv, Matrix& h) {
  const int n = static_cast<int>(ainv.rows());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
          h(j * n + i, l * n + k) += ainv(j, k) * ainv(l, i);
        }
      }
    }
  }
}

// Hessian of the gauge of a smooth container at x, by twice differentiating
// the defining identity (gauge(x) = g solves a quadratic for an ellipsoid and
// a p-norm equation for an lp ball). Positive semidefinite up to roundoff.
Matrix gauge_hessian(const ConvexBody& l, const Vector& x) {
  const int n = l.dim();
  const double g = gauge(l, x);
  if (g < 1e-12) return Matrix::Zero(n, n);
  const Vector grad = gauge_gradient(l, x);
  if (l.kind() == BodyKind::ellipsoid) {
    const Matrix& s = l.ellipsoid_shape();
    const Vector& c = l.center();
    const Vector sc = s * c;
    const double gamma = 1.0 - c.dot(sc);
    const double denom = c.dot(s * (x - g * c)) + g;
    Matrix h = s - sc * grad.transpose() - grad * sc.transpose() -
               gamma * (grad * grad.transpose());
    return h / denom;
  }
  // lp ball: g solves ||Linv x - g z||_p = g, so u / g has unit p-norm.
  const double p = l.lp_exponent();
  const Vector y = l.linear_inverse() * x;
  const Vector& z = l.lp_base_shift();
  const Vector u = y - g * z;
  Vector q(n);  // gradient of the p-norm at u (homogeneous of degree zero)
  Matrix hn = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double t = std::abs(u[i]) / g;
    q[i] = (u[i] >= 0.0 ? 1.0 : -1.0) * std::pow(t, p - 1.0);
    hn(i, i) = std::pow(t, p - 2.0);
  }
  hn -= q * q.transpose();
  hn *= (p - 1.0) / g;
  const double d = 1.0 + q.dot(z);
  const Matrix inner = Matrix::Identity(n, n) - z * (q.transpose() / d);
  const Matrix hy = inner.transpose() * hn * inner / d;
  return l.linear_inverse().transpose() * hy * l.linear_inverse();
}

struct BarrierTerms {
  bool feasible = false;
  double log_det = 0.0;
  double barrier_sum = 0.0;  // sum of log(slack)
  std::vector<double> slacks;
  std::vector<Vector> grads;   // aligned constraint gradients
  std::vector<Vector> points;  // mapped vertices (smooth containers only)
};

// Containment constraints for verts mapped through x -> A x + b. A polytope
// container yields one linear constraint per (vertex, facet) pair; a smooth
// container yields one gauge constraint per vertex.
BarrierTerms eval_terms(const Matrix& verts, const ConvexBody& l, const Matrix& a,
                        const Vector& b, bool need_grads) {
  BarrierTerms t;
  const int n = static_cast<int>(verts.cols());
  const double det = a.determinant();
  if (!(det > 1e-300) || !std::isfinite(det)) return t;
  t.log_det = std::log(det);
  Matrix y = verts * a.transpose();
  y.rowwise() += b.transpose();
  if (l.kind() == BodyKind::hpolytope) {
    const Matrix& nm = l.normals();
    const Vector& off = l.offsets();
    for (int j = 0; j < y.rows(); ++j) {
      for (int i = 0; i < nm.rows(); ++i) {
        const double s = off[i] - nm.row(i).dot(y.row(j));
        if (!(s > 0.0)) return t;
        t.slacks.push_back(s);
        t.barrier_sum += std::log(s);
        if (need_grads) {
          t.grads.push_back(
              pair_gradient(nm.row(i).transpose(), verts.row(j).transpose()));
        }
      }
    }
  } else {
    for (int j = 0; j < y.rows(); ++j) {
      const Vector yj = y.row(j).transpose();
      const double g = gauge(l, yj);
      const double s = 1.0 - g;
      if (!(s > 0.0)) return t;
      t.slacks.push_back(s);
      t.barrier_sum += std::log(s);
      if (need_grads) {
        t.points.push_back(yj);
        if (g < 1e-12) {
          // The gauge is not differentiable at the origin; the term is
          // essentially inactive there, so a zero direction is harmless.
          t.grads.push_back(Vector::Zero(stacked_size(n)));
        } else {
          t.grads.push_back(
              pair_gradient(gauge_gradient(l, yj), verts.row(j).transpose()));
        }
      }
    }
  }
  t.feasible = true;
  return t;
}

double barrier_value(const BarrierTerms& t, double tau) {
  return -t.log_det - t.barrier_sum / tau;
}

struct NewtonOutcome {
  int iters = 0;
  double decrement = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Damped Newton on f_tau(A, b) = -log det A - (1/tau) sum log slack. The
// log-det term is indefinite over nonsymmetric matrices, so the step is
// Levenberg-regularized and the damping escalates until the direction both
// descends and survives the feasible backtracking line search.
NewtonOutcome newton_solve(const Matrix& verts, const ConvexBody& lh, double tau,
                           Matrix& a, Vector& b, int max_iters) {
  const int n = static_cast<int>(verts.cols());
  const int nv = stacked_size(n);
  NewtonOutcome out;
  double mu = 1e-10;
  BarrierTerms t = eval_terms(verts, lh, a, b, true);
  if (!t.feasible) {
    fail(ErrorCode::infeasible_start, "barrier subproblem started infeasible");
  }
  for (out.iters = 0; out.iters < max_iters; ++out.iters) {
    const double f = barrier_value(t, tau);
    const Matrix ainv = a.inverse();
    Vector g = Vector::Zero(nv);
    add_neg_logdet_gradient(ainv, g);
    Matrix h = Matrix::Zero(nv, nv);
    add_neg_logdet_hessian(ainv, h);
    for (std::size_t c = 0; c < t.slacks.size(); ++c) {
      const double s = t.slacks[c];
      g += t.grads[c] / (tau * s);
      h.noalias() += (t.grads[c] * t.grads[c].transpose()) / (tau * s * s);
    }
    if (lh.kind() != BodyKind::hpolytope) {
      // Smooth gauges contribute curvature beyond the gradient outer product;
      // without it the model Hessian underestimates the barrier and the last
      // Newton steps crawl. Lift each n-by-n gauge Hessian through the linear
      // map (A, b) -> A w + b.
      Matrix lift = Matrix::Zero(n, nv);
      lift.block(0, n * n, n, n) = Matrix::Identity(n, n);
      for (std::size_t c = 0; c < t.slacks.size(); ++c) {
        const Matrix hx = gauge_hessian(lh, t.points[c]);
        const Vector w = verts.row(static_cast<int>(c)).transpose();
        for (int cc = 0; cc < n; ++cc) {
          for (int r = 0; r < n; ++r) lift(r, cc * n + r) = w[cc];
        }
        h.noalias() +=
            lift.transpose() * (hx * lift) / (tau * t.slacks[c]);
      }
    }
    bool stepped = false;
    for (int esc = 0; esc < 14 && !stepped; ++esc) {
      const Matrix hd = h + mu * Matrix::Identity(nv, nv);
      Eigen::LDLT<Matrix> ldlt(hd);
      Vector d = ldlt.solve(-g);
      const double gd = g.dot(d);
      if (ldlt.info() != Eigen::Success || !d.allFinite() || !(gd < 0.0)) {
        mu = std::max(mu * 100.0, 1e-8);
        continue;
      }
      out.decrement = std::sqrt(-gd);
      if (out.decrement <= kNewtonDecrementTol) {
        out.converged = true;
        return out;
      }
      double step = 1.0;
      for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
        Matrix a2 = a;
        Vector b2 = b;
        for (int j = 0; j < n; ++j) {
          for (int i = 0; i < n; ++i) a2(i, j) += step * d[j * n + i];
        }
        b2 += step * d.tail(n);
        const BarrierTerms t2 = eval_terms(verts, lh, a2, b2, false);
        if (!t2.feasible) continue;
        if (barrier_value(t2, tau) <= f + 1e-4 * step * gd) {
          a = a2;
          b = b2;
          t = eval_terms(verts, lh, a, b, true);
          mu = std::max(mu * 0.25, 1e-12);
          stepped = true;
          break;
        }
      }
      if (!stepped) mu = std::max(mu * 100.0, 1e-8);
    }
    if (!stepped) return out;  // stalled below the decrement target
  }
  return out;
}

// Active-set refinement for polytope containers: hold the near-tight
// (facet, vertex) pairs as equalities and solve the stationarity system of
// log det A exactly, so contacts land on their facets to machine precision.
// Pairs whose multiplier turns negative are released; pairs that go tight
// during the solve are captured. Returns the number of rounds used, or 0 if
// the refinement was abandoned (the barrier iterate is kept in that case).
int polish_active_set(const Matrix& verts, const ConvexBody& lh, Matrix& a,
                      Vector& b) {
  const int n = static_cast<int>(verts.cols());
  const int nv = stacked_size(n);
  const Matrix& nm = lh.normals();
  const Vector& off = lh.offsets();

  auto slack_of = [&](const Matrix& am, const Vector& bv, int facet, int vert) {
    return off[facet] - nm.row(facet).dot(am * verts.row(vert).transpose() + bv);
  };

  std::vector<std::pair<int, int>> act;  // (facet, vertex)
  for (int j = 0; j < verts.rows(); ++j) {
    for (int i = 0; i < nm.rows(); ++i) {
      if (slack_of(a, b, i, j) <= 2e-4) act.emplace_back(i, j);
    }
  }
  if (static_cast<int>(act.size()) < n + 1 || act.size() > 60) return 0;

  Matrix aw = a;
  Vector bw = b;
  for (int round = 0; round < 15; ++round) {
    const int m = static_cast<int>(act.size());
    if (m < n + 1) return 0;
    Matrix gmat(m, nv);
    Vector rhs(m);
    for (int t = 0; t < m; ++t) {
      gmat.row(t) = pair_gradient(nm.row(act[t].first).transpose(),
                                  verts.row(act[t].second).transpose())
                        .transpose();
      rhs[t] = off[act[t].first];
    }
    Vector x = stack_vars(aw, bw);
    Vector lam;
    {
      Vector gradf = Vector::Zero(nv);
      add_neg_logdet_gradient(aw.inverse(), gradf);
      lam = gmat.transpose().completeOrthogonalDecomposition().solve(-gradf);
    }
    bool stationary = false;
    for (int it = 0; it < 60; ++it) {
      Matrix am;
      Vector bv;
      unstack_vars(x, n, am, bv);
      const double det = am.determinant();
      if (!(det > 0.0)) break;
      Vector gradf = Vector::Zero(nv);
      add_neg_logdet_gradient(am.inverse(), gradf);
      const Vector rdual = gradf + gmat.transpose() * lam;
      const Vector rpri = gmat * x - rhs;
      const double gscale = 1.0 + gradf.cwiseAbs().maxCoeff();
      if (rdual.cwiseAbs().maxCoeff() <= 1e-11 * gscale &&
          rpri.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + off.cwiseAbs().maxCoeff())) {
        stationary = true;
        break;
      }
      Matrix kkt = Matrix::Zero(nv + m, nv + m);
      Matrix hess = Matrix::Zero(nv, nv);
      add_neg_logdet_hessian(am.inverse(), hess);
      kkt.topLeftCorner(nv, nv) = hess;
      kkt.topRightCorner(nv, m) = gmat.transpose();
      kkt.bottomLeftCorner(m, nv) = gmat;
      Vector rr(nv + m);
      rr.head(nv) = -rdual;
      rr.tail(m) = -rpri;
      const Vector dz = kkt.completeOrthogonalDecomposition().solve(rr);
      if (!dz.allFinite()) break;
      const double merit = rdual.squaredNorm() + rpri.squaredNorm();
      double step = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
        const Vector x2 = x + step * dz.head(nv);
        const Vector lam2 = lam + step * dz.tail(m);
        Matrix a2;
        Vector b2;
        unstack_vars(x2, n, a2, b2);
        if (!(a2.determinant() > 0.0)) continue;
        Vector gradf2 = Vector::Zero(nv);
        add_neg_logdet_gradient(a2.inverse(), gradf2);
        const double merit2 = (gradf2 + gmat.transpose() * lam2).squaredNorm() +
                              (gmat * x2 - rhs).squaredNorm();
        if (merit2 <= merit * (1.0 - 1e-4 * step)) {
          x = x2;
          lam = lam2;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!stationary) return 0;
    Matrix am;
    Vector bv;
    unstack_vars(x, n, am, bv);

    // Capture pairs that went tight outside the working set.
    std::vector<std::pair<int, int>> to_add;
    for (int j = 0; j < verts.rows(); ++j) {
      for (int i = 0; i < nm.rows(); ++i) {
        const std::pair<int, int> p{i, j};
        if (std::find(act.begin(), act.end(), p) != act.end()) continue;
        if (slack_of(am, bv, i, j) < 1e-9) to_add.push_back(p);
      }
    }
    aw = am;
    bw = bv;
    if (!to_add.empty()) {
      act.insert(act.end(), to_add.begin(), to_add.end());
      continue;
    }
    // Release pairs whose multiplier is negative.
    const double lmax = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
    std::vector<std::pair<int, int>> kept;
    for (int t = 0; t < m; ++t) {
      if (lam[t] >= -1e-7 * std::max(1.0, lmax)) kept.push_back(act[t]);
    }
    if (kept.size() == act.size()) {
      a = aw;
      b = bw;
      return round + 1;
    }
    if (static_cast<int>(kept.size()) < n + 1) return 0;
    act = std::move(kept);
  }
  return 0;
}

struct ResidualSet {
  double identity = 0.0;
  double u = 0.0;
  double v = 0.0;
  double max() const { return std::max({identity, u, v}); }
};

ResidualSet decomposition_residuals(const std::vector<ContactPair>& contacts,
                                    const Vector& weights, int n) {
  Matrix s = Matrix::Zero(n, n);
  Vector su = Vector::Zero(n);
  Vector sv = Vector::Zero(n);
  const int m = std::min<int>(static_cast<int>(contacts.size()),
                              static_cast<int>(weights.size()));
  for (int i = 0; i < m; ++i) {
    const double w = weights[i];
    s.noalias() += w * contacts[i].v * contacts[i].u.transpose();
    su += w * contacts[i].u;
    sv += w * contacts[i].v;
  }
  return {(s - Matrix::Identity(n, n)).norm(), su.norm(), sv.norm()};
}

struct SearchPoint {
  Vector x;
  double f = 0.0;
};

// Standard Nelder-Mead simplex search (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2); deterministic for a fixed start.
SearchPoint nelder_mead(const std::function<double(const Vector&)>& fn,
                        const Vector& x0, double step, int max_iter) {
  const int n = static_cast<int>(x0.size());
  std::vector<SearchPoint> simplex;
  simplex.push_back({x0, fn(x0)});
  for (int i = 0; i < n; ++i) {
    Vector xi = x0;
    xi[i] += step;
    simplex.push_back({xi, fn(xi)});
  }
  auto by_f = [](const SearchPoint& p, const SearchPoint& q) { return p.f < q.f; };
  for (int it = 0; it < max_iter; ++it) {
    std::stable_sort(simplex.begin(), simplex.end(), by_f);
    double diam = 0.0;
    for (int i = 1; i <= n; ++i) {
      diam = std::max(diam, (simplex[i].x - simplex[0].x).norm());
    }
    if (simplex[n].f - simplex[0].f <= 1e-13 * (1.0 + std::abs(simplex[0].f)) &&
        diam <= 1e-10) {
      break;
    }
    Vector c = Vector::Zero(n);
    for (int i = 0; i < n; ++i) c += simplex[i].x;
    c /= n;
    const Vector xw = simplex[n].x;
    const Vector xr = c + (c - xw);
    const double fr = fn(xr);
    if (fr < simplex[0].f) {
      const Vector xe = c + 2.0 * (c - xw);
      const double fe = fn(xe);
      if (fe < fr) {
        simplex[n] = {xe, fe};
      } else {
        simplex[n] = {xr, fr};
      }
    } else if (fr < simplex[n - 1].f) {
      simplex[n] = {xr, fr};
    } else {
      const Vector xc =
          fr < simplex[n].f ? (c + 0.5 * (c - xw)).eval() : (c - 0.5 * (c - xw)).eval();
      const double fc = fn(xc);
      if (fc < std::min(fr, simplex[n].f)) {
        simplex[n] = {xc, fc};
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i].x = simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x);
          simplex[i].f = fn(simplex[i].x);
        }
      }
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_f);
  return simplex[0];
}

}  // namespace

BarrierEval barrier_eval(const Matrix& verts, const ConvexBody& l, double tau,
                         const Matrix& a, const Vector& b) {
  if (!(tau > 0.0)) fail(ErrorCode::domain_error, "barrier weight must be positive");
  const int n = static_cast<int>(verts.cols());
  BarrierEval out;
  out.grad = Vector::Zero(stacked_size(n));
  const ConvexBody lh = container_form(l);
  const BarrierTerms t = eval_terms(verts, lh, a, b, true);
  if (!t.feasible) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.feasible = true;
  out.value = barrier_value(t, tau);
  add_neg_logdet_gradient(a.inverse(), out.grad);
  for (std::size_t c = 0; c < t.slacks.size(); ++c) {
    out.grad += t.grads[c] / (tau * t.slacks[c]);
  }
  return out;
}

AffineMap max_volume_position(const ConvexBody& k, const ConvexBody& l,
                              MaxVolumeStats* stats) {
  if (k.dim() != l.dim()) fail(ErrorCode::domain_error, "dimension mismatch");
  const int n = k.dim();
  const Matrix verts = polytope_vertices(k);
  const ConvexBody lh = container_form(l);
  // Work in a frame where the container holds the origin strictly inside,
  // so gauges are available no matter where the input container sits.
  const Vector frame = interior_point(lh);
  const ConvexBody lw = shift(lh, frame);

  const Vector centroid = verts.colwise().mean().transpose();
  double gmax = 0.0;
  for (int j = 0; j < verts.rows(); ++j) {
    const Vector w = verts.row(j).transpose() - centroid;
    if (w.norm() > 0.0) gmax = std::max(gmax, gauge(lw, w));
  }
  if (!(gmax > 0.0)) fail(ErrorCode::degenerate_body, "vertex set has no spread");
  const double s0 = 0.5 / gmax;
  Matrix a = s0 * Matrix::Identity(n, n);
  Vector b = -s0 * centroid;
  if (!eval_terms(verts, lw, a, b, false).feasible) {
    fail(ErrorCode::infeasible_start, "no strictly feasible start");
  }

  double tau = 100.0;
  int newton_total = 0;
  double last_decrement = 0.0;
  for (int outer = 0; outer < 8; ++outer) {
    const NewtonOutcome res = newton_solve(verts, lw, tau, a, b, 200);
    newton_total += res.iters;
    last_decrement = res.decrement;
    if (!res.converged) {
      fail(ErrorCode::solver_stall, "newton decrement did not reach tolerance");
    }
    tau *= 10.0;
  }
  int rounds = 0;
  if (lw.kind() == BodyKind::hpolytope) {
    rounds = polish_active_set(verts, lw, a, b);
  }
  if (stats) {
    stats->outer_steps = 8;
    stats->newton_steps = newton_total;
    stats->polish_rounds = rounds;
    stats->log_det = std::log(a.determinant());
    stats->final_decrement = last_decrement;
    double mg = 0.0;
    for (int j = 0; j < verts.rows(); ++j) {
      mg = std::max(mg, gauge(lw, (a * verts.row(j).transpose() + b).eval()));
    }
    stats->max_gauge = mg;
  }
  return AffineMap{a, b + frame};
}

std::vector<ContactPair> contact_points(const ConvexBody& k, const ConvexBody& l,
                                        const AffineMap& pose, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::domain_error, "contact tolerance must be positive");
  const Matrix verts = polytope_vertices(k);
  const ConvexBody lh = container_form(l);

  std::vector<Vector> us;
  for (int j = 0; j < verts.rows(); ++j) {
    Vector u = pose(verts.row(j).transpose());
    bool dup = false;
    for (const Vector& p : us) {
      if ((p - u).norm() <= kContactDedupTol) {
        dup = true;
        break;
      }
    }
    if (!dup) us.push_back(std::move(u));
  }

  std::vector<ContactPair> out;
  if (lh.kind() == BodyKind::hpolytope) {
    const Matrix& nm = lh.normals();
    const Vector& off = lh.offsets();
    if (!(off.minCoeff() > 0.0)) {
      fail(ErrorCode::origin_not_interior, "container must contain 0 strictly inside");
    }
    for (const Vector& u : us) {
      for (int i = 0; i < nm.rows(); ++i) {
        const double ratio = nm.row(i).dot(u) / off[i];
        if (1.0 - ratio <= tol) {
          Vector v = nm.row(i).transpose() / off[i];
          v /= u.dot(v);
          out.push_back({u, v});
        }
      }
    }
  } else {
    for (const Vector& u : us) {
      const double g = gauge(lh, u);
      if (1.0 - g <= tol) {
        Vector v = gauge_gradient(lh, u);
        v /= u.dot(v);
        out.push_back({u, v});
      }
    }
  }
  if (out.empty()) fail(ErrorCode::no_contacts, "no contact within tolerance");
  return out;
}

WeightSolve john_weights(const std::vector<ContactPair>& contacts, int n) {
  const int m = static_cast<int>(contacts.size());
  if (m < n + 1) fail(ErrorCode::no_contacts, "need at least n+1 contact pairs");
  const int rows = n * n + 2 * n;
  Matrix sys(rows, m);
  for (int t = 0; t < m; ++t) {
    const Vector& u = contacts[t].u;
    const Vector& v = contacts[t].v;
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) sys(c * n + r, t) = v[r] * u[c];
    }
    sys.block(n * n, t, n, 1) = u;
    sys.block(n * n + n, t, n, 1) = v;
  }
  Vector rhs = Vector::Zero(rows);
  for (int c = 0; c < n; ++c) rhs[c * n + c] = 1.0;

  const NnlsResult fit = solve_nnls(sys, rhs, 1e-12);
  WeightSolve ws;
  ws.weights = fit.x;
  const ResidualSet rs = decomposition_residuals(contacts, fit.x, n);
  ws.residual_identity = rs.identity;
  ws.residual_u = rs.u;
  ws.residual_v = rs.v;
  Eigen::JacobiSVD<Matrix> svd(sys);
  const Vector& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-9 * sv[0]) ++rank;
  }
  ws.rank_deficient = rank < std::min(rows, m);
  return ws;
}

JohnCertificate decomposition_shift(const ConvexBody& k, const ConvexBody& l,
                                    int restarts, std::uint64_t seed) {
  if (restarts < 0) fail(ErrorCode::domain_error, "restart count must be nonnegative");
  const int n = k.dim();
  if (!(origin_interior_radius(l) > 0.0)) {
    fail(ErrorCode::origin_not_interior, "container must contain 0 strictly inside");
  }
  const std::vector<ContactPair> base =
      contact_points(k, l, AffineMap::identity(n), 1e-6);
  if (static_cast<int>(base.size()) < n + 1) {
    fail(ErrorCode::no_contacts, "too few contacts to search for a decomposition");
  }
  const ConvexBody kv = to_vpolytope(k);
  const double limit = static_cast<double>(n) / (n + 1.0);

  long evals = 0;
  auto shift_pairs = [&](const Vector& z, std::vector<ContactPair>& out) {
    out.clear();
    out.reserve(base.size());
    for (const ContactPair& cp : base) {
      const double denom = 1.0 - z.dot(cp.v);
      if (denom <= 1e-9) return false;
      out.push_back({cp.u - z, cp.v / denom});
    }
    return true;
  };
  std::vector<ContactPair> scratch;
  auto objective = [&](const Vector& z) -> double {
    ++evals;
    if (!shift_pairs(z, scratch)) return 1e9;
    const WeightSolve ws = john_weights(scratch, n);
    double val = std::sqrt(ws.residual_identity * ws.residual_identity +
                           ws.residual_u * ws.residual_u +
                           ws.residual_v * ws.residual_v);
    const double mu = vpolytope_gauge_lp(kv, z);
    if (!std::isfinite(mu)) return 1e6 + z.squaredNorm();
    if (mu > limit + 1e-9) val += 1e3 * (mu - limit);
    return val;
  };

  Vector zbest = Vector::Zero(n);
  int used = 0;
  const WeightSolve at_zero = john_weights(base, n);
  if (ResidualSet{at_zero.residual_identity, at_zero.residual_u, at_zero.residual_v}
          .max() > kResidualTol) {
    double fbest = objective(zbest);
    double span = 0.0;
    const Matrix& vv = kv.vertices();
    for (int j = 0; j < vv.rows(); ++j) span = std::max(span, vv.row(j).norm());
    const double step = std::max(0.05 * span, 1e-4);
    for (int r = 0; r <= restarts; ++r) {
      Vector x0 = Vector::Zero(n);
      if (r > 0) {
        CounterRng rng(seed, 500 + static_cast<std::uint64_t>(r));
        Vector th(vv.rows());
        for (int i = 0; i < th.size(); ++i) {
          th[i] = -std::log(std::max(rng.uniform(), 1e-12));
        }
        th /= th.sum();
        x0 = 0.9 * limit * (vv.transpose() * th);
      }
      const SearchPoint sp = nelder_mead(objective, x0, step, 400);
      ++used;
      if (sp.f < fbest) {
        fbest = sp.f;
        zbest = sp.x;
      }
      if (fbest <= 1e-8) break;
    }
  }

  std::vector<ContactPair> held;
  if (!shift_pairs(zbest, held)) {
    zbest = Vector::Zero(n);
    shift_pairs(zbest, held);
  }
  WeightSolve ws = john_weights(held, n);
  auto max_res = [](const WeightSolve& w) {
    return std::max({w.residual_identity, w.residual_u, w.residual_v});
  };

  // Drop pairs the fit never uses.
  {
    std::vector<ContactPair> kept;
    const double wmax = ws.weights.size() > 0 ? ws.weights.maxCoeff() : 0.0;
    for (int i = 0; i < ws.weights.size(); ++i) {
      if (ws.weights[i] > std::max(1e-14, 1e-10 * wmax)) kept.push_back(held[i]);
    }
    if (static_cast<int>(kept.size()) >= n + 1 && kept.size() < held.size()) {
      held = std::move(kept);
      ws = john_weights(held, n);
    }
  }
  // Reduce the support towards the decomposition bound, lightest pairs first,
  // keeping every residual within tolerance.
  const int mcap = n * n + n;
  while (static_cast<int>(held.size()) > mcap) {
    std::vector<int> order(held.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int p, int q) {
      return ws.weights[p] < ws.weights[q];
    });
    bool dropped = false;
    for (int cand : order) {
      std::vector<ContactPair> trial;
      trial.reserve(held.size() - 1);
      for (int i = 0; i < static_cast<int>(held.size()); ++i) {
        if (i != cand) trial.push_back(held[i]);
      }
      if (static_cast<int>(trial.size()) < n + 1) continue;
      WeightSolve tws = john_weights(trial, n);
      if (max_res(tws) <= std::max(kResidualTol, max_res(ws) + 1e-12)) {
        held = std::move(trial);
        ws = std::move(tws);
        dropped = true;
        break;
      }
    }
    if (!dropped) break;
  }

  JohnCertificate cert;
  cert.shift = zbest;
  cert.search_restarts = used;
  cert.search_evals = evals;
  std::vector<double> fw;
  const double wmax = ws.weights.size() > 0 ? ws.weights.maxCoeff() : 0.0;
  for (int i = 0; i < ws.weights.size(); ++i) {
    if (ws.weights[i] > std::max(1e-14, 1e-12 * wmax)) {
      cert.contacts.push_back(held[i]);
      fw.push_back(ws.weights[i]);
    }
  }
  if (cert.contacts.empty()) {
    cert.contacts = held;
    fw.assign(ws.weights.data(), ws.weights.data() + ws.weights.size());
  }
  cert.weights = Eigen::Map<const Vector>(fw.data(), static_cast<int>(fw.size()));
  const ResidualSet rs = decomposition_residuals(cert.contacts, cert.weights, n);
  cert.residual_identity = rs.identity;
  cert.residual_u = rs.u;
  cert.residual_v = rs.v;
  cert.search_converged = rs.max() <= kResidualTol;
  return cert;
}

DecompositionReport verify_decomposition(const JohnCertificate& cert, int n,
                                         double tol) {
  if (n < 1 || !(tol > 0.0)) fail(ErrorCode::domain_error, "bad verification arguments");
  DecompositionReport rep;
  rep.contact_count = static_cast<int>(cert.contacts.size());
  const ResidualSet rs = decomposition_residuals(cert.contacts, cert.weights, n);
  rep.residual_identity = rs.identity;
  rep.residual_u = rs.u;
  rep.residual_v = rs.v;
  double total = 0.0;
  const int m = std::min<int>(rep.contact_count, static_cast<int>(cert.weights.size()));
  for (int i = 0; i < m; ++i) total += cert.weights[i];
  rep.weight_sum = total;
  rep.pass_identity = rs.identity <= tol;
  rep.pass_u = rs.u <= tol;
  rep.pass_v = rs.v <= tol;
  rep.pass_sum = std::abs(total - n) <= 10.0 * tol;
  rep.pass_count = rep.contact_count <= n * n + n;
  return rep;
}

}  // namespace cvx
