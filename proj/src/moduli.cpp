#include "cvxgeo/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvxgeo/rng.hpp"

namespace cvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Swaps a vertex-list polytope for its facet form so gauge evaluations in
// the scan loops stay cheap; other kinds evaluate directly.
ConvexBody scan_form(const ConvexBody& body) {
  if (body.kind() == BodyKind::vpolytope) return to_hpolytope(body);
  return body;
}

// Certified circumradius bound from axis-aligned support values.
double box_circumradius(const ConvexBody& body) {
  const int n = body.dim();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    const double w = std::max(support(body, e), support(body, -e));
    sum += w * w;
  }
  return std::sqrt(sum);
}

// Separation of a pair under the weaker (either-orientation) reading.
double pair_separation(const ConvexBody& body, const Vector& d) {
  return std::max(gauge(body, d), gauge(body, -d));
}

// One pair-of-arcs cell in the branch-and-bound over boundary pairs.
struct PairCell {
  double th = 0.0;  // center angle of the first boundary arc
  double ph = 0.0;  // center angle of the second boundary arc
  double w = 0.0;   // angular width of both arcs
};

// Certified planar bracket. Boundary points are parameterized by rays
// from an interior anchor (so the parameterization Lipschitz constant
// R^2/rho stays intrinsic even when the gauge origin sits near the
// boundary), and the infimum over separated pairs is located by
// branch-and-bound over pairs of angular arcs: a cell is pruned when its
// optimistic value cannot beat the running upper bound, split while its
// slack exceeds the target, and finalized otherwise. Every pruned cell's
// floor is at least the final upper bound, so the reported lower bound
// covers all boundary pairs.
ModulusBracket planar_certified(const ConvexBody& body, double t, int m1) {
  const double rho0 = origin_interior_radius(body);
  const Vector anchor = interior_point(body);
  const ConvexBody ray_frame = shift(body, anchor);
  const double rho_c = origin_interior_radius(ray_frame);
  const double rbox_c = box_circumradius(ray_frame);
  const double lpt = rbox_c * rbox_c / rho_c;  // bound on |x'(theta)|

  const auto boundary = [&](double theta) {
    Vector u(2);
    u << std::cos(theta), std::sin(theta);
    return Vector(anchor + u / gauge(ray_frame, u));
  };
  // Width-w arc pair: the center pair is within lpt*w/2 of any true pair
  // per point, so separations move by at most sep_slack(w) and midpoint
  // gauges by mid_slack(w).
  const auto sep_slack = [&](double w) { return lpt * w / rho0; };
  const auto mid_slack = [&](double w) { return lpt * w / (2.0 * rho0); };

  double upper = 1.0;

  // Coarse full scan seeds the queue and the incumbent upper bound.
  const double w0 = kTwoPi / m1;
  std::vector<Vector> pts(m1);
  for (int i = 0; i < m1; ++i) pts[i] = boundary(i * w0);
  std::vector<PairCell> frontier;
  for (int i = 0; i < m1; ++i) {
    for (int j = i; j < m1; ++j) {
      const Vector d = pts[i] - pts[j];
      if (d.norm() / rho0 < t - sep_slack(w0)) continue;
      const double sep = pair_separation(body, d);
      if (sep < t - sep_slack(w0)) continue;
      if (sep >= t) {
        const double f = 1.0 - gauge(body, 0.5 * (pts[i] + pts[j]));
        if (f < upper) upper = f;
      }
      frontier.push_back({i * w0, j * w0, w0});
    }
  }
  if (upper <= 1e-12) {
    // Flat stretch of boundary: the modulus vanishes and zero is already
    // a certified lower bound.
    return {0.0, std::max(upper, 0.0), true};
  }

  // Split until the value slack drops below the target (or the evaluation
  // budget runs out, which only widens the certified bracket).  Cheap
  // Euclidean bounds (|v|/rbox <= gauge(v) <= |v|/rho0) prune most cells
  // before any gauge evaluation.
  const double target = 1.5e-4;
  double finalized = kInf;
  long evals = 0;
  const long eval_cap = 4000L * static_cast<long>(m1);
  Vector neg_d(2);
  while (!frontier.empty()) {
    std::vector<PairCell> next;
    next.reserve(frontier.size());
    for (const PairCell& cell : frontier) {
      ++evals;
      const Vector x = boundary(cell.th);
      const Vector y = boundary(cell.ph);
      const Vector d = x - y;
      const double slack = sep_slack(cell.w);
      if (d.norm() < rho0 * (t - slack)) continue;  // proven infeasible
      const Vector mid = 0.5 * (x + y);
      const double vslack = mid_slack(cell.w);
      if (1.0 - mid.norm() / rho0 - vslack >= upper) continue;  // deep pair
      const double g1 = gauge(body, d);
      double sep = g1;
      bool sep_full = false;
      if (g1 < t - slack) {
        neg_d = -d;
        sep = std::max(g1, gauge(body, neg_d));
        sep_full = true;
        if (sep < t - slack) continue;  // proven infeasible
      }
      const double f = 1.0 - gauge(body, mid);
      if (f < upper) {
        if (!sep_full && g1 < t) {
          neg_d = -d;
          sep = std::max(g1, gauge(body, neg_d));
        }
        if (sep >= t) upper = f;
      }
      const double floor = f - vslack;
      if (floor >= upper) continue;  // cannot beat the incumbent
      if (vslack <= target || evals > eval_cap ||
          static_cast<long>(next.size()) > eval_cap / 2) {
        finalized = std::min(finalized, floor);
        continue;
      }
      const double h = cell.w / 4.0;
      next.push_back({cell.th - h, cell.ph - h, cell.w / 2.0});
      next.push_back({cell.th - h, cell.ph + h, cell.w / 2.0});
      next.push_back({cell.th + h, cell.ph - h, cell.w / 2.0});
      next.push_back({cell.th + h, cell.ph + h, cell.w / 2.0});
    }
    frontier = std::move(next);
  }

  // Interior pairs probe the assumption that boundary pairs attain the
  // infimum; any feasible pair found only tightens the upper bound.
  CounterRng rng(97);
  for (int k = 0; k < 64; ++k) {
    const Vector x =
        rng.uniform(0.4, 1.0) * pts[static_cast<int>(rng.uniform() * m1) % m1];
    const Vector y =
        rng.uniform(0.4, 1.0) * pts[static_cast<int>(rng.uniform() * m1) % m1];
    if (pair_separation(body, x - y) < t) continue;
    upper = std::min(upper, 1.0 - gauge(body, 0.5 * (x + y)));
  }

  upper = std::max(upper, 0.0);
  // Pruned cells are covered by the final upper bound; finalized cells by
  // their own floors.
  double lower = std::max(0.0, std::min(finalized, upper));
  return {lower, upper, true};
}

// Sampled estimate for dimension >= 3: random boundary pairs plus local
// polish of the best pair. The lower value mirrors the estimate and is
// flagged uncertified.
ModulusBracket sampled_estimate(const ConvexBody& body, double t,
                                int budget) {
  const int n = body.dim();
  const int m = std::clamp(budget, 512, 8192);
  CounterRng rng(53);
  std::vector<Vector> pts(m);
  for (int i = 0; i < m; ++i) {
    const Vector u = rng.unit_vector(n);
    pts[i] = u / gauge(body, u);
  }
  double upper = 1.0;
  Vector bx, by;
  for (int k = 0; k < 4 * m; ++k) {
    const Vector& x = pts[rng.next_u64() % m];
    const Vector& y = pts[rng.next_u64() % m];
    if (pair_separation(body, x - y) < t) continue;
    const double f = 1.0 - gauge(body, 0.5 * (x + y));
    if (f < upper) {
      upper = f;
      bx = x;
      by = y;
    }
  }
  if (bx.size() > 0) {
    double sigma = 0.1;
    for (int it = 0; it < 200; ++it, sigma *= 0.985) {
      Vector cx = bx + sigma * rng.normal_vector(n);
      Vector cy = by + sigma * rng.normal_vector(n);
      cx /= gauge(body, cx);
      cy /= gauge(body, cy);
      if (pair_separation(body, cx - cy) < t) continue;
      const double f = 1.0 - gauge(body, 0.5 * (cx + cy));
      if (f < upper) {
        upper = f;
        bx = cx;
        by = cy;
      }
    }
  }
  upper = std::max(upper, 0.0);
  return {upper, upper, false};
}

}  // namespace

ModulusValue modulus_lp(double p, double t) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    fail(ErrorCode::domain_error, "modulus_lp: p must lie in (1, inf)");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error, "modulus_lp: t must lie in [0, 1]");
  }
  if (p >= 2.0) {
    // 1 - (1 - u)^{1/p} via expm1/log1p: the naive form loses all relative
    // accuracy once u = (t/2)^p drops near the machine epsilon of 1.0.
    const double u = std::pow(t / 2.0, p);
    return {-std::expm1(std::log1p(-u) / p), ModulusKind::exact};
  }
  return {(p - 1.0) / 8.0 * t * t, ModulusKind::lower_bound};
}

ModulusBracket modulus_estimate(const ConvexBody& body, double t,
                                int budget) {
  if (!(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error, "modulus_estimate: t must lie in [0, 1]");
  }
  if (origin_interior_radius(body) <= 0.0) {
    fail(ErrorCode::origin_not_interior,
         "modulus_estimate: origin must be interior");
  }
  if (t == 0.0) return {0.0, 0.0, true};
  const ConvexBody work = scan_form(body);
  if (body.dim() == 2) {
    return planar_certified(work, t, std::clamp(budget, 256, 8192));
  }
  return sampled_estimate(work, t, budget);
}

ModulusCurve build_modulus_curve(const ConvexBody& body,
                                 const std::vector<double>& ts, int budget,
                                 const std::string& label) {
  ModulusCurve curve;
  curve.label = label;
  std::vector<double> sorted = ts;
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    const ModulusBracket br = modulus_estimate(body, t, budget);
    curve.samples.push_back({t, br.lower, br.upper, br.certified});
  }
  return curve;
}

ModulusCurve lp_modulus_curve(double p, int count, const std::string& label) {
  if (count < 2) {
    fail(ErrorCode::domain_error, "lp_modulus_curve: need at least 2 samples");
  }
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i) {
    ts[i] = static_cast<double>(i) / (count - 1);
  }
  return lp_modulus_curve(p, ts, label);
}

ModulusCurve lp_modulus_curve(double p, const std::vector<double>& ts,
                              const std::string& label) {
  ModulusCurve curve;
  curve.label = label;
  std::vector<double> sorted = ts;
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    const ModulusValue v = modulus_lp(p, t);
    const double up = v.kind == ModulusKind::exact ? v.value : 1.0;
    curve.samples.push_back({t, v.value, up, true});
  }
  return curve;
}

double curve_lower_at(const ModulusCurve& curve, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error, "curve_lower_at: t must lie in [0, 1]");
  }
  double env = 0.0;
  for (const ModulusSample& s : curve.samples) {
    if (s.t <= t && s.certified) env = std::max(env, s.lower);
  }
  return env;
}

double shift_bound_gauge(const ModulusCurve& curve_l, double c, double r_asym,
                         double t) {
  if (!(c > 0.0 && c <= 1.0) || !(r_asym >= 1.0) || !(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error,
         "shift_bound_gauge: need c in (0,1], r >= 1, t in [0,1]");
  }
  return curve_lower_at(curve_l, c * t) / (1.0 + (1.0 - c) * r_asym);
}

double shift_bound_polar(const ModulusCurve& curve_polar, double c,
                         double r_asym, double t) {
  if (!(c > 0.0 && c <= 1.0) || !(r_asym >= 1.0) || !(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error,
         "shift_bound_polar: need c in (0,1], r >= 1, t in [0,1]");
  }
  const double arg = c * c * t / (1.0 - c + r_asym);
  return curve_lower_at(curve_polar, arg) / ((1.0 - c) * r_asym + 1.0);
}

double corollary_polar_bound(BodyClass kind, const ModulusCurve& curve_polar,
                             int n, double t) {
  if (n < 2) {
    fail(ErrorCode::domain_error, "corollary_polar_bound: need n >= 2");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::domain_error, "corollary_polar_bound: t must lie in [0,1]");
  }
  const double nd = static_cast<double>(n);
  if (kind == BodyClass::general) {
    return curve_lower_at(curve_polar, t / (4.0 * nd * nd * nd)) / (2.0 * nd);
  }
  return curve_lower_at(curve_polar, t / (2.0 * nd * nd)) / 2.0;
}

double origin_asymmetry(const ConvexBody& body) {
  if (origin_interior_radius(body) <= 0.0) {
    fail(ErrorCode::origin_not_interior,
         "origin_asymmetry: origin must be interior");
  }
  const ConvexBody work = scan_form(body);
  double r = 1.0;
  if (body.is_polytope()) {
    const Matrix verts = body.kind() == BodyKind::vpolytope
                             ? body.vertices()
                             : enumerate_vertices(body);
    for (int i = 0; i < verts.rows(); ++i) {
      r = std::max(r, gauge(work, -verts.row(i).transpose()));
    }
    return r;
  }
  CounterRng rng(61);
  for (int k = 0; k < 512; ++k) {
    const Vector u = rng.unit_vector(body.dim());
    const Vector x = u / gauge(work, u);
    r = std::max(r, gauge(work, -x));
  }
  return r;
}

}  // namespace cvx
