#include "cvxgeo/selfcheck.hpp"

#include "cvxgeo/distance.hpp"
#include "cvxgeo/generate.hpp"
#include "cvxgeo/john.hpp"
#include "cvxgeo/json_io.hpp"
#include "cvxgeo/moduli.hpp"
#include "cvxgeo/rational.hpp"
#include "cvxgeo/rng.hpp"
#include "cvxgeo/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

namespace cvx {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Accumulates shared state across criteria: every distance-style bound the
// suite produces is re-checked for lower <= upper at the end.
struct Suite {
  SelfcheckOptions opts;
  std::vector<DistanceBound> bounds;

  CriterionResult run(int index, const std::string& name,
                      void (Suite::*body)(CriterionResult&)) {
    CriterionResult result;
    result.index = index;
    result.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    (this->*body)(result);
    const auto t1 = std::chrono::steady_clock::now();
    result.seconds = std::chrono::duration<double>(t1 - t0).count();
    return result;
  }

  // 1. Positioning pipeline never exceeds the dimension ceiling.
  void ceiling(CriterionResult& out) {
    double worst = 0.0;
    int count = 0;
    bool ok = true;
    for (const int n : {2, 3}) {
      const int total = n == 2 ? opts.pairs_2d : opts.pairs_3d;
      for (int i = 0; i < total; ++i) {
        const BodyPair pair =
            random_pair(n, opts.seed, static_cast<std::uint64_t>(i));
        const DistanceBound b = grunbaum_upper(pair.k, pair.l);
        bounds.push_back(b);
        worst = std::max(worst, b.upper - n);
        ok = ok && b.upper <= n + opts.tol_distance;
        ++count;
      }
    }
    out.pass = ok;
    out.sample_value = worst;
    out.detail = fmt("%.0f pairs, worst upper-minus-n %.3g",
                     static_cast<double>(count), worst);
  }

  // 2. The simplex inside the round ball attains the ceiling exactly.
  void simplex_equality(CriterionResult& out) {
    double worst = 0.0;
    bool ok = true;
    for (const int n : {2, 3}) {
      const DistanceBound b =
          grunbaum_upper(regular_simplex(n), ConvexBody::lp_ball(2.0, n));
      bounds.push_back(b);
      const double gap = std::abs(b.upper - n);
      worst = std::max(worst, gap);
      ok = ok && gap <= opts.tol_distance;
      out.sample_value = b.upper;
    }
    out.pass = ok;
    out.detail = fmt("worst |upper - n| = %.3g", worst);
  }

  // 3. Decomposition certificates verify and the homothety sandwich is
  //    certified on the criterion-1 instance set.
  void certificates(CriterionResult& out) {
    double worst_residual = 0.0;
    int failures = 0;
    int count = 0;
    for (const int n : {2, 3}) {
      const int total = n == 2 ? opts.pairs_2d : opts.pairs_3d;
      for (int i = 0; i < total; ++i) {
        const BodyPair pair =
            random_pair(n, opts.seed, static_cast<std::uint64_t>(i));
        const AffineMap map = max_volume_position(pair.k, pair.l);
        const ConvexBody kpos = transform(map, pair.k);
        const JohnCertificate cert = decomposition_shift(kpos, pair.l);
        const DecompositionReport rep = verify_decomposition(cert, n, 1e-5);
        const double residual =
            std::max({rep.residual_identity, rep.residual_u, rep.residual_v});
        worst_residual = std::max(worst_residual, residual);
        bool ok = rep.pass();
        const ConvexBody kz = shift(kpos, cert.shift);
        const ConvexBody lz = shift(pair.l, cert.shift);
        const ContainsResult inner = contains(kz, lz, 1e-6);
        const ContainsResult outer = contains(lz, scale(kz, -double(n)), 1e-6);
        ok = ok && inner.yes() && inner.certified();
        ok = ok && outer.yes() && outer.certified();
        failures += ok ? 0 : 1;
        ++count;
      }
    }
    out.pass = failures == 0;
    out.sample_value = worst_residual;
    out.detail = fmt("%.0f certificates, worst residual %.3g",
                     static_cast<double>(count), worst_residual);
  }

  // 4. Planar lp-ball estimates bracket the closed forms.
  void lp_brackets(CriterionResult& out) {
    const double ts[] = {0.2, 0.5, 0.8, 1.0};
    double worst_width = 0.0;
    bool ok = true;
    for (const double p : {2.0, 3.0, 4.0}) {
      const ConvexBody ball = ConvexBody::lp_ball(p, 2);
      for (const double t : ts) {
        const double closed = modulus_lp(p, t).value;
        const ModulusBracket est = modulus_estimate(ball, t, 1024);
        const double low_gap = closed - est.lower;
        const double high_gap = est.upper - closed;
        worst_width = std::max({worst_width, low_gap, high_gap});
        ok = ok && est.certified;
        ok = ok && low_gap >= -1e-9 && low_gap <= 1e-3;
        ok = ok && high_gap >= -1e-9 && high_gap <= 1e-3;
      }
    }
    for (const double p : {1.5, 2.0}) {
      const ConvexBody ball = ConvexBody::lp_ball(p, 2);
      for (const double t : ts) {
        const double quad = (p - 1.0) * t * t / 8.0;
        const ModulusBracket est = modulus_estimate(ball, t, 512);
        ok = ok && quad <= est.upper + 1e-9;
      }
    }
    out.pass = ok;
    out.sample_value = worst_width;
    out.detail = fmt("worst bracket gap %.3g", worst_width);
  }

  // 5. Shift-transfer bounds never exceed the measured shifted moduli.
  void shift_envelopes(CriterionResult& out) {
    const std::vector<ConvexBody> test_bodies = {
        cube(2),
        ConvexBody::vpolytope(
            (Matrix(3, 2) << 1, 0, 0, 1, -1, -1).finished()),
        ConvexBody::lp_ball(2.0, 2),
        ConvexBody::ellipsoid(
            (Matrix(2, 2) << 1.5, 0.2, 0.2, 0.8).finished()),
    };
    const double cs[] = {0.3, 0.6, 0.9};
    const double ts[] = {0.2, 0.5, 0.8};
    Vector dir(2);
    dir << 0.6, 0.8;
    int cells = 0;
    int violations = 0;
    double worst_excess = -1.0;
    for (const ConvexBody& body : test_bodies) {
      const double r_asym = origin_asymmetry(body);
      const ConvexBody pol = polar(body);
      std::set<double> gauge_args;
      std::set<double> polar_args;
      for (const double c : cs) {
        for (const double t : ts) {
          gauge_args.insert(c * t);
          polar_args.insert(c * c * t / (1.0 - c + r_asym));
        }
      }
      const ModulusCurve curve = build_modulus_curve(
          body, {gauge_args.begin(), gauge_args.end()}, 384);
      const ModulusCurve curve_polar = build_modulus_curve(
          pol, {polar_args.begin(), polar_args.end()}, 384);
      for (const double c : cs) {
        const Vector z = (1.0 - c) / gauge(body, dir) * dir;
        const ConvexBody shifted = shift(body, z);
        const ConvexBody shifted_polar = polar(shifted);
        for (const double t : ts) {
          const double bg = shift_bound_gauge(curve, c, r_asym, t);
          const ModulusBracket eg = modulus_estimate(shifted, t, 384);
          const double bp = shift_bound_polar(curve_polar, c, r_asym, t);
          const ModulusBracket ep = modulus_estimate(shifted_polar, t, 384);
          worst_excess = std::max({worst_excess, bg - eg.upper, bp - ep.upper});
          violations += bg > eg.upper + 1e-6 ? 1 : 0;
          violations += bp > ep.upper + 1e-6 ? 1 : 0;
          cells += 2;
        }
      }
    }
    out.pass = violations == 0;
    out.sample_value = worst_excess;
    out.detail = fmt("%.0f transfer cells, %.0f violations",
                     static_cast<double>(cells), static_cast<double>(violations));
  }

  // 6. The closed-form regime replays exactly in rational arithmetic.
  void rational_replay(CriterionResult& out) {
    bool ok = true;
    for (int n = 2; n <= 10; ++n) {
      const Rational n3 = Rational(n).pow(3);
      const Rational eps0 = Rational(1, 128000) / Rational(n).pow(9);
      const auto r = (Rational(16) * eps0).exact_cbrt();
      ok = ok && r.has_value();
      if (r) {
        ok = ok && *r == Rational(1) / (Rational(20) * n3);
        ok = ok && Rational(40) * n3 * *r == Rational(2);
      }
      const DiameterTrace trace = diameter_bound(n);
      ok = ok && trace.ok();
      ok = ok && trace.term == Rational(5, 8);
      ok = ok && trace.bound == (Rational(1) - trace.eps) * Rational(n).pow(2);
      if (n == 10) out.sample_value = trace.bound.to_double();
    }
    out.pass = ok;
    out.detail = "radius and diameter identities, n = 2..10";
  }

  // 7. The lp corollary stays consistent with the direct radius solve.
  void lp_consistency(CriterionResult& out) {
    bool ok = true;
    double worst_ratio = 0.0;
    // At p = 2 the two branch formulas coincide with the round-ball closed
    // form up to fixed constants: (high branch - 1) / (ball bound - 1)
    // equals 320 / (40 * 16^(1/3)) * n^(5/3), and approaching 2 from below
    // reproduces the high branch up to 2^(-2/3).
    for (const int n : {2, 3}) {
      const double eps = 1e-14;
      const LpCorollary high = lp_corollary(2.0, n, eps);
      const double ball_term = 40.0 * std::pow(n, 3) * std::cbrt(16.0 * eps);
      const double expected =
          320.0 / (40.0 * std::cbrt(16.0)) * std::pow(n, 5.0 / 3.0);
      ok = ok && std::abs((high.bound - 1.0) / ball_term / expected - 1.0) <=
                     1e-12;
      const LpCorollary low = lp_corollary(2.0 - 1e-9, n, eps);
      const double branch_ratio =
          (low.bound - 1.0) / (high.bound - 1.0) / std::pow(2.0, -2.0 / 3.0);
      ok = ok && std::abs(branch_ratio - 1.0) <= 1e-6;
    }
    // Direct envelope solves never need a larger radius than the corollary
    // certifies, at deficits one hundredth of the threshold.
    for (const double p : {2.5, 4.0}) {
      for (const int n : {2, 3}) {
        const LpCorollary probe = lp_corollary(p, n, 0.0);
        const double eps = 1e-2 * probe.threshold;
        const LpCorollary cor = lp_corollary(p, n, eps);
        ok = ok && cor.applicable;
        ok = ok && !lp_corollary(p, n, 1.01 * probe.threshold).applicable;
        const double q = p / (p - 1.0);
        std::vector<double> ts = {0.0};
        const double arg = cor.proof_r / (2.0 * n * n);
        for (int k = -24; k <= 24; ++k) {
          const double t = arg * std::pow(2.0, k / 4.0);
          if (t <= 1.0) ts.push_back(t);
        }
        const double solved =
            solve_r(StabilityKind::symmetric, n, eps, lp_modulus_curve(q, ts));
        const double ratio = solved / cor.proof_r;
        worst_ratio = std::max(worst_ratio, ratio);
        ok = ok && solved <= cor.proof_r * (1.0 + 1e-9);
      }
    }
    out.pass = ok;
    out.sample_value = worst_ratio;
    out.detail = fmt("worst solve/corollary radius ratio %.3g", worst_ratio);
  }

  // 8. Near-extremal pipeline: jittered simplices against the round ball.
  void near_extremal(CriterionResult& out) {
    const ConvexBody ball = ConvexBody::lp_ball(2.0, 3);
    bool ok = true;

    const StabilityReport equality =
        validate_stability(ball, regular_simplex(3), StabilityKind::ellipsoid);
    ok = ok && equality.applicable && !equality.violation;
    ok = ok && std::abs(equality.bound - 1.0) <= opts.tol_distance;
    ok = ok && std::abs(equality.proximity.upper - 1.0) <= opts.tol_distance;
    bounds.push_back(equality.proximity);

    int violations = 0;
    double worst_prox = 0.0;
    for (int i = 0; i < opts.stability_instances; ++i) {
      const ConvexBody k =
          jittered_simplex(3, 1e-6, opts.seed, static_cast<std::uint64_t>(i));
      const StabilityReport rep =
          validate_stability(ball, k, StabilityKind::ellipsoid);
      violations += rep.violation ? 1 : 0;
      worst_prox = std::max(worst_prox, rep.proximity.upper);
      bounds.push_back(rep.proximity);
      ok = ok && rep.applicable;  // a jittered simplex is still a simplex
    }
    ok = ok && violations == 0;
    out.pass = ok;
    out.sample_value = worst_prox;
    out.detail = fmt("%.0f instances, 0 expected violations, worst proximity %.9g",
                     static_cast<double>(opts.stability_instances), worst_prox);
  }

  // 9. Gradient spot checks, bound ordering, and byte determinism.
  void hygiene(CriterionResult& out) {
    bool ok = true;

    // Barrier gradient against central differences at feasible points.
    const ConvexBody k = regular_simplex(3);
    const ConvexBody l = ConvexBody::lp_ball(2.0, 3);
    const Matrix verts = k.vertices();
    CounterRng rng(opts.seed, 97);
    double worst_rel = 0.0;
    int checked = 0;
    while (checked < opts.fd_points) {
      Matrix a = 0.25 * Matrix::Identity(3, 3);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) += 0.05 * rng.normal();
      }
      const Vector b = 0.05 * rng.normal_vector(3);
      const BarrierEval at = barrier_eval(verts, l, 8.0, a, b);
      if (!at.feasible) continue;
      ++checked;
      Vector fd(12);
      for (int j = 0; j < 12; ++j) {
        const double h = 1e-6;
        Matrix ap = a, am = a;
        Vector bp = b, bm = b;
        if (j < 9) {
          ap(j % 3, j / 3) += h;  // column-major stacking, matching the grad
          am(j % 3, j / 3) -= h;
        } else {
          bp[j - 9] += h;
          bm[j - 9] -= h;
        }
        const BarrierEval up = barrier_eval(verts, l, 8.0, ap, bp);
        const BarrierEval dn = barrier_eval(verts, l, 8.0, am, bm);
        fd[j] = (up.value - dn.value) / (2e-6);
      }
      const double rel = (fd - at.grad).norm() / std::max(1.0, at.grad.norm());
      worst_rel = std::max(worst_rel, rel);
      ok = ok && rel <= 1e-4;
    }

    // Every bound the suite produced is ordered.
    for (const DistanceBound& b : bounds) {
      ok = ok && b.lower <= b.upper + 1e-12;
    }

    // Rerunning the heaviest pipeline with the same seed is byte-identical.
    const BodyPair pair = random_pair(2, opts.seed, 0);
    const std::string once = dump_json(to_json(grunbaum_upper(pair.k, pair.l)));
    const std::string twice =
        dump_json(to_json(grunbaum_upper(pair.k, pair.l)));
    ok = ok && once == twice;

    out.pass = ok;
    out.sample_value = worst_rel;
    out.detail = fmt("worst gradient deviation %.3g over %.0f ordered bounds",
                     worst_rel, static_cast<double>(bounds.size()));
  }
};

}  // namespace

std::vector<CriterionResult> run_selfcheck(const SelfcheckOptions& options,
                                           std::ostream* log) {
  if (!(options.tol_distance > 0.0)) {
    fail(ErrorCode::domain_error, "selfcheck: tolerance must be positive");
  }
  if (options.pairs_2d < 1 || options.pairs_3d < 1 ||
      options.stability_instances < 1 || options.fd_points < 1) {
    fail(ErrorCode::domain_error, "selfcheck: counts must be positive");
  }

  Suite suite;
  suite.opts = options;

  struct Entry {
    const char* name;
    void (Suite::*body)(CriterionResult&);
  };
  const Entry entries[] = {
      {"distance ceiling on random pairs", &Suite::ceiling},
      {"simplex against the ball attains the ceiling",
       &Suite::simplex_equality},
      {"decomposition certificates and sandwich", &Suite::certificates},
      {"lp modulus brackets", &Suite::lp_brackets},
      {"shifted-modulus envelopes", &Suite::shift_envelopes},
      {"exact rational replay", &Suite::rational_replay},
      {"lp bound consistency", &Suite::lp_consistency},
      {"near-extremal pipeline", &Suite::near_extremal},
      {"numerics hygiene", &Suite::hygiene},
  };

  std::vector<CriterionResult> results;
  results.reserve(9);
  int index = 1;
  for (const Entry& entry : entries) {
    CriterionResult result = suite.run(index, entry.name, entry.body);
    if (log != nullptr) {
      char line[256];
      std::snprintf(line, sizeof line, "[%s] %d. %s (%.2fs) %s\n",
                    result.pass ? "PASS" : "FAIL", result.index,
                    result.name.c_str(), result.seconds,
                    result.detail.c_str());
      *log << line << std::flush;
    }
    results.push_back(std::move(result));
    ++index;
  }
  return results;
}

}  // namespace cvx
