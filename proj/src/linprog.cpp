#include "cvxgeo/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvx {

namespace {

constexpr double kPivotEps = 1e-9;        // ratio-test pivot floor
constexpr double kReducedCostEps = 1e-10;  // entering-column threshold

// Tableau state for standard form: min c^T z, A z = b, z >= 0, b >= 0.
struct Tableau {
  Matrix a;                // m × nz, kept as B^{-1} A under pivoting
  Vector b;                // m, kept as B^{-1} b (nonnegative up to roundoff)
  std::vector<int> basis;  // m basic column indices

  void pivot(int row, int col) {
    const double piv = a(row, col);
    a.row(row) /= piv;
    b(row) /= piv;
    for (int k = 0; k < a.rows(); ++k) {
      if (k == row) continue;
      const double f = a(k, col);
      if (f != 0.0) {
        a.row(k) -= f * a.row(row);
        b(k) -= f * b(row);
      }
    }
    basis[row] = col;
  }
};

// Bland's rule simplex on the tableau for cost vector `cost`; columns with
// banned[j] never enter. Returns false when the problem is unbounded below.
bool run_simplex(Tableau& t, const Vector& cost, const std::vector<bool>& banned) {
  const int m = static_cast<int>(t.a.rows());
  const int nz = static_cast<int>(t.a.cols());
  const int max_iters = 200 * (m + nz) + 2000;

  for (int iter = 0; iter < max_iters; ++iter) {
    // Reduced costs r = cost − A^T cost_basis (recomputed each step: the
    // problems here are small and this avoids incremental-update drift).
    Vector cb(m);
    for (int i = 0; i < m; ++i) cb[i] = cost[t.basis[i]];
    Vector r = cost - t.a.transpose() * cb;

    int enter = -1;
    for (int j = 0; j < nz; ++j) {
      if (banned[j]) continue;
      if (r[j] < -kReducedCostEps) {
        enter = j;
        break;  // Bland: lowest eligible index
      }
    }
    if (enter < 0) return true;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double aij = t.a(i, enter);
      if (aij > kPivotEps) {
        const double ratio = std::max(t.b[i], 0.0) / aij;
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 &&
             (leave < 0 || t.basis[i] < t.basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    t.pivot(leave, enter);
  }
  fail(ErrorCode::solver_stall, "simplex exceeded its iteration budget");
}

}  // namespace

LpResult solve_lp(const LpProblem& prob) {
  const int n = static_cast<int>(prob.c.size());
  const int m_ub = static_cast<int>(prob.a_ub.rows());
  const int m_eq = static_cast<int>(prob.a_eq.rows());
  const int m = m_ub + m_eq;

  std::vector<bool> nonneg = prob.nonneg;
  if (nonneg.empty()) nonneg.assign(n, false);

  // Column layout of the standard form: one column per nonnegative variable,
  // two (x+, x−) per free variable, then slacks, then artificials.
  std::vector<int> pos_col(n), neg_col(n, -1);
  int nz = 0;
  for (int j = 0; j < n; ++j) {
    pos_col[j] = nz++;
    if (!nonneg[j]) neg_col[j] = nz++;
  }
  const int slack0 = nz;
  nz += m_ub;
  const int art0 = nz;
  nz += m;

  Tableau t;
  t.a = Matrix::Zero(m, nz);
  t.b = Vector::Zero(m);
  t.basis.assign(m, -1);

  auto fill_row = [&](int row, const Eigen::RowVectorXd& coeffs, double rhs) {
    for (int j = 0; j < n; ++j) {
      t.a(row, pos_col[j]) = coeffs[j];
      if (neg_col[j] >= 0) t.a(row, neg_col[j]) = -coeffs[j];
    }
    t.b[row] = rhs;
  };

  for (int i = 0; i < m_ub; ++i) {
    fill_row(i, prob.a_ub.row(i), prob.b_ub[i]);
    t.a(i, slack0 + i) = 1.0;
  }
  for (int i = 0; i < m_eq; ++i) {
    fill_row(m_ub + i, prob.a_eq.row(i), prob.b_eq[i]);
  }

  // Flip rows to make b nonnegative, then install the artificial basis.
  for (int i = 0; i < m; ++i) {
    if (t.b[i] < 0.0) {
      t.a.row(i) = -t.a.row(i);
      t.b[i] = -t.b[i];
    }
    t.a(i, art0 + i) = 1.0;
    t.basis[i] = art0 + i;
  }

  const double scale = 1.0 + (m > 0 ? t.b.cwiseAbs().maxCoeff() : 0.0);

  // Phase 1: minimize the sum of artificials.
  Vector phase1_cost = Vector::Zero(nz);
  for (int i = 0; i < m; ++i) phase1_cost[art0 + i] = 1.0;
  std::vector<bool> no_ban(nz, false);
  if (!run_simplex(t, phase1_cost, no_ban)) {
    fail(ErrorCode::solver_stall, "phase-1 simplex reported unbounded");
  }

  double infeas = 0.0;
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] >= art0) infeas += std::max(t.b[i], 0.0);
  }
  LpResult result;
  if (infeas > 1e-9 * scale) {
    result.status = LpStatus::infeasible;
    return result;
  }

  // Drive leftover zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(t.a(i, j)) > kPivotEps) {
        t.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 with artificial columns banned.
  Vector cost = Vector::Zero(nz);
  const double sign = prob.maximize ? -1.0 : 1.0;  // simplex minimizes
  for (int j = 0; j < n; ++j) {
    cost[pos_col[j]] = sign * prob.c[j];
    if (neg_col[j] >= 0) cost[neg_col[j]] = -sign * prob.c[j];
  }
  std::vector<bool> banned(nz, false);
  for (int j = art0; j < nz; ++j) banned[j] = true;

  if (!run_simplex(t, cost, banned)) {
    result.status = LpStatus::unbounded;
    return result;
  }

  Vector z = Vector::Zero(nz);
  for (int i = 0; i < m; ++i) z[t.basis[i]] = t.b[i];
  result.x = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    result.x[j] = z[pos_col[j]] - (neg_col[j] >= 0 ? z[neg_col[j]] : 0.0);
  }
  result.value = prob.c.dot(result.x);
  result.status = LpStatus::optimal;
  return result;
}

bool lp_feasible(const LpProblem& prob) {
  LpProblem p = prob;
  p.c = Vector::Zero(p.c.size());
  return solve_lp(p).status == LpStatus::optimal;
}

}  // namespace cvx
