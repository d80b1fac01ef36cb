#include "cvxgeo/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cvx {

namespace {

// Least squares over the passive columns only, damped: the solve is on
// [A_P; sqrt(damping) I] so rank-deficient passive sets stay stable.
Vector passive_solve(const Matrix& a, const Vector& b,
                     const std::vector<int>& passive, double damping) {
  const int k = static_cast<int>(passive.size());
  Matrix ap(a.rows(), k);
  for (int j = 0; j < k; ++j) ap.col(j) = a.col(passive[j]);
  Matrix gram = ap.transpose() * ap;
  gram.diagonal().array() += damping;
  return gram.ldlt().solve(ap.transpose() * b);
}

}  // namespace

NnlsResult solve_nnls(const Matrix& a, const Vector& b, double damping) {
  const int n = static_cast<int>(a.cols());
  Vector x = Vector::Zero(n);
  std::vector<bool> in_passive(n, false);
  std::vector<int> passive;

  const double tol = 1e-10 * (1.0 + b.norm()) * (1.0 + a.cwiseAbs().maxCoeff());
  const int max_outer = 3 * n + 30;

  for (int outer = 0; outer < max_outer; ++outer) {
    Vector w = a.transpose() * (b - a * x);

    int best = -1;
    double best_w = tol;
    for (int j = 0; j < n; ++j) {
      if (!in_passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;  // KKT satisfied

    in_passive[best] = true;
    passive.push_back(best);

    // Inner loop: trim passive variables that the unconstrained solve
    // drives nonpositive, stepping only as far as feasibility allows.
    for (int inner = 0; inner < max_outer; ++inner) {
      Vector s = passive_solve(a, b, passive, damping);

      double min_s = s.size() ? s.minCoeff() : 1.0;
      if (min_s > 0.0) {
        x.setZero();
        for (size_t j = 0; j < passive.size(); ++j) x[passive[j]] = s[j];
        break;
      }

      double alpha = 1.0;
      for (size_t j = 0; j < passive.size(); ++j) {
        if (s[j] <= 0.0) {
          const double xj = x[passive[j]];
          if (xj - s[j] > 0.0) alpha = std::min(alpha, xj / (xj - s[j]));
        }
      }
      for (size_t j = 0; j < passive.size(); ++j) {
        x[passive[j]] += alpha * (s[j] - x[passive[j]]);
      }

      std::vector<int> kept;
      for (int j : passive) {
        if (x[j] > 1e-14) {
          kept.push_back(j);
        } else {
          x[j] = 0.0;
          in_passive[j] = false;
        }
      }
      passive = kept;
      if (passive.empty()) break;
    }
  }

  NnlsResult result;
  result.x = x;
  result.residual = (a * x - b).norm();
  return result;
}

}  // namespace cvx
