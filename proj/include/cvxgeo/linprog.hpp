#ifndef CVXGEO_LINPROG_HPP
#define CVXGEO_LINPROG_HPP

#include "cvxgeo/types.hpp"

#include <vector>

namespace cvx {

// Small dense linear program:
//   optimize c^T x  subject to  a_ub x <= b_ub,  a_eq x = b_eq,
// with x_i >= 0 where nonneg[i] is set and x_i free otherwise.
// Sized for geometry subproblems (tens of variables, low hundreds of rows).
struct LpProblem {
  Vector c;
  Matrix a_ub;  // may have zero rows
  Vector b_ub;
  Matrix a_eq;  // may have zero rows
  Vector b_eq;
  std::vector<bool> nonneg;  // empty means all variables free
  bool maximize = true;

  static LpProblem with_dims(int nvars) {
    LpProblem p;
    p.c = Vector::Zero(nvars);
    p.a_ub = Matrix::Zero(0, nvars);
    p.b_ub = Vector::Zero(0);
    p.a_eq = Matrix::Zero(0, nvars);
    p.b_eq = Vector::Zero(0);
    p.nonneg.assign(nvars, false);
    return p;
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;  // objective in the caller's sense
  Vector x;

  bool ok() const { return status == LpStatus::optimal; }
};

// Two-phase dense simplex with Bland's rule: deterministic and cycle-free.
LpResult solve_lp(const LpProblem& prob);

// Phase-1 only convenience: is the constraint system feasible?
bool lp_feasible(const LpProblem& prob);

}  // namespace cvx

#endif  // CVXGEO_LINPROG_HPP
