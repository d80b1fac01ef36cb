#ifndef CVXGEO_NNLS_HPP
#define CVXGEO_NNLS_HPP

#include "cvxgeo/types.hpp"

namespace cvx {

struct NnlsResult {
  Vector x;         // nonnegative coefficients
  double residual;  // ||A x − b||_2
};

// Solve min ||A x − b||_2 subject to x >= 0 (active-set method). A small
// Tikhonov damping keeps the passive-set solves well conditioned when A has
// nearly dependent columns; `damping` is the squared regularization weight.
NnlsResult solve_nnls(const Matrix& a, const Vector& b, double damping = 1e-12);

}  // namespace cvx

#endif  // CVXGEO_NNLS_HPP
