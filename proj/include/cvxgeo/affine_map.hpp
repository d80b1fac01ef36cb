#ifndef CVXGEO_AFFINE_MAP_HPP
#define CVXGEO_AFFINE_MAP_HPP

#include "cvxgeo/types.hpp"

namespace cvx {

// Invertible affine map x -> linear * x + translation.
struct AffineMap {
  Matrix linear;
  Vector translation;

  static AffineMap identity(int n) {
    return {Matrix::Identity(n, n), Vector::Zero(n)};
  }

  static AffineMap translate(const Vector& t) {
    return {Matrix::Identity(static_cast<int>(t.size()), static_cast<int>(t.size())), t};
  }

  static AffineMap scaling(int n, double s) {
    return {s * Matrix::Identity(n, n), Vector::Zero(n)};
  }

  int dim() const { return static_cast<int>(translation.size()); }

  Vector operator()(const Vector& x) const { return linear * x + translation; }

  // this ∘ inner, i.e. x -> this(inner(x)).
  AffineMap compose(const AffineMap& inner) const {
    return {linear * inner.linear, linear * inner.translation + translation};
  }

  AffineMap inverse() const {
    Matrix inv = linear.inverse();
    return {inv, -(inv * translation)};
  }

  bool is_identity(double tol = 0.0) const {
    int n = dim();
    return (linear - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol &&
           translation.cwiseAbs().maxCoeff() <= tol;
  }
};

}  // namespace cvx

#endif  // CVXGEO_AFFINE_MAP_HPP
