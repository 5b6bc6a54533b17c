#pragma once

#include <optional>
#include <string>

#include "rcm/constraint_projection.hpp"
#include "rcm/types.hpp"

namespace rcm {

/// f(x) = 0.5 x^T Q x + c^T x + constant.
struct QuadraticForm {
  Matrix q;
  Vector c;
  double constant = 0.0;
};

/// min f(x) subject to A x = b. Callbacks must be pure functions of x.
struct ProblemInstance {
  std::string name;
  ConstraintSystem cs;
  Vector x0;
  ObjectiveFn objective;
  GradientFn gradient;
  HessianFn hessian;  // empty when no analytic Hessian is available
  bool convex = false;
  std::optional<QuadraticForm> quadratic;
  /// Reference optimum and where it comes from ("closed form", "paper table", ...).
  std::optional<double> known_fstar;
  std::string fstar_source;

  int dim() const { return static_cast<int>(x0.size()); }

  /// Throws DimensionError / InvalidArgument on inconsistent sizes or missing callbacks.
  void validate() const;
};

}  // namespace rcm
